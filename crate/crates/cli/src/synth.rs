//! Seeded synthetic inputs for every instance kind. Money is converted to
//! integer cents on the way out.

use chargeplan::extensions::{Bid, Expansion, MultiPeriodInstance, Period, Provider, SubsidyInstance};
use chargeplan::oracle::{gen_instance, CostSource, GenParams, Generated};
use chargeplan::{DistanceTable, MpcInstance, SiteId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{CostKind, GenArgs};
use crate::error::CliResult;
use crate::pipeline::InstanceBundle;
use crate::run::dollars_to_cents;

pub fn params(a: &GenArgs) -> GenParams {
    GenParams {
        site_count: a.sites,
        interest_count: a.interests,
        interests_at_sites: a.interests_at_sites,
        extent: a.extent,
        radius: a.radius,
        cost_source: match a.costs {
            CostKind::Uniform => GenParams::default().cost_source,
            CostKind::Pipeline => pipeline_costs(),
        },
        budget_fraction: a.budget_fraction,
        noise_sigma: a.noise_sigma,
        seed: a.seed,
        ..GenParams::default()
    }
}

pub fn pipeline_costs() -> CostSource {
    CostSource::Pipeline {
        poi_count: 40,
        energy_per_session: 20.0,
        power_kw: 7.0,
        sla_wait: 5.0 / 60.0,
    }
}

/// Same instance with costs and budget in cents.
pub fn in_cents(inst: &MpcInstance) -> MpcInstance {
    MpcInstance {
        cost: inst.cost.iter().map(|&c| dollars_to_cents(c).max(1.0)).collect(),
        budget: dollars_to_cents(inst.budget),
        ..inst.clone()
    }
}

pub fn bundle(g: &Generated) -> InstanceBundle {
    let inst = in_cents(&g.instance);
    InstanceBundle {
        site_ids: (0..inst.site_count).map(|i| format!("s{i}")).collect(),
        interest_ids: (0..inst.interest_count).map(|l| format!("l{l}")).collect(),
        demand: inst.demand.clone(),
        cost_cents: inst.cost.iter().map(|&c| c as i64).collect(),
        slots: Vec::new(),
        budget_cents: inst.budget as i64,
        radius: inst.radius,
        distances: g.distances.clone(),
    }
}

pub fn mpc(a: &GenArgs) -> CliResult<InstanceBundle> {
    Ok(bundle(&gen_instance(&params(a))?))
}

/// Sites arrive in equal batches over the periods; the final budget is
/// released evenly, and every period offers two slot expansions.
pub fn multi_period(a: &GenArgs) -> CliResult<MultiPeriodInstance> {
    let g = gen_instance(&params(a))?;
    let inst = in_cents(&g.instance);
    let t_count = a.periods.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed ^ 0x5eed_0001);
    let n = inst.site_count;
    let m = inst.interest_count;
    let mut periods = Vec::with_capacity(t_count);
    for t in 1..=t_count {
        let count = (n * t).div_ceil(t_count).max(1);
        let data: Vec<f64> = (0..m)
            .flat_map(|l| g.distances.row(chargeplan::InterestId(l))[..count].to_vec())
            .collect();
        let expansions = if t > 1 {
            (0..2)
                .map(|_| {
                    let site = rng.random_range(0..count);
                    Expansion {
                        site: SiteId(site),
                        cost: (inst.cost[site] * rng.random_range(0.2..0.5)).round().max(1.0),
                        demand_gain: (inst.demand[site] * rng.random_range(0.1..0.4)).round(),
                    }
                })
                .collect()
        } else {
            Vec::new()
        };
        periods.push(Period {
            site_count: count,
            demand: inst.demand[..count].to_vec(),
            cost: inst.cost[..count].to_vec(),
            budget_release: (inst.budget / t_count as f64).round(),
            distances: DistanceTable::new(m, count, data)?,
            radius: Some(inst.radius),
            radius_grid: None,
            expansions,
        });
    }
    Ok(MultiPeriodInstance { periods, alpha: 1.0 })
}

/// Government reserves are the site costs; each provider bids on about half
/// the sites, asking for part of the reserve and paying a share itself.
pub fn subsidy(a: &GenArgs) -> CliResult<SubsidyInstance> {
    let g = gen_instance(&params(a))?;
    let base = in_cents(&g.instance);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed ^ 0x5eed_0002);
    let total: f64 = base.cost.iter().sum();
    let providers = (0..a.providers)
        .map(|_| {
            let mut bids = Vec::new();
            for i in 0..base.site_count {
                if rng.random_bool(0.5) {
                    bids.push(Bid {
                        site: SiteId(i),
                        subsidy: (base.cost[i] * rng.random_range(0.2..1.1)).round(),
                        price: (base.cost[i] * rng.random_range(0.1..0.6)).round(),
                    });
                }
            }
            Provider {
                budget: (total * rng.random_range(0.05..0.3)).round(),
                bids,
            }
        })
        .collect();
    Ok(SubsidyInstance { base, providers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn args(extra: &[&str]) -> GenArgs {
        #[derive(Parser)]
        struct W {
            #[command(flatten)]
            g: GenArgs,
        }
        let mut v = vec!["gen"];
        v.extend_from_slice(extra);
        W::parse_from(v).g
    }

    #[test]
    fn generated_kinds_are_valid() {
        let a = args(&["--sites", "9", "--periods", "3", "--providers", "2"]);
        let b = mpc(&a).unwrap();
        b.check().unwrap();
        assert!(b.cost_cents.iter().all(|&c| c >= 100));
        let mp = multi_period(&a).unwrap();
        mp.validate().unwrap();
        assert_eq!(mp.periods.iter().map(|p| p.site_count).collect::<Vec<_>>(), vec![3, 6, 9]);
        let s = subsidy(&a).unwrap();
        s.validate().unwrap();
        assert_eq!(s.providers.len(), 2);
    }

    #[test]
    fn same_seed_same_output() {
        let a = args(&["--seed", "7"]);
        assert_eq!(mpc(&a).unwrap(), mpc(&a).unwrap());
        assert_eq!(subsidy(&a).unwrap(), subsidy(&a).unwrap());
    }
}
