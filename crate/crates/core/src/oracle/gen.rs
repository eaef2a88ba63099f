use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::costing::{
    arrival_rate_from_demand, land_cost, min_slots, perturb_costs, service_rate_from_power,
    site_cost, LandCostModel, Location, PoiRecord, QueueSpec, SiteCostInputs, DEFAULT_COST_FLOOR,
    LEVEL2_INFRA_COST,
};
use crate::error::{Error, Result};
use crate::model::{DistanceTable, MpcInstance};

/// Where generated site costs come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostSource {
    /// Independent uniform draws.
    Uniform { min: f64, max: f64 },
    /// Queue-sized stations priced by the land cost model, with points of
    /// interest scattered over the extent.
    Pipeline {
        poi_count: usize,
        /// kWh per charging session.
        energy_per_session: f64,
        power_kw: f64,
        /// Hours.
        sla_wait: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub site_count: usize,
    pub interest_count: usize,
    /// Place one location of interest on each site (ignores `interest_count`).
    pub interests_at_sites: bool,
    /// Side of the square region, km.
    pub extent: f64,
    pub radius: f64,
    /// Inclusive bounds of the uniform demand draw.
    pub demand_range: (f64, f64),
    pub cost_source: CostSource,
    /// Budget as a fraction of the total cost.
    pub budget_fraction: f64,
    /// Standard deviation of Gaussian noise added to costs.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            site_count: 12,
            interest_count: 8,
            interests_at_sites: false,
            extent: 10.0,
            radius: 4.0,
            demand_range: (1.0, 100.0),
            cost_source: CostSource::Uniform { min: 1.0, max: 10.0 },
            budget_fraction: 0.5,
            noise_sigma: 0.0,
            seed: 42,
        }
    }
}

/// Generated instance together with the geometry it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generated {
    pub instance: MpcInstance,
    pub distances: DistanceTable,
    pub sites: Vec<(f64, f64)>,
    pub interests: Vec<(f64, f64)>,
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.site_count == 0 {
            return bad("site_count must be at least 1".into());
        }
        if !self.interests_at_sites && self.interest_count == 0 {
            return bad("interest_count must be at least 1".into());
        }
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return bad(format!("extent must be positive, got {}", self.extent));
        }
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return bad(format!("radius must be non-negative, got {}", self.radius));
        }
        let (lo, hi) = self.demand_range;
        if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
            return bad(format!("demand range [{lo}, {hi}] is invalid"));
        }
        if !(self.budget_fraction >= 0.0 && self.budget_fraction.is_finite()) {
            return bad(format!("budget fraction must be non-negative, got {}", self.budget_fraction));
        }
        match self.cost_source {
            CostSource::Uniform { min, max } if !(min > 0.0 && min <= max && max.is_finite()) => {
                bad(format!("cost range [{min}, {max}] is invalid"))
            }
            CostSource::Pipeline {
                energy_per_session,
                power_kw,
                sla_wait,
                ..
            } if !(energy_per_session > 0.0 && power_kw > 0.0 && sla_wait >= 0.0) => {
                bad("pipeline cost parameters must be positive".into())
            }
            _ => Ok(()),
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Draws an instance: sites and locations uniform in the square, Euclidean
/// distances, uniform demand and the configured cost source. The same
/// parameters always give the same instance.
pub fn gen_instance(p: &GenParams) -> Result<Generated> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let point = |rng: &mut ChaCha8Rng| (uniform(rng, 0.0, p.extent), uniform(rng, 0.0, p.extent));
    let sites: Vec<(f64, f64)> = (0..p.site_count).map(|_| point(&mut rng)).collect();
    let interests: Vec<(f64, f64)> = if p.interests_at_sites {
        sites.clone()
    } else {
        (0..p.interest_count).map(|_| point(&mut rng)).collect()
    };
    let (dlo, dhi) = p.demand_range;
    let demand: Vec<f64> = (0..p.site_count).map(|_| uniform(&mut rng, dlo, dhi)).collect();

    let cost: Vec<f64> = match &p.cost_source {
        CostSource::Uniform { min, max } => {
            (0..p.site_count).map(|_| uniform(&mut rng, *min, *max)).collect()
        }
        CostSource::Pipeline {
            poi_count,
            energy_per_session,
            power_kw,
            sla_wait,
        } => {
            let model = LandCostModel::default();
            let categories: Vec<&String> = model.score_table.keys().collect();
            let pois: Vec<PoiRecord> = (0..*poi_count)
                .map(|_| {
                    let (x, y) = point(&mut rng);
                    PoiRecord {
                        category: categories[rng.random_range(0..categories.len())].clone(),
                        location: Location::Planar { x, y },
                        distance_to_site: None,
                    }
                })
                .collect();
            let mu = service_rate_from_power(*power_kw, *energy_per_session);
            sites
                .iter()
                .zip(&demand)
                .map(|(&(x, y), &d)| {
                    // Demand is read as the peak hourly energy at the site.
                    let lambda = arrival_rate_from_demand(d, *energy_per_session);
                    let slots = match QueueSpec::new(lambda, mu, *sla_wait) {
                        Ok(q) => min_slots(&q),
                        Err(_) => 1,
                    };
                    let land = land_cost(&Location::Planar { x, y }, &pois, &model);
                    SiteCostInputs::new(slots, land, LEVEL2_INFRA_COST)
                        .map(|inputs| site_cost(&inputs))
                })
                .collect::<Result<_>>()?
        }
    };
    let cost = perturb_costs(&cost, p.noise_sigma, p.seed ^ 0x9e37_79b9_7f4a_7c15, DEFAULT_COST_FLOOR)?;
    let budget = p.budget_fraction * cost.iter().sum::<f64>();
    let distances = DistanceTable::euclidean(&interests, &sites);
    let instance = MpcInstance::from_distances(demand, cost, budget, &distances, p.radius);
    Ok(Generated {
        instance,
        distances,
        sites,
        interests,
    })
}
