//! Incremental deployment over several periods.
//!
//! Each period releases budget, may add candidate sites and may move the
//! locations of interest. Installations are permanent; a period solves the
//! residual problem (sites not yet installed, locations not yet reached) with
//! the budget released so far minus what has been spent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    within_budget, DistanceTable, InterestId, MpcInstance, SiteId, Solution,
};
use crate::reachability::{objective, radius_candidates};
use crate::solver::MpcSolver;

/// Optional slot expansion of a site installed in an earlier period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub site: SiteId,
    pub cost: f64,
    /// Additional demand served once expanded.
    pub demand_gain: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Period {
    /// Candidate sites are ids `0..site_count`; later periods keep every
    /// earlier site.
    pub site_count: usize,
    pub demand: Vec<f64>,
    /// Installation cost.
    pub cost: Vec<f64>,
    pub budget_release: f64,
    /// Locations of interest by site.
    pub distances: DistanceTable,
    /// Radius used when the trade-off weight is 1, and the fallback when the
    /// period has no locations of interest.
    #[serde(default)]
    pub radius: Option<f64>,
    /// Radii to try when trading demand against radius; defaults to every
    /// candidate radius of the period.
    #[serde(default)]
    pub radius_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub expansions: Vec<Expansion>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiPeriodInstance {
    pub periods: Vec<Period>,
    /// Weight of demand against radius, in `[0, 1]`.
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodPlan {
    /// 1-based.
    pub period: usize,
    pub radius: f64,
    pub installed: Vec<SiteId>,
    /// Indices into the period's expansion options.
    pub expanded: Vec<usize>,
    /// Budget carried in plus this period's release.
    pub available: f64,
    pub spend: f64,
    pub carry_out: f64,
    /// Demand of every installed site plus expansion gains so far.
    pub served_demand: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeploymentSchedule {
    pub plans: Vec<PeriodPlan>,
    /// Installation indicator after each period, over that period's sites.
    pub selections: Vec<Vec<bool>>,
}

fn invalid(msg: String) -> Error {
    Error::InvalidInput(msg)
}

impl MultiPeriodInstance {
    pub fn validate(&self) -> Result<()> {
        if self.periods.is_empty() {
            return Err(invalid("at least one period is required".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(invalid(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        let mut prev_sites = 0;
        for (t, p) in self.periods.iter().enumerate() {
            let t = t + 1;
            let n = p.site_count;
            if n < prev_sites {
                return Err(invalid(format!(
                    "period {t} has {n} sites but an earlier period had {prev_sites}"
                )));
            }
            prev_sites = n;
            if p.demand.len() != n || p.cost.len() != n || p.distances.site_count() != n {
                return Err(invalid(format!("period {t}: per-site data must have {n} entries")));
            }
            if p.demand.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
                return Err(invalid(format!("period {t}: demands must be finite and non-negative")));
            }
            if p.cost.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
                return Err(invalid(format!("period {t}: costs must be finite and positive")));
            }
            if !(p.budget_release >= 0.0 && p.budget_release.is_finite()) {
                return Err(invalid(format!("period {t}: budget release must be non-negative")));
            }
            for e in &p.expansions {
                if e.site.0 >= n || !(e.cost > 0.0) || !(e.demand_gain >= 0.0) {
                    return Err(invalid(format!("period {t}: invalid expansion of site {}", e.site)));
                }
            }
            let fixed_needed = self.alpha >= 1.0 || p.distances.interest_count() == 0;
            if fixed_needed && p.radius.is_none() {
                return Err(invalid(format!("period {t}: a fixed radius is required")));
            }
        }
        Ok(())
    }
}

enum Action {
    Install(usize),
    Expand(usize),
}

/// Sub-instance over the sites still worth acting on and the locations not yet
/// reached by installed sites.
struct Residual {
    inst: MpcInstance,
    actions: Vec<Action>,
}

fn residual(p: &Period, installed: &[bool], expanded: &[bool], radius: f64, budget: f64) -> Residual {
    let reached = |l: usize| (0..p.site_count).any(|i| installed[i] && p.distances.get(InterestId(l), SiteId(i)) <= radius);
    let open: Vec<usize> = (0..p.distances.interest_count()).filter(|&l| !reached(l)).collect();
    let mut actions = Vec::new();
    let mut demand = Vec::new();
    let mut cost = Vec::new();
    let mut cover_sets = Vec::new();
    for i in (0..p.site_count).filter(|&i| !installed[i]) {
        actions.push(Action::Install(i));
        demand.push(p.demand[i]);
        cost.push(p.cost[i]);
        cover_sets.push(
            open.iter()
                .enumerate()
                .filter(|(_, &l)| p.distances.get(InterestId(l), SiteId(i)) <= radius)
                .map(|(k, _)| InterestId(k))
                .collect(),
        );
    }
    for (k, e) in p.expansions.iter().enumerate() {
        if installed[e.site.0] && !expanded[k] {
            actions.push(Action::Expand(k));
            demand.push(e.demand_gain);
            cost.push(e.cost);
            cover_sets.push(Vec::new());
        }
    }
    Residual {
        inst: MpcInstance {
            site_count: actions.len(),
            interest_count: open.len(),
            demand,
            cost,
            budget,
            cover_sets,
            radius,
        },
        actions,
    }
}

struct Step {
    radius: f64,
    installs: Vec<usize>,
    expansions: Vec<usize>,
    spend: f64,
    served: f64,
}

fn apply(res: &Residual, sol: &Solution, radius: f64) -> Step {
    let mut installs = Vec::new();
    let mut expansions = Vec::new();
    for id in sol.selected_ids() {
        match res.actions[id.0] {
            Action::Install(i) => installs.push(i),
            Action::Expand(k) => expansions.push(k),
        }
    }
    Step {
        radius,
        installs,
        expansions,
        spend: sol.total_cost,
        served: 0.0,
    }
}

/// Greedy period-by-period plan: every period runs `solver` on its residual
/// problem. With `alpha < 1` each candidate radius of the period is tried and
/// the one scoring best on the demand/radius trade-off is kept.
pub fn multi_period_solve<S: MpcSolver + ?Sized>(
    mp: &MultiPeriodInstance,
    solver: &S,
) -> Result<DeploymentSchedule> {
    mp.validate()?;
    let final_sites = mp.periods.last().map_or(0, |p| p.site_count);
    let mut installed = vec![false; final_sites];
    let mut carry = 0.0;
    let mut gains = 0.0;
    let mut plans = Vec::new();
    let mut selections = Vec::new();

    for (t, p) in mp.periods.iter().enumerate() {
        let available = carry + p.budget_release;
        let current = &installed[..p.site_count];
        let expanded = vec![false; p.expansions.len()];
        let base_served = |installs: &[usize]| -> f64 {
            (0..p.site_count)
                .filter(|&i| current[i] || installs.contains(&i))
                .map(|i| p.demand[i])
                .sum()
        };

        let radii: Vec<f64> = if mp.alpha >= 1.0 || p.distances.interest_count() == 0 {
            vec![p.radius.expect("validated")]
        } else {
            match &p.radius_grid {
                Some(g) => {
                    let mut g = g.clone();
                    g.sort_by(f64::total_cmp);
                    g.dedup();
                    g
                }
                None => radius_candidates(&p.distances)?.radii,
            }
        };
        let bounds = if p.distances.interest_count() > 0 {
            let set = radius_candidates(&p.distances)?;
            Some((set.r_min, set.r_max))
        } else {
            None
        };

        let mut best: Option<(f64, Step)> = None;
        for &r in &radii {
            let res = residual(p, current, &expanded, r, available);
            let sol = match solver.solve(&res.inst) {
                Ok(sol) => sol,
                Err(Error::Infeasible(_)) => continue,
                Err(e) => return Err(e),
            };
            let mut step = apply(&res, &sol, r);
            let gain: f64 = step.expansions.iter().map(|&k| p.expansions[k].demand_gain).sum();
            step.served = base_served(&step.installs) + gains + gain;
            let score = match bounds {
                Some((lo, hi)) if mp.alpha < 1.0 => {
                    if r < lo || r > hi {
                        continue;
                    }
                    let total: f64 = p.demand.iter().sum();
                    objective(mp.alpha, step.served, total, r, lo, hi)
                }
                _ => 0.0,
            };
            if best.as_ref().is_none_or(|(b, _)| score > *b) {
                best = Some((score, step));
            }
        }
        let Some((_, step)) = best else {
            return Err(Error::PeriodInfeasible { period: t + 1 });
        };

        for &i in &step.installs {
            installed[i] = true;
        }
        gains += step.expansions.iter().map(|&k| p.expansions[k].demand_gain).sum::<f64>();
        carry = available - step.spend;
        let mut new_ids: Vec<SiteId> = step.installs.iter().copied().map(SiteId).collect();
        new_ids.sort_unstable();
        let mut exp_ids = step.expansions.clone();
        exp_ids.sort_unstable();
        plans.push(PeriodPlan {
            period: t + 1,
            radius: step.radius,
            installed: new_ids,
            expanded: exp_ids,
            available,
            spend: step.spend,
            carry_out: carry,
            served_demand: step.served,
        });
        selections.push(installed[..p.site_count].to_vec());
    }
    let schedule = DeploymentSchedule { plans, selections };
    debug_assert!(validate_schedule(mp, &schedule).is_empty(), "{:?}", validate_schedule(mp, &schedule));
    Ok(schedule)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ScheduleViolation {
    /// A site installed in an earlier period is missing later.
    Uninstalled { period: usize, site: SiteId },
    /// Spending up to this period exceeds the budget released so far.
    PrefixBudget { period: usize, spent: f64, released: f64 },
    Uncovered { period: usize, interest: InterestId },
    /// Unknown expansion option, or one on a site not installed beforehand.
    Expansion { period: usize, option: usize },
    /// The schedule's shape does not match the instance.
    Shape { period: usize },
}

/// Checks permanence of installations, the cumulative budget and per-period
/// coverage. Returns every violation found.
pub fn validate_schedule(mp: &MultiPeriodInstance, s: &DeploymentSchedule) -> Vec<ScheduleViolation> {
    let mut out = Vec::new();
    if s.plans.len() != mp.periods.len() || s.selections.len() != mp.periods.len() {
        out.push(ScheduleViolation::Shape { period: 0 });
        return out;
    }
    let mut spent = 0.0;
    let mut released = 0.0;
    let mut prev: Vec<bool> = Vec::new();
    for (t, (p, (plan, sel))) in mp.periods.iter().zip(s.plans.iter().zip(&s.selections)).enumerate() {
        let period = t + 1;
        if sel.len() != p.site_count {
            out.push(ScheduleViolation::Shape { period });
            continue;
        }
        for (i, &was) in prev.iter().enumerate() {
            if was && !sel[i] {
                out.push(ScheduleViolation::Uninstalled { period, site: SiteId(i) });
            }
        }
        let new_cost: f64 = (0..p.site_count)
            .filter(|&i| sel[i] && !prev.get(i).copied().unwrap_or(false))
            .map(|i| p.cost[i])
            .sum();
        let mut exp_cost = 0.0;
        for &k in &plan.expanded {
            match p.expansions.get(k) {
                Some(e) if prev.get(e.site.0).copied().unwrap_or(false) => exp_cost += e.cost,
                _ => out.push(ScheduleViolation::Expansion { period, option: k }),
            }
        }
        spent += new_cost + exp_cost;
        released += p.budget_release;
        if !within_budget(spent, released) {
            out.push(ScheduleViolation::PrefixBudget { period, spent, released });
        }
        for l in 0..p.distances.interest_count() {
            let reached = (0..p.site_count)
                .any(|i| sel[i] && p.distances.get(InterestId(l), SiteId(i)) <= plan.radius);
            if !reached {
                out.push(ScheduleViolation::Uncovered { period, interest: InterestId(l) });
            }
        }
        prev = sel.clone();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ipac::ipac_solve;
    use crate::SolverKind;

    fn period(n: usize, rows: &[Vec<f64>], release: f64) -> Period {
        let distances = if rows.is_empty() {
            DistanceTable::new(0, n, Vec::new()).unwrap()
        } else {
            DistanceTable::from_rows(rows).unwrap()
        };
        Period {
            site_count: n,
            demand: (0..n).map(|i| 10.0 - i as f64).collect(),
            cost: vec![2.0; n],
            budget_release: release,
            distances,
            radius: Some(1.0),
            radius_grid: None,
            expansions: Vec::new(),
        }
    }

    #[test]
    fn single_period_matches_ipac() {
        let rows = vec![vec![0.5, 2.0, 0.8], vec![3.0, 0.9, 1.5]];
        let p = period(3, &rows, 4.0);
        let mp = MultiPeriodInstance { periods: vec![p.clone()], alpha: 1.0 };
        let s = multi_period_solve(&mp, &SolverKind::Ipac).unwrap();
        let inst = MpcInstance::from_distances(p.demand, p.cost, 4.0, &p.distances, 1.0);
        let direct = ipac_solve(&inst).unwrap().solution;
        assert_eq!(s.selections[0], direct.selected);
        assert_eq!(s.plans[0].spend, direct.total_cost);
        assert_eq!(s.plans[0].served_demand, direct.total_demand);
        assert!(validate_schedule(&mp, &s).is_empty());
    }

    #[test]
    fn small_first_release_defers_installs() {
        let p1 = Period { cost: vec![5.0; 3], ..period(3, &[], 1.0) };
        let p2 = Period { cost: vec![5.0; 3], ..period(3, &[], 100.0) };
        let mp = MultiPeriodInstance { periods: vec![p1, p2], alpha: 1.0 };
        let s = multi_period_solve(&mp, &SolverKind::Ipac).unwrap();
        assert!(s.plans[0].installed.is_empty());
        assert_eq!(s.plans[0].carry_out, 1.0);
        assert_eq!(s.plans[1].available, 101.0);
        assert_eq!(s.plans[1].installed, vec![SiteId(0), SiteId(1), SiteId(2)]);
        assert!(validate_schedule(&mp, &s).is_empty());
    }

    #[test]
    fn expansion_reselects_installed_site() {
        let p1 = period(2, &[], 2.0);
        let mut p2 = period(3, &[], 3.0);
        p2.expansions = vec![Expansion { site: SiteId(0), cost: 1.0, demand_gain: 4.0 }];
        let mp = MultiPeriodInstance { periods: vec![p1, p2], alpha: 1.0 };
        let s = multi_period_solve(&mp, &SolverKind::Ipac).unwrap();
        assert_eq!(s.plans[0].installed, vec![SiteId(0)]);
        assert_eq!(s.plans[1].expanded, vec![0]);
        assert!(s.selections[1][0]);
        assert!(validate_schedule(&mp, &s).is_empty());
        assert_eq!(s.plans[1].served_demand, 10.0 + 9.0 + 4.0);
    }

    #[test]
    fn infeasible_period_is_reported() {
        let rows = vec![vec![0.5, 2.0]];
        let p1 = period(2, &rows, 0.0);
        let mp = MultiPeriodInstance { periods: vec![p1], alpha: 1.0 };
        assert_eq!(
            multi_period_solve(&mp, &SolverKind::Ipac).unwrap_err(),
            Error::PeriodInfeasible { period: 1 }
        );
    }

    #[test]
    fn trade_off_picks_a_radius_per_period() {
        let rows = vec![vec![0.5, 2.0], vec![3.0, 1.0]];
        let mut p = period(2, &rows, 2.0);
        p.radius = None;
        let mp = MultiPeriodInstance { periods: vec![p], alpha: 0.5 };
        let s = multi_period_solve(&mp, &SolverKind::Oracle).unwrap();
        // Only one site is affordable; site 1 reaches both at r = 2.
        assert_eq!(s.plans[0].radius, 2.0);
        assert_eq!(s.plans[0].installed, vec![SiteId(1)]);
        assert!(validate_schedule(&mp, &s).is_empty());
    }

    #[test]
    fn validator_flags_broken_schedules() {
        let p1 = period(2, &[], 2.0);
        let p2 = period(2, &[vec![0.5, 5.0]], 0.0);
        let mp = MultiPeriodInstance { periods: vec![p1, p2], alpha: 1.0 };
        let s = DeploymentSchedule {
            plans: vec![
                PeriodPlan { period: 1, radius: 1.0, installed: vec![SiteId(1)], expanded: vec![], available: 2.0, spend: 2.0, carry_out: 0.0, served_demand: 9.0 },
                PeriodPlan { period: 2, radius: 1.0, installed: vec![SiteId(0)], expanded: vec![], available: 0.0, spend: 2.0, carry_out: -2.0, served_demand: 10.0 },
            ],
            selections: vec![vec![false, true], vec![true, false]],
        };
        let v = validate_schedule(&mp, &s);
        assert!(v.contains(&ScheduleViolation::Uninstalled { period: 2, site: SiteId(1) }));
        assert!(v.iter().any(|x| matches!(x, ScheduleViolation::PrefixBudget { period: 2, .. })));
        assert!(!v.iter().any(|x| matches!(x, ScheduleViolation::Uncovered { .. })));
    }
}
