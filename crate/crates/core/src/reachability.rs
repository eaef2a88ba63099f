//! Choosing the reachability radius.
//!
//! Cover sets only change when the radius crosses one of the interest-to-site
//! distances, so the best demand `D*(r)` is a step function and it suffices to
//! evaluate the trade-off at those distances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DistanceTable, MpcInstance, Solution};
use crate::solver::MpcSolver;

/// Candidate radii between the smallest radius at which every location can be
/// reached and the radius at which every site reaches every location.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusSet {
    pub r_min: f64,
    pub r_max: f64,
    /// Strictly increasing; first is `r_min`, last is `r_max`.
    pub radii: Vec<f64>,
}

/// `R^min = max_l min_i dist`, `R^max = max_l max_i dist`, and every distinct
/// distance in between.
pub fn radius_candidates(dist: &DistanceTable) -> Result<RadiusSet> {
    if dist.interest_count() == 0 || dist.site_count() == 0 {
        return Err(Error::InvalidInput(
            "radius candidates need at least one site and one location of interest".into(),
        ));
    }
    let mut r_min = f64::NEG_INFINITY;
    let mut r_max = f64::NEG_INFINITY;
    for l in 0..dist.interest_count() {
        let row = dist.row(crate::model::InterestId(l));
        let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        r_min = r_min.max(lo);
        r_max = r_max.max(hi);
    }
    let mut radii: Vec<f64> = dist.entries().iter().copied().filter(|&d| d >= r_min).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    Ok(RadiusSet {
        r_min,
        r_max,
        radii,
    })
}

/// Everything about an instance except the radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusFamily {
    pub demand: Vec<f64>,
    pub cost: Vec<f64>,
    pub budget: f64,
    pub distances: DistanceTable,
}

impl RadiusFamily {
    pub fn new(demand: Vec<f64>, cost: Vec<f64>, budget: f64, distances: DistanceTable) -> Self {
        RadiusFamily {
            demand,
            cost,
            budget,
            distances,
        }
    }

    pub fn at(&self, radius: f64) -> MpcInstance {
        MpcInstance::from_distances(
            self.demand.clone(),
            self.cost.clone(),
            self.budget,
            &self.distances,
            radius,
        )
    }

    pub fn total_demand(&self) -> f64 {
        self.demand.iter().sum()
    }
}

/// Solves at `radius`; an infeasible instance yields `None`.
fn solve_at<S: MpcSolver + ?Sized>(
    family: &RadiusFamily,
    radius: f64,
    solver: &S,
) -> Result<Option<Solution>> {
    match solver.solve(&family.at(radius)) {
        Ok(sol) => Ok(Some(sol)),
        Err(Error::Infeasible(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Best demand the solver finds at `radius`, or 0 when it finds no feasible
/// selection. The radius must lie in `[R^min, R^max]`.
pub fn demand_star<S: MpcSolver + ?Sized>(
    family: &RadiusFamily,
    radius: f64,
    solver: &S,
) -> Result<f64> {
    let set = radius_candidates(&family.distances)?;
    if !(radius >= set.r_min && radius <= set.r_max) {
        return Err(Error::RadiusOutOfRange {
            radius,
            min: set.r_min,
            max: set.r_max,
        });
    }
    Ok(solve_at(family, radius, solver)?.map_or(0.0, |s| s.total_demand))
}

/// `alpha D*/sum d + (1 - alpha)(R^max - r)/(R^max - R^min)`. The radius term
/// is 1 when `R^max = R^min`, and the demand term is 0 when there is no demand.
pub fn objective(alpha: f64, demand_star: f64, total_demand: f64, radius: f64, r_min: f64, r_max: f64) -> f64 {
    let demand_term = if total_demand > 0.0 {
        demand_star / total_demand
    } else {
        0.0
    };
    let radius_term = if r_max > r_min {
        (r_max - radius) / (r_max - r_min)
    } else {
        1.0
    };
    alpha * demand_term + (1.0 - alpha) * radius_term
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub radius: f64,
    pub demand_star: f64,
    pub feasible: bool,
    /// `None` for radii outside `[R^min, R^max]`, which are not scored.
    pub objective: Option<f64>,
    #[serde(skip)]
    pub solution: Option<Solution>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusSweepResult {
    pub alpha: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Ascending in radius.
    pub records: Vec<SweepRecord>,
    /// Best-scoring feasible radius, ties to the smaller one; `None` when no
    /// radius is feasible.
    pub best_radius: Option<f64>,
}

impl RadiusSweepResult {
    pub fn best(&self) -> Option<&SweepRecord> {
        let r = self.best_radius?;
        self.records.iter().find(|rec| rec.radius == r)
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Replace each `D*(r)` by the running maximum over smaller radii. A
    /// selection feasible at some radius stays feasible at every larger one,
    /// so this only recovers what a heuristic missed.
    pub isotonic: bool,
}

/// Evaluates the trade-off objective at each radius of `radii` (any order,
/// duplicates collapsed).
pub fn sweep<S: MpcSolver + ?Sized>(
    family: &RadiusFamily,
    radii: &[f64],
    alpha: f64,
    solver: &S,
    options: SweepOptions,
) -> Result<RadiusSweepResult> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidInput(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if let Some(r) = radii.iter().find(|r| !r.is_finite()) {
        return Err(Error::InvalidInput(format!("radius {r} is not finite")));
    }
    let set = radius_candidates(&family.distances)?;
    let mut grid = radii.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let total = family.total_demand();

    let mut records = Vec::with_capacity(grid.len());
    let mut carried: Option<Solution> = None;
    for &r in &grid {
        let in_range = r >= set.r_min && r <= set.r_max;
        let mut solution = solve_at(family, r, solver)?;
        if options.isotonic {
            let carried_demand = carried.as_ref().map(|s| s.total_demand);
            let own = solution.as_ref().map(|s| s.total_demand);
            if carried_demand > own {
                // Same selection, rescored against this radius's cover sets.
                let prev = carried.as_ref().unwrap();
                solution = Some(crate::model::score_solution(&family.at(r), &prev.selected));
            }
            if solution.is_some() {
                carried = solution.clone();
            }
        }
        let demand_star = solution.as_ref().map_or(0.0, |s| s.total_demand);
        records.push(SweepRecord {
            radius: r,
            demand_star,
            feasible: solution.is_some(),
            objective: in_range.then(|| objective(alpha, demand_star, total, r, set.r_min, set.r_max)),
            solution,
        });
    }

    let mut best: Option<(f64, f64)> = None;
    for rec in records.iter().filter(|rec| rec.feasible) {
        if let Some(obj) = rec.objective {
            if best.is_none_or(|(b, _)| obj > b) {
                best = Some((obj, rec.radius));
            }
        }
    }
    Ok(RadiusSweepResult {
        alpha,
        r_min: set.r_min,
        r_max: set.r_max,
        records,
        best_radius: best.map(|(_, r)| r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_mpc;
    use crate::subsolvers::{greedy_knapsack, PackItem};
    use crate::SolverKind;

    fn family() -> RadiusFamily {
        RadiusFamily::new(
            vec![5.0, 3.0],
            vec![2.0, 1.0],
            3.0,
            DistanceTable::from_rows(&[vec![1.0, 3.0], vec![4.0, 2.0]]).unwrap(),
        )
    }

    #[test]
    fn candidates_from_min_max_scan() {
        let set = radius_candidates(&family().distances).unwrap();
        assert_eq!((set.r_min, set.r_max), (2.0, 4.0));
        assert_eq!(set.radii, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn candidates_single_entry_and_duplicates() {
        let one = DistanceTable::from_rows(&[vec![2.5]]).unwrap();
        let set = radius_candidates(&one).unwrap();
        assert_eq!((set.r_min, set.r_max, set.radii.clone()), (2.5, 2.5, vec![2.5]));
        let dup = DistanceTable::from_rows(&[vec![3.0, 3.0], vec![3.0, 5.0]]).unwrap();
        assert_eq!(radius_candidates(&dup).unwrap().radii, vec![3.0, 5.0]);
    }

    #[test]
    fn objective_worked_value() {
        // alpha 0.5 with 80% of demand at r = R^min = 2, R^max = 4.
        assert!((objective(0.5, 8.0, 10.0, 2.0, 2.0, 4.0) - 0.9).abs() < 1e-12);
        assert_eq!(objective(0.3, 1.0, 1.0, 3.0, 3.0, 3.0), 0.3 + 0.7);
        assert_eq!(objective(1.0, 5.0, 0.0, 3.0, 2.0, 4.0), 0.0);
    }

    #[test]
    fn demand_star_at_max_radius_is_pure_packing() {
        let mut f = family();
        f.budget = 100.0;
        let items: Vec<PackItem> = (0..2)
            .map(|i| PackItem { id: crate::SiteId(i), value: f.demand[i], weight: f.cost[i] })
            .collect();
        let kp: f64 = greedy_knapsack(&items, f.budget).iter().map(|s| f.demand[s.0]).sum();
        assert_eq!(demand_star(&f, 4.0, &SolverKind::Ipac).unwrap(), kp);
    }

    #[test]
    fn demand_star_domain_and_infeasible() {
        let f = family();
        assert!(matches!(
            demand_star(&f, 1.9, &SolverKind::Ipac),
            Err(Error::RadiusOutOfRange { .. })
        ));
        let tight = RadiusFamily { budget: 0.5, ..family() };
        assert_eq!(demand_star(&tight, 2.0, &SolverKind::Ipac).unwrap(), 0.0);
    }

    #[test]
    fn sweep_alpha_extremes() {
        let f = family();
        let set = radius_candidates(&f.distances).unwrap();
        // At r = 2 both sites are needed (cost 3); at r = 3 site 0 alone covers.
        let demand_only = sweep(&f, &set.radii, 1.0, &SolverKind::Oracle, SweepOptions::default()).unwrap();
        assert_eq!(demand_only.best_radius, Some(2.0));
        let radius_only = sweep(&f, &set.radii, 0.0, &SolverKind::Oracle, SweepOptions::default()).unwrap();
        assert_eq!(radius_only.best_radius, Some(2.0));
        let tight = RadiusFamily { budget: 2.0, ..family() };
        let r = sweep(&tight, &set.radii, 0.0, &SolverKind::Oracle, SweepOptions::default()).unwrap();
        assert!(!r.records[0].feasible);
        assert_eq!(r.records[0].demand_star, 0.0);
        assert_eq!(r.best_radius, Some(3.0));
    }

    #[test]
    fn sweep_marks_out_of_range_radii() {
        let f = family();
        let r = sweep(&f, &[5.0, 1.0, 3.0, 3.0], 0.5, &SolverKind::Oracle, SweepOptions::default()).unwrap();
        let radii: Vec<f64> = r.records.iter().map(|x| x.radius).collect();
        assert_eq!(radii, vec![1.0, 3.0, 5.0]);
        assert!(r.records[0].objective.is_none());
        assert!(r.records[2].objective.is_none());
        assert_eq!(r.best_radius, Some(3.0));
        assert!(sweep(&f, &[3.0], 1.5, &SolverKind::Oracle, SweepOptions::default()).is_err());
    }

    #[test]
    fn isotonic_pass_is_running_max() {
        let g = crate::oracle::gen_instance(&crate::oracle::GenParams {
            site_count: 10,
            interest_count: 6,
            seed: 7,
            budget_fraction: 0.4,
            ..Default::default()
        })
        .unwrap();
        let inst = &g.instance;
        let f = RadiusFamily::new(inst.demand.clone(), inst.cost.clone(), inst.budget, g.distances.clone());
        let set = radius_candidates(&f.distances).unwrap();
        let raw = sweep(&f, &set.radii, 0.5, &SolverKind::Ipac, SweepOptions::default()).unwrap();
        let iso = sweep(&f, &set.radii, 0.5, &SolverKind::Ipac, SweepOptions { isotonic: true }).unwrap();
        let mut run = 0.0_f64;
        for (a, b) in raw.records.iter().zip(&iso.records) {
            run = run.max(a.demand_star);
            assert_eq!(b.demand_star, run);
            if let Some(sol) = &b.solution {
                assert!(crate::is_feasible(&f.at(b.radius), &sol.selected));
            }
        }
        // The exact solver already satisfies the step-function property.
        let exact = |r| exact_mpc(&f.at(r)).map_or(0.0, |s| s.total_demand);
        for w in set.radii.windows(2) {
            assert!(exact(w[0]) <= exact(w[1]));
        }
    }
}
