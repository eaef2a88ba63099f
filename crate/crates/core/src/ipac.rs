//! Iterative pack-and-cover.
//!
//! The budget is split between a packing part (sites chosen for demand) and a
//! covering part (sites needed to reach every location of interest). Starting
//! from a pure knapsack solution, the least important packed sites are dropped
//! until the residual set cover fits in what is left; the cover is merged and
//! any remaining budget is packed again.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    covered_mask, indicator, score_solution, selected_sum, validate_instance, within_budget,
    InterestId, MpcInstance, SiteId, Solution,
};
use crate::subsolvers::{greedy_knapsack, greedy_set_cover, CoverCandidate, PackItem};

/// Packing subroutine: must return a maximal selection within `budget`.
pub trait Packer {
    fn pack(&self, items: &[PackItem], budget: f64) -> Vec<SiteId>;
}

/// Covering subroutine: must return a minimal cover of `universe`, or
/// [`Error::UncoverableUniverse`].
pub trait Coverer {
    fn cover(&self, cands: &[CoverCandidate<'_>], universe: &[InterestId]) -> Result<Vec<SiteId>>;
}

/// Orders the given sites from least to most important.
pub trait Ranker {
    fn rank(&self, entries: &[RankInput<'_>]) -> Vec<RankEntry>;
}

#[derive(Copy, Clone, Debug, Default)]
pub struct GreedyKnapsack;

#[derive(Copy, Clone, Debug, Default)]
pub struct GreedySetCover;

/// Ranks by normalised demand plus normalised coverage, per unit cost.
#[derive(Copy, Clone, Debug, Default)]
pub struct DemandCoverageRank;

impl Packer for GreedyKnapsack {
    fn pack(&self, items: &[PackItem], budget: f64) -> Vec<SiteId> {
        greedy_knapsack(items, budget)
    }
}

impl Coverer for GreedySetCover {
    fn cover(&self, cands: &[CoverCandidate<'_>], universe: &[InterestId]) -> Result<Vec<SiteId>> {
        greedy_set_cover(cands, universe)
    }
}

impl Ranker for DemandCoverageRank {
    fn rank(&self, entries: &[RankInput<'_>]) -> Vec<RankEntry> {
        rank(entries)
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct RankInput<'a> {
    pub id: SiteId,
    pub demand: f64,
    pub cost: f64,
    pub covers: &'a [InterestId],
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub id: SiteId,
    pub value: f64,
}

/// `d_i / sum_j d_j + |S_i| / |I|`; each term is 0 when its normaliser is 0.
pub(crate) fn importance(demand: f64, demand_total: f64, cover_len: usize, universe: usize) -> f64 {
    let d = if demand_total > 0.0 {
        demand / demand_total
    } else {
        0.0
    };
    let s = if universe > 0 {
        cover_len as f64 / universe as f64
    } else {
        0.0
    };
    d + s
}

/// Size of the union of the given cover sets.
pub(crate) fn union_size<'a>(sets: impl Iterator<Item = &'a [InterestId]> + Clone) -> usize {
    let span = sets
        .clone()
        .flat_map(|s| s.iter())
        .map(|l| l.0 + 1)
        .max()
        .unwrap_or(0);
    let mut seen = vec![false; span];
    let mut n = 0;
    for set in sets {
        for l in set {
            if !seen[l.0] {
                seen[l.0] = true;
                n += 1;
            }
        }
    }
    n
}

/// Sites in increasing order of `v_i = (d_i / sum d + |S_i| / |I|) / c_i`,
/// where the sums and `I` range over the supplied sites only. Ties go to the
/// lower id.
pub fn rank(entries: &[RankInput<'_>]) -> Vec<RankEntry> {
    let demand_total: f64 = entries.iter().map(|e| e.demand).sum();
    let universe = union_size(entries.iter().map(|e| e.covers));
    let mut ranked: Vec<RankEntry> = entries
        .iter()
        .map(|e| RankEntry {
            id: e.id,
            value: importance(e.demand, demand_total, e.covers.len(), universe) / e.cost,
        })
        .collect();
    ranked.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.id.cmp(&b.id)));
    ranked
}

/// Snapshot of the heuristic after each covering check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IpacState {
    pub iteration: usize,
    /// Sites currently chosen for packing.
    pub chosen: Vec<SiteId>,
    pub packed_budget: f64,
    /// Cost of the residual cover; infinite when the residual is uncoverable.
    pub cover_budget: f64,
    pub free_budget: f64,
    pub covered: Vec<InterestId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IpacRun {
    pub solution: Solution,
    pub trace: Vec<IpacState>,
    /// The loop ended over budget with packed sites left, and the solution
    /// came from covering from scratch instead.
    pub used_cover_fallback: bool,
}

fn pack_items(inst: &MpcInstance, excluded: &[bool]) -> Vec<PackItem> {
    (0..inst.site_count)
        .filter(|&i| !excluded[i])
        .map(|i| PackItem {
            id: SiteId(i),
            value: inst.demand[i],
            weight: inst.cost[i],
        })
        .collect()
}

/// Cover of the interests not reached by `chosen`, using only unchosen sites.
/// Returns the cover and its cost (infinite when no cover exists).
fn residual_cover<C: Coverer + ?Sized>(
    inst: &MpcInstance,
    chosen: &[bool],
    sc: &C,
) -> Result<(Vec<SiteId>, f64)> {
    let covered = covered_mask(inst, chosen);
    let universe: Vec<InterestId> = (0..inst.interest_count)
        .filter(|&l| !covered[l])
        .map(InterestId)
        .collect();
    let cands: Vec<CoverCandidate<'_>> = (0..inst.site_count)
        .filter(|&i| !chosen[i])
        .map(|i| CoverCandidate {
            id: SiteId(i),
            cost: inst.cost[i],
            covers: &inst.cover_sets[i],
        })
        .collect();
    match sc.cover(&cands, &universe) {
        Ok(ids) => {
            let cost = selected_sum(&inst.cost, &indicator(inst.site_count, &ids));
            Ok((ids, cost))
        }
        Err(Error::UncoverableUniverse { .. }) => Ok((Vec::new(), f64::INFINITY)),
        Err(e) => Err(e),
    }
}

fn snapshot(
    inst: &MpcInstance,
    iteration: usize,
    chosen: &[bool],
    cover_budget: f64,
) -> IpacState {
    let packed_budget = selected_sum(&inst.cost, chosen);
    let covered = covered_mask(inst, chosen)
        .iter()
        .enumerate()
        .filter(|(_, &c)| c)
        .map(|(l, _)| InterestId(l))
        .collect();
    IpacState {
        iteration,
        chosen: (0..inst.site_count)
            .filter(|&i| chosen[i])
            .map(SiteId)
            .collect(),
        packed_budget,
        cover_budget,
        free_budget: inst.budget - packed_budget,
        covered,
    }
}

/// Runs the heuristic with the default greedy subroutines.
pub fn ipac_solve(inst: &MpcInstance) -> Result<IpacRun> {
    ipac_solve_with(inst, &GreedyKnapsack, &GreedySetCover, &DemandCoverageRank)
}

/// Runs the heuristic with caller-supplied subroutines.
///
/// Returns [`Error::Infeasible`] when the residual cover cannot be afforded
/// even after every packed site has been released.
pub fn ipac_solve_with<K, S, R>(inst: &MpcInstance, kp: &K, sc: &S, ranker: &R) -> Result<IpacRun>
where
    K: Packer + ?Sized,
    S: Coverer + ?Sized,
    R: Ranker + ?Sized,
{
    let report = validate_instance(inst);
    if !report.is_ok() {
        return Err(Error::InvalidInstance(report));
    }
    let budget = inst.budget;
    let n = inst.site_count;

    let mut chosen = indicator(n, &kp.pack(&pack_items(inst, &vec![false; n]), budget));
    let mut free = budget - selected_sum(&inst.cost, &chosen);
    let (mut cover, mut cover_budget) = residual_cover(inst, &chosen, sc)?;
    let mut trace = vec![snapshot(inst, 0, &chosen, cover_budget)];

    let mut iteration = 0;
    while !within_budget(cover_budget, free) && within_budget(cover_budget, budget) {
        iteration += 1;
        let entries: Vec<RankInput<'_>> = (0..n)
            .filter(|&i| chosen[i])
            .map(|i| RankInput {
                id: SiteId(i),
                demand: inst.demand[i],
                cost: inst.cost[i],
                covers: &inst.cover_sets[i],
            })
            .collect();
        // free < cover_budget <= budget, so at least one site is packed and
        // releasing all of them always suffices.
        let order = ranker.rank(&entries);
        let fallback = entries.iter().map(|e| e.id);
        for id in order.iter().map(|e| e.id).chain(fallback) {
            if within_budget(cover_budget, free) {
                break;
            }
            if chosen[id.0] {
                chosen[id.0] = false;
                free += inst.cost[id.0];
            }
        }
        free = budget - selected_sum(&inst.cost, &chosen);
        (cover, cover_budget) = residual_cover(inst, &chosen, sc)?;
        trace.push(snapshot(inst, iteration, &chosen, cover_budget));
    }

    let mut used_cover_fallback = false;
    if !within_budget(cover_budget, free) {
        // Over budget with packed sites still held: the residual cover can be
        // dearer than covering from scratch, so try the pure covering split.
        if chosen.iter().any(|&x| x) {
            chosen.fill(false);
            free = budget;
            (cover, cover_budget) = residual_cover(inst, &chosen, sc)?;
            used_cover_fallback = true;
            trace.push(snapshot(inst, iteration + 1, &chosen, cover_budget));
        }
        if !within_budget(cover_budget, free) {
            return Err(Error::Infeasible(cover_shortfall(cover_budget, budget)));
        }
    }

    for id in &cover {
        chosen[id.0] = true;
    }
    let remaining = (budget - selected_sum(&inst.cost, &chosen)).max(0.0);
    for id in kp.pack(&pack_items(inst, &chosen), remaining) {
        chosen[id.0] = true;
    }

    let solution = score_solution(inst, &chosen);
    debug_assert!(crate::model::is_feasible(inst, &chosen));
    Ok(IpacRun {
        solution,
        trace,
        used_cover_fallback,
    })
}

pub(crate) fn cover_shortfall(need: f64, budget: f64) -> String {
    if need.is_finite() {
        format!("covering needs {need} but the budget is {budget}")
    } else {
        "some locations of interest are out of reach of every candidate site".into()
    }
}

/// Cover first, then pack whatever budget is left.
pub fn naive_solve(inst: &MpcInstance) -> Result<Solution> {
    naive_solve_with(inst, &GreedyKnapsack, &GreedySetCover)
}

pub fn naive_solve_with<K, S>(inst: &MpcInstance, kp: &K, sc: &S) -> Result<Solution>
where
    K: Packer + ?Sized,
    S: Coverer + ?Sized,
{
    let report = validate_instance(inst);
    if !report.is_ok() {
        return Err(Error::InvalidInstance(report));
    }
    let mut chosen = vec![false; inst.site_count];
    let (cover, cover_cost) = residual_cover(inst, &chosen, sc)?;
    if !within_budget(cover_cost, inst.budget) {
        return Err(Error::Infeasible(cover_shortfall(cover_cost, inst.budget)));
    }
    for id in &cover {
        chosen[id.0] = true;
    }
    let remaining = (inst.budget - cover_cost).max(0.0);
    for id in kp.pack(&pack_items(inst, &chosen), remaining) {
        chosen[id.0] = true;
    }
    Ok(score_solution(inst, &chosen))
}

/// Cost of the greedy cover of every location of interest; infinite when
/// some location cannot be covered at all.
pub fn min_feasible_budget(inst: &MpcInstance) -> f64 {
    let none = vec![false; inst.site_count];
    residual_cover(inst, &none, &GreedySetCover)
        .map(|(_, cost)| cost)
        .unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iset(v: &[usize]) -> Vec<InterestId> {
        v.iter().copied().map(InterestId).collect()
    }

    /// I = {a, b}; site 1 covers a, site 2 nothing, site 3 covers b, site 4 both.
    fn four_sites() -> MpcInstance {
        MpcInstance {
            site_count: 4,
            interest_count: 2,
            demand: vec![10.0, 9.0, 2.0, 1.0],
            cost: vec![4.0, 4.0, 3.0, 5.0],
            budget: 8.0,
            cover_sets: vec![iset(&[0]), iset(&[]), iset(&[1]), iset(&[0, 1])],
            radius: 1.0,
        }
    }

    #[test]
    fn rank_example_values() {
        // A and B inside a pool with total demand 100 and 10 covered elements.
        let a = iset(&[0, 1, 2, 3, 4]);
        let b = iset(&[5, 6]);
        let c = iset(&[7, 8, 9]);
        let entries = [
            RankInput { id: SiteId(0), demand: 20.0, cost: 2.0, covers: &a },
            RankInput { id: SiteId(1), demand: 30.0, cost: 4.0, covers: &b },
            RankInput { id: SiteId(2), demand: 50.0, cost: 1.0, covers: &c },
        ];
        let ranked = rank(&entries);
        let value = |id| ranked.iter().find(|e| e.id == SiteId(id)).unwrap().value;
        assert!((value(0) - 0.35).abs() < 1e-12);
        assert!((value(1) - 0.125).abs() < 1e-12);
        let order: Vec<usize> = ranked.iter().map(|e| e.id.0).collect();
        assert_eq!(order, vec![1, 0, 2]);
    }

    #[test]
    fn rank_ties_and_zero_value() {
        let s = iset(&[0]);
        let empty = iset(&[]);
        let entries = [
            RankInput { id: SiteId(3), demand: 5.0, cost: 1.0, covers: &s },
            RankInput { id: SiteId(1), demand: 5.0, cost: 1.0, covers: &s },
            RankInput { id: SiteId(2), demand: 0.0, cost: 1.0, covers: &empty },
        ];
        let ranked = rank(&entries);
        assert_eq!(ranked[0], RankEntry { id: SiteId(2), value: 0.0 });
        assert_eq!(ranked[1].id, SiteId(1));
        assert_eq!(ranked[2].id, SiteId(3));
    }

    #[test]
    fn rank_degenerate_normalisers() {
        let empty = iset(&[]);
        let entries = [RankInput { id: SiteId(0), demand: 0.0, cost: 2.0, covers: &empty }];
        assert_eq!(rank(&entries)[0].value, 0.0);
    }

    #[test]
    fn ipac_four_site_trace() {
        let inst = four_sites();
        let run = ipac_solve(&inst).unwrap();
        assert_eq!(run.solution.selected_ids(), vec![SiteId(0), SiteId(2)]);
        assert_eq!(run.solution.total_demand, 12.0);
        assert_eq!(run.solution.total_cost, 7.0);
        assert!(crate::is_feasible(&inst, &run.solution.selected));
        // Knapsack packs sites 1 and 2 (ids 0, 1); covering b costs 3 with nothing free.
        assert_eq!(run.trace[0].chosen, vec![SiteId(0), SiteId(1)]);
        assert_eq!(run.trace[0].cover_budget, 3.0);
        assert_eq!(run.trace[0].free_budget, 0.0);
        // Site 2 (id 1) is the least important and is released.
        assert_eq!(run.trace[1].chosen, vec![SiteId(0)]);
        assert_eq!(run.trace.len(), 2);
        assert!(!run.used_cover_fallback);
    }

    #[test]
    fn naive_four_site_trace() {
        let inst = four_sites();
        // Site 4 (id 3) covers both interests at 2.5 per element; then only id 2 fits.
        let sol = naive_solve(&inst).unwrap();
        assert_eq!(sol.selected_ids(), vec![SiteId(2), SiteId(3)]);
        assert_eq!(sol.total_demand, 3.0);
        assert!(sol.total_demand <= ipac_solve(&inst).unwrap().solution.total_demand);
        assert_eq!(min_feasible_budget(&inst), 5.0);
    }

    #[test]
    fn pure_packing_matches_knapsack() {
        let mut inst = four_sites();
        inst.interest_count = 0;
        inst.cover_sets = vec![Vec::new(); 4];
        let items = pack_items(&inst, &[false; 4]);
        let kp = greedy_knapsack(&items, inst.budget);
        let run = ipac_solve(&inst).unwrap();
        assert_eq!(run.solution.selected_ids(), kp);
        assert_eq!(run.trace.len(), 1);
        assert_eq!(naive_solve(&inst).unwrap().selected_ids(), kp);
        assert_eq!(min_feasible_budget(&inst), 0.0);
    }

    #[test]
    fn uncoverable_interest_is_infeasible() {
        let mut inst = four_sites().with_budget(100.0);
        inst.interest_count = 3;
        assert!(matches!(ipac_solve(&inst), Err(Error::Infeasible(_))));
        assert!(matches!(naive_solve(&inst), Err(Error::Infeasible(_))));
        assert_eq!(min_feasible_budget(&inst), f64::INFINITY);
    }

    #[test]
    fn budget_below_cover_cost_is_infeasible() {
        let inst = four_sites().with_budget(4.5);
        assert!(matches!(naive_solve(&inst), Err(Error::Infeasible(_))));
        assert!(matches!(ipac_solve(&inst), Err(Error::Infeasible(_))));
    }

    #[test]
    fn invalid_instance_is_rejected() {
        let mut inst = four_sites();
        inst.cost[1] = -1.0;
        assert!(matches!(ipac_solve(&inst), Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn custom_ranker_is_used() {
        // Reverse ranking releases the most important site first.
        struct Reverse;
        impl Ranker for Reverse {
            fn rank(&self, entries: &[RankInput<'_>]) -> Vec<RankEntry> {
                let mut r = rank(entries);
                r.reverse();
                r
            }
        }
        let inst = four_sites();
        let run = ipac_solve_with(&inst, &GreedyKnapsack, &GreedySetCover, &Reverse).unwrap();
        assert_eq!(run.trace[1].chosen, vec![SiteId(1)]);
        assert!(crate::is_feasible(&inst, &run.solution.selected));
    }
}
