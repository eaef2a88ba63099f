use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extensions::subsidy::{SubsidyInstance, SubsidyOutcome};
use crate::model::{
    indicator, score_solution, validate_instance, within_budget, InterestId, MpcInstance, SiteId,
    Solution,
};
use crate::subsolvers::{CoverCandidate, PackItem};

/// Largest candidate count the exhaustive searches accept.
pub const ENUMERATION_LIMIT: usize = 20;

fn guard(size: usize) -> Result<()> {
    if size > ENUMERATION_LIMIT {
        Err(Error::TooLarge {
            size,
            limit: ENUMERATION_LIMIT,
        })
    } else {
        Ok(())
    }
}

/// Best-so-far record for the depth-first search.
struct Incumbent {
    ids: Vec<usize>,
    primary: f64,
    secondary: f64,
    found: bool,
}

impl Incumbent {
    fn new() -> Self {
        Incumbent {
            ids: Vec::new(),
            primary: 0.0,
            secondary: 0.0,
            found: false,
        }
    }

    /// `primary` is maximised, then `secondary` minimised, then ids compared
    /// lexicographically.
    fn offer(&mut self, ids: &[usize], primary: f64, secondary: f64) {
        let better = !self.found
            || match primary.total_cmp(&self.primary) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => match secondary.total_cmp(&self.secondary) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => ids < self.ids.as_slice(),
                },
            };
        if better {
            self.ids = ids.to_vec();
            self.primary = primary;
            self.secondary = secondary;
            self.found = true;
        }
    }
}

/// Optimal selection by exhaustive search: maximum demand, then minimum cost,
/// then the lexicographically smallest id list.
pub fn exact_mpc(inst: &MpcInstance) -> Result<Solution> {
    guard(inst.site_count)?;
    let report = validate_instance(inst);
    if !report.is_ok() {
        return Err(Error::InvalidInstance(report));
    }

    struct Search<'a> {
        inst: &'a MpcInstance,
        counts: Vec<u32>,
        uncovered: usize,
        suffix_demand: Vec<f64>,
        stack: Vec<usize>,
        best: Incumbent,
    }

    impl Search<'_> {
        fn visit(&mut self, i: usize, demand: f64, cost: f64) {
            if i == self.inst.site_count {
                if self.uncovered == 0 {
                    self.best.offer(&self.stack, demand, cost);
                }
                return;
            }
            if self.best.found && demand + self.suffix_demand[i] < self.best.primary {
                return;
            }
            let c = self.inst.cost[i];
            if within_budget(cost + c, self.inst.budget) {
                for l in &self.inst.cover_sets[i] {
                    if self.counts[l.0] == 0 {
                        self.uncovered -= 1;
                    }
                    self.counts[l.0] += 1;
                }
                self.stack.push(i);
                self.visit(i + 1, demand + self.inst.demand[i], cost + c);
                self.stack.pop();
                for l in &self.inst.cover_sets[i] {
                    self.counts[l.0] -= 1;
                    if self.counts[l.0] == 0 {
                        self.uncovered += 1;
                    }
                }
            }
            self.visit(i + 1, demand, cost);
        }
    }

    let mut suffix_demand = vec![0.0; inst.site_count + 1];
    for i in (0..inst.site_count).rev() {
        suffix_demand[i] = suffix_demand[i + 1] + inst.demand[i];
    }
    let mut search = Search {
        inst,
        counts: vec![0; inst.interest_count],
        uncovered: inst.interest_count,
        suffix_demand,
        stack: Vec::new(),
        best: Incumbent::new(),
    };
    search.visit(0, 0.0, 0.0);
    if !search.best.found {
        return Err(Error::Infeasible(
            "no selection within the budget covers every location of interest".into(),
        ));
    }
    let ids: Vec<SiteId> = search.best.ids.iter().copied().map(SiteId).collect();
    Ok(score_solution(inst, &indicator(inst.site_count, &ids)))
}

/// Minimum-cost selection meeting both full coverage and a demand floor,
/// ignoring the instance budget.
pub fn exact_dsc(inst: &MpcInstance, demand_target: f64) -> Result<Solution> {
    guard(inst.site_count)?;
    let n = inst.site_count;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 0u32..(1u32 << n) {
        let sel: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let sol = score_solution(inst, &sel);
        if sol.covered.len() < inst.interest_count || sol.total_demand < demand_target {
            continue;
        }
        let ids: Vec<usize> = sol.selected_ids().iter().map(|s| s.0).collect();
        let replace = match &best {
            None => true,
            Some((cost, bids)) => match sol.total_cost.total_cmp(cost) {
                Ordering::Less => true,
                Ordering::Equal => ids < *bids,
                Ordering::Greater => false,
            },
        };
        if replace {
            best = Some((sol.total_cost, ids));
        }
    }
    match best {
        Some((_, ids)) => {
            let ids: Vec<SiteId> = ids.into_iter().map(SiteId).collect();
            Ok(score_solution(inst, &indicator(n, &ids)))
        }
        None => Err(Error::Infeasible(
            "no selection covers every location and meets the demand target".into(),
        )),
    }
}

/// Minimum-cost cover by exhaustive search; ties go to the lexicographically
/// smallest id list. Returns ids ascending and the cost.
pub fn exact_cover(
    cands: &[CoverCandidate<'_>],
    universe: &[InterestId],
) -> Result<(Vec<SiteId>, f64)> {
    guard(cands.len())?;
    if universe.is_empty() {
        return Ok((Vec::new(), 0.0));
    }
    let span = cands
        .iter()
        .flat_map(|c| c.covers.iter())
        .chain(universe)
        .map(|l| l.0 + 1)
        .max()
        .unwrap_or(0);
    let mut wanted = vec![false; span];
    for l in universe {
        wanted[l.0] = true;
    }
    let missing: Vec<InterestId> = universe
        .iter()
        .copied()
        .filter(|l| !cands.iter().any(|c| c.covers.contains(l)))
        .collect();
    if !missing.is_empty() {
        return Err(Error::UncoverableUniverse { missing });
    }

    // Order candidates by id so that the lexicographic tie-break is on ids.
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by_key(|&k| cands[k].id);
    let mut best: Option<(f64, Vec<SiteId>)> = None;
    let mut counts = vec![0u32; span];
    let target = universe.len();
    for mask in 0u32..(1u32 << cands.len()) {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut covered = 0;
        let mut cost = 0.0;
        let mut ids = Vec::new();
        for (bit, &k) in order.iter().enumerate() {
            if mask >> bit & 1 == 0 {
                continue;
            }
            cost += cands[k].cost;
            ids.push(cands[k].id);
            for l in cands[k].covers {
                if wanted[l.0] && counts[l.0] == 0 {
                    covered += 1;
                }
                counts[l.0] += 1;
            }
        }
        if covered < target {
            continue;
        }
        let replace = match &best {
            None => true,
            Some((c, b)) => match cost.total_cmp(c) {
                Ordering::Less => true,
                Ordering::Equal => ids < *b,
                Ordering::Greater => false,
            },
        };
        if replace {
            best = Some((cost, ids));
        }
    }
    let (cost, ids) = best.expect("a coverable universe has a cover");
    Ok((ids, cost))
}

/// Objective of [`exact_pack`].
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PackMode {
    /// Maximise total value with total weight within the budget.
    MaxValue { budget: f64 },
    /// Minimise total weight with total value at least the target.
    MinCost { target: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackOptimum {
    pub ids: Vec<SiteId>,
    pub value: f64,
    pub weight: f64,
}

/// Exhaustive knapsack or min-knapsack. Ties: max-value prefers lower weight,
/// min-cost prefers higher value, then the lexicographically smallest ids.
pub fn exact_pack(items: &[PackItem], mode: PackMode) -> Result<PackOptimum> {
    guard(items.len())?;
    if let PackMode::MinCost { target } = mode {
        let available: f64 = items.iter().map(|it| it.value).sum();
        if target > available {
            return Err(Error::UnreachableDemand { target, available });
        }
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by_key(|&k| items[k].id);
    let mut best: Option<PackOptimum> = None;
    for mask in 0u32..(1u32 << items.len()) {
        let mut value = 0.0;
        let mut weight = 0.0;
        let mut ids = Vec::new();
        for (bit, &k) in order.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                value += items[k].value;
                weight += items[k].weight;
                ids.push(items[k].id);
            }
        }
        let ok = match mode {
            PackMode::MaxValue { budget } => within_budget(weight, budget),
            PackMode::MinCost { target } => value >= target,
        };
        if !ok {
            continue;
        }
        let replace = match &best {
            None => true,
            Some(b) => {
                let (primary, secondary) = match mode {
                    PackMode::MaxValue { .. } => {
                        (value.total_cmp(&b.value), b.weight.total_cmp(&weight))
                    }
                    PackMode::MinCost { .. } => {
                        (b.weight.total_cmp(&weight), value.total_cmp(&b.value))
                    }
                };
                primary
                    .then(secondary)
                    .then_with(|| b.ids.cmp(&ids))
                    .is_gt()
            }
        };
        if replace {
            best = Some(PackOptimum { ids, value, weight });
        }
    }
    // The empty selection is always admissible once the target is reachable.
    Ok(best.expect("some selection is admissible"))
}

/// Largest product of per-site option counts the subsidy search accepts.
pub const SUBSIDY_STATE_LIMIT: usize = 1 << 22;

/// Optimal subsidy allocation by enumerating every site's options (unbuilt,
/// government, or any bidding provider). Maximises demand, then minimises the
/// total subsidy, then prefers the lexicographically smallest assignment.
pub fn exact_subsidy(s: &SubsidyInstance) -> Result<SubsidyOutcome> {
    s.validate()?;
    let n = s.base.site_count;
    // options[i] = (participant, subsidy, price)
    let mut options: Vec<Vec<(usize, f64, f64)>> = (0..n)
        .map(|i| vec![(0, s.base.cost[i], 0.0)])
        .collect();
    for (j, p) in s.providers.iter().enumerate() {
        for bid in &p.bids {
            options[bid.site.0].push((j + 1, bid.subsidy, bid.price));
        }
    }
    for opts in &mut options {
        opts.sort_by_key(|o| o.0);
    }
    let states = options
        .iter()
        .try_fold(1usize, |acc, o| acc.checked_mul(o.len() + 1))
        .unwrap_or(usize::MAX);
    if states > SUBSIDY_STATE_LIMIT {
        return Err(Error::TooLarge {
            size: states,
            limit: SUBSIDY_STATE_LIMIT,
        });
    }

    struct Search<'a> {
        s: &'a SubsidyInstance,
        options: &'a [Vec<(usize, f64, f64)>],
        counts: Vec<u32>,
        uncovered: usize,
        spend: Vec<f64>,
        assign: Vec<Option<usize>>,
        best: Option<(f64, f64, Vec<Option<usize>>)>,
    }

    // Assignment order: a built site (Some) sorts before an unbuilt one, and
    // lower participants first.
    fn key(a: &[Option<usize>]) -> Vec<usize> {
        a.iter().map(|w| w.map_or(usize::MAX, |j| j)).collect()
    }

    impl Search<'_> {
        fn visit(&mut self, i: usize, demand: f64) {
            let n = self.s.base.site_count;
            if i == n {
                if self.uncovered != 0 {
                    return;
                }
                let subsidy = self.spend[0];
                let replace = match &self.best {
                    None => true,
                    Some((d, c, a)) => demand
                        .total_cmp(d)
                        .then(c.total_cmp(&subsidy))
                        .then_with(|| key(a).cmp(&key(&self.assign)))
                        .is_gt(),
                };
                if replace {
                    self.best = Some((demand, subsidy, self.assign.clone()));
                }
                return;
            }
            for k in 0..self.options[i].len() {
                let (j, sub, price) = self.options[i][k];
                let gov_ok = within_budget(self.spend[0] + sub, self.s.base.budget);
                let prov_ok =
                    j == 0 || within_budget(self.spend[j] + price, self.s.providers[j - 1].budget);
                if !(gov_ok && prov_ok) {
                    continue;
                }
                self.spend[0] += sub;
                if j > 0 {
                    self.spend[j] += price;
                }
                for l in &self.s.base.cover_sets[i] {
                    if self.counts[l.0] == 0 {
                        self.uncovered -= 1;
                    }
                    self.counts[l.0] += 1;
                }
                self.assign[i] = Some(j);
                self.visit(i + 1, demand + self.s.base.demand[i]);
                self.assign[i] = None;
                for l in &self.s.base.cover_sets[i] {
                    self.counts[l.0] -= 1;
                    if self.counts[l.0] == 0 {
                        self.uncovered += 1;
                    }
                }
                self.spend[0] -= sub;
                if j > 0 {
                    self.spend[j] -= price;
                }
            }
            self.visit(i + 1, demand);
        }
    }

    let mut search = Search {
        s,
        options: &options,
        counts: vec![0; s.base.interest_count],
        uncovered: s.base.interest_count,
        spend: vec![0.0; s.providers.len() + 1],
        assign: vec![None; n],
        best: None,
    };
    search.visit(0, 0.0);
    match search.best {
        Some((_, _, winners)) => Ok(s.outcome(&winners)),
        None => Err(Error::Infeasible(
            "no allocation within the budgets covers every location of interest".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iset(v: &[usize]) -> Vec<InterestId> {
        v.iter().copied().map(InterestId).collect()
    }

    fn item(id: usize, value: f64, weight: f64) -> PackItem {
        PackItem {
            id: SiteId(id),
            value,
            weight,
        }
    }

    #[test]
    fn mpc_three_site_fixture() {
        let inst = MpcInstance {
            site_count: 3,
            interest_count: 2,
            demand: vec![6.0, 5.0, 4.0],
            cost: vec![5.0, 4.0, 2.0],
            budget: 6.0,
            cover_sets: vec![iset(&[0]), iset(&[1]), iset(&[0, 1])],
            radius: 1.0,
        };
        let sol = exact_mpc(&inst).unwrap();
        assert_eq!(sol.total_demand, 9.0);
        assert_eq!(sol.selected_ids(), vec![SiteId(1), SiteId(2)]);
    }

    #[test]
    fn mpc_ample_budget_takes_everything() {
        let inst = MpcInstance {
            site_count: 4,
            interest_count: 1,
            demand: vec![1.0, 2.0, 0.0, 3.0],
            cost: vec![1.0; 4],
            budget: 10.0,
            cover_sets: vec![iset(&[0]); 4],
            radius: 1.0,
        };
        // A zero-demand site adds cost without demand, so the cheaper tie wins.
        let sol = exact_mpc(&inst).unwrap();
        assert_eq!(sol.selected_ids(), vec![SiteId(0), SiteId(1), SiteId(3)]);
    }

    #[test]
    fn mpc_uncoverable_and_too_large() {
        let inst = MpcInstance {
            site_count: 1,
            interest_count: 2,
            demand: vec![1.0],
            cost: vec![1.0],
            budget: 5.0,
            cover_sets: vec![iset(&[0])],
            radius: 1.0,
        };
        assert!(matches!(exact_mpc(&inst), Err(Error::Infeasible(_))));
        let big = MpcInstance {
            site_count: 21,
            interest_count: 0,
            demand: vec![1.0; 21],
            cost: vec![1.0; 21],
            budget: 5.0,
            cover_sets: vec![Vec::new(); 21],
            radius: 1.0,
        };
        assert!(matches!(exact_mpc(&big), Err(Error::TooLarge { size: 21, limit: 20 })));
    }

    #[test]
    fn cover_fixtures() {
        let (a, b, c) = (iset(&[0, 1]), iset(&[2, 3]), iset(&[0, 1, 2, 3]));
        let cands = [
            CoverCandidate { id: SiteId(0), cost: 2.0, covers: &a },
            CoverCandidate { id: SiteId(1), cost: 2.0, covers: &b },
            CoverCandidate { id: SiteId(2), cost: 5.0, covers: &c },
        ];
        let universe = iset(&[0, 1, 2, 3]);
        assert_eq!(exact_cover(&cands, &universe).unwrap(), (vec![SiteId(0), SiteId(1)], 4.0));
        assert_eq!(exact_cover(&cands, &[]).unwrap(), (vec![], 0.0));
        assert_eq!(exact_cover(&cands[2..], &universe).unwrap(), (vec![SiteId(2)], 5.0));
        assert!(matches!(
            exact_cover(&cands, &iset(&[4])),
            Err(Error::UncoverableUniverse { .. })
        ));
    }

    #[test]
    fn pack_fixtures() {
        let items = [item(0, 6.0, 5.0), item(1, 5.0, 4.0), item(2, 4.0, 2.0)];
        let kp = exact_pack(&items, PackMode::MaxValue { budget: 6.0 }).unwrap();
        assert_eq!((kp.value, kp.weight), (9.0, 6.0));
        assert_eq!(kp.ids, vec![SiteId(1), SiteId(2)]);
        let mk_items = [item(0, 6.0, 3.0), item(1, 6.0, 3.0), item(2, 2.0, 2.0)];
        let mk = exact_pack(&mk_items, PackMode::MinCost { target: 10.0 }).unwrap();
        assert_eq!((mk.weight, mk.ids.clone()), (6.0, vec![SiteId(0), SiteId(1)]));
        assert!(exact_pack(&items, PackMode::MaxValue { budget: 0.0 }).unwrap().ids.is_empty());
        assert!(exact_pack(&items, PackMode::MinCost { target: 0.0 }).unwrap().ids.is_empty());
        assert!(matches!(
            exact_pack(&items, PackMode::MinCost { target: 16.0 }),
            Err(Error::UnreachableDemand { .. })
        ));
    }

    #[test]
    fn dsc_optimum() {
        let inst = MpcInstance {
            site_count: 3,
            interest_count: 2,
            demand: vec![6.0, 5.0, 4.0],
            cost: vec![5.0, 4.0, 2.0],
            budget: 0.0,
            cover_sets: vec![iset(&[0]), iset(&[1]), iset(&[0, 1])],
            radius: 1.0,
        };
        assert_eq!(exact_dsc(&inst, 0.0).unwrap().total_cost, 2.0);
        assert_eq!(exact_dsc(&inst, 9.0).unwrap().total_cost, 6.0);
        assert!(exact_dsc(&inst, 16.0).is_err());
    }
}
