//! Subsidy allocation between the government and private providers.
//!
//! The government funds a subsidy pool and bids every site at its own
//! construction cost (the reserve). Providers bid on the sites they want with
//! a requested subsidy and a price they pay from their own budget. At most one
//! participant builds each site; the pool pays the winner's subsidy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ipac::{Coverer, DemandCoverageRank, GreedySetCover, RankInput, Ranker};
use crate::model::{
    covered_mask, validate_instance, within_budget, InterestId, MpcInstance, SiteId,
};
use crate::subsolvers::{greedy_multidim_knapsack, CoverCandidate, MultiDimItem};

/// Participant index of the government.
pub const GOVERNMENT: usize = 0;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bid {
    pub site: SiteId,
    /// Subsidy requested from the pool.
    pub subsidy: f64,
    /// Amount the provider pays from its own budget.
    pub price: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provider {
    pub budget: f64,
    pub bids: Vec<Bid>,
}

/// `base.cost` holds the government reserve per site and `base.budget` the
/// subsidy pool. Provider `k` is participant `k + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsidyInstance {
    pub base: MpcInstance,
    pub providers: Vec<Provider>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsidyOutcome {
    /// Winning participant per site, `None` when unbuilt.
    pub winners: Vec<Option<usize>>,
    pub subsidy_paid: f64,
    /// Index 0 is the pool (equal to `subsidy_paid`); index `j` is what
    /// participant `j` pays from its own budget.
    pub participant_spend: Vec<f64>,
    pub total_demand: f64,
}

impl SubsidyOutcome {
    pub fn selected(&self) -> Vec<bool> {
        self.winners.iter().map(Option::is_some).collect()
    }
}

/// Option of building site `site` through `participant`.
#[derive(Copy, Clone, Debug, PartialEq)]
struct Offer {
    participant: usize,
    subsidy: f64,
    price: f64,
}

impl SubsidyInstance {
    pub fn participant_count(&self) -> usize {
        self.providers.len() + 1
    }

    pub fn validate(&self) -> Result<()> {
        let report = validate_instance(&self.base);
        if !report.is_ok() {
            return Err(Error::InvalidInstance(report));
        }
        let n = self.base.site_count;
        for (k, p) in self.providers.iter().enumerate() {
            let j = k + 1;
            if !(p.budget >= 0.0 && p.budget.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "participant {j}: budget must be finite and non-negative"
                )));
            }
            let mut seen = vec![false; n];
            for b in &p.bids {
                if b.site.0 >= n {
                    return Err(Error::InvalidInput(format!(
                        "participant {j}: bid on unknown site {}",
                        b.site
                    )));
                }
                if seen[b.site.0] {
                    return Err(Error::InvalidInput(format!(
                        "participant {j}: more than one bid on site {}",
                        b.site
                    )));
                }
                seen[b.site.0] = true;
                let ok = |v: f64| v >= 0.0 && v.is_finite();
                if !(ok(b.subsidy) && ok(b.price)) {
                    return Err(Error::InvalidInput(format!(
                        "participant {j}: bid on site {} must be finite and non-negative",
                        b.site
                    )));
                }
            }
        }
        Ok(())
    }

    /// Offers per site, government first then providers in order.
    fn offers(&self) -> Vec<Vec<Offer>> {
        let mut offers: Vec<Vec<Offer>> = (0..self.base.site_count)
            .map(|i| {
                vec![Offer {
                    participant: GOVERNMENT,
                    subsidy: self.base.cost[i],
                    price: 0.0,
                }]
            })
            .collect();
        for (k, p) in self.providers.iter().enumerate() {
            for b in &p.bids {
                offers[b.site.0].push(Offer {
                    participant: k + 1,
                    subsidy: b.subsidy,
                    price: b.price,
                });
            }
        }
        offers
    }

    fn budgets(&self) -> Vec<f64> {
        std::iter::once(self.base.budget)
            .chain(self.providers.iter().map(|p| p.budget))
            .collect()
    }

    fn offer_of(&self, site: usize, participant: usize) -> Option<Offer> {
        if participant == GOVERNMENT {
            return Some(Offer {
                participant,
                subsidy: self.base.cost[site],
                price: 0.0,
            });
        }
        let p = self.providers.get(participant - 1)?;
        p.bids.iter().find(|b| b.site.0 == site).map(|b| Offer {
            participant,
            subsidy: b.subsidy,
            price: b.price,
        })
    }

    /// Accounts an assignment; unknown (site, participant) pairs count as
    /// infinitely expensive.
    pub fn outcome(&self, winners: &[Option<usize>]) -> SubsidyOutcome {
        let mut spend = vec![0.0; self.participant_count()];
        let mut demand = 0.0;
        for (i, w) in winners.iter().enumerate() {
            let Some(j) = *w else { continue };
            match self.offer_of(i, j) {
                Some(o) => {
                    spend[GOVERNMENT] += o.subsidy;
                    if j != GOVERNMENT {
                        spend[j] += o.price;
                    }
                }
                None => spend[GOVERNMENT] = f64::INFINITY,
            }
            demand += self.base.demand[i];
        }
        SubsidyOutcome {
            winners: winners.to_vec(),
            subsidy_paid: spend[GOVERNMENT],
            participant_spend: spend,
            total_demand: demand,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum OutcomeViolation {
    /// Winner vector length differs from the site count.
    Shape,
    /// The participant never bid on the site.
    NoSuchBid { site: SiteId, participant: usize },
    PoolExceeded { spent: f64, budget: f64 },
    ProviderExceeded { participant: usize, spent: f64, budget: f64 },
    Uncovered { interest: InterestId },
}

/// Checks single winners with valid bids, the pool, each provider budget and
/// coverage of every location of interest.
pub fn validate_outcome(s: &SubsidyInstance, o: &SubsidyOutcome) -> Vec<OutcomeViolation> {
    let mut out = Vec::new();
    if o.winners.len() != s.base.site_count {
        out.push(OutcomeViolation::Shape);
        return out;
    }
    for (i, w) in o.winners.iter().enumerate() {
        if let Some(j) = *w {
            if s.offer_of(i, j).is_none() {
                out.push(OutcomeViolation::NoSuchBid { site: SiteId(i), participant: j });
            }
        }
    }
    let acc = s.outcome(&o.winners);
    if !within_budget(acc.subsidy_paid, s.base.budget) {
        out.push(OutcomeViolation::PoolExceeded {
            spent: acc.subsidy_paid,
            budget: s.base.budget,
        });
    }
    for (k, p) in s.providers.iter().enumerate() {
        let spent = acc.participant_spend[k + 1];
        if !within_budget(spent, p.budget) {
            out.push(OutcomeViolation::ProviderExceeded {
                participant: k + 1,
                spent,
                budget: p.budget,
            });
        }
    }
    let covered = covered_mask(&s.base, &o.selected());
    for (l, c) in covered.iter().enumerate() {
        if !c {
            out.push(OutcomeViolation::Uncovered { interest: InterestId(l) });
        }
    }
    out
}

/// Multi-dimensional packing subroutine; returns indices into `items`.
pub trait MultiPacker {
    fn pack(&self, items: &[MultiDimItem], budgets: &[f64]) -> Vec<usize>;
}

#[derive(Copy, Clone, Debug, Default)]
pub struct GreedyMultiKnapsack;

impl MultiPacker for GreedyMultiKnapsack {
    fn pack(&self, items: &[MultiDimItem], budgets: &[f64]) -> Vec<usize> {
        greedy_multidim_knapsack(items, budgets)
    }
}

struct Solver<'a> {
    s: &'a SubsidyInstance,
    offers: Vec<Vec<Offer>>,
    budgets: Vec<f64>,
}

impl Solver<'_> {
    /// Per-dimension spend of an assignment, summed in site order.
    fn spend(&self, assign: &[Option<usize>]) -> Vec<f64> {
        let mut spend = vec![0.0; self.budgets.len()];
        for (i, w) in assign.iter().enumerate() {
            let Some(j) = *w else { continue };
            let o = self.offer(i, j);
            spend[GOVERNMENT] += o.subsidy;
            if j != GOVERNMENT {
                spend[j] += o.price;
            }
        }
        spend
    }

    fn offer(&self, site: usize, participant: usize) -> Offer {
        *self.offers[site]
            .iter()
            .find(|o| o.participant == participant)
            .expect("assigned offers exist")
    }

    fn items(&self, assign: &[Option<usize>]) -> (Vec<MultiDimItem>, Vec<(usize, usize)>) {
        let dims = self.budgets.len();
        let mut items = Vec::new();
        let mut keys = Vec::new();
        for (i, offers) in self.offers.iter().enumerate() {
            if assign[i].is_some() {
                continue;
            }
            for o in offers {
                let mut weights = vec![0.0; dims];
                weights[GOVERNMENT] = o.subsidy;
                if o.participant != GOVERNMENT {
                    weights[o.participant] = o.price;
                }
                items.push(MultiDimItem {
                    site: SiteId(i),
                    participant: o.participant,
                    value: self.s.base.demand[i],
                    weights,
                });
                keys.push((i, o.participant));
            }
        }
        (items, keys)
    }

    fn pack<K: MultiPacker + ?Sized>(&self, kp: &K, assign: &mut [Option<usize>], budgets: &[f64]) {
        let (items, keys) = self.items(assign);
        for k in kp.pack(&items, budgets) {
            let (i, j) = keys[k];
            assign[i] = Some(j);
        }
    }

    /// Residual cover with each open site priced at its cheapest affordable
    /// offer, then assigned in site order against the remaining provider
    /// capacity. Returns the assignment and the subsidy it needs (infinite if
    /// the residual is uncoverable).
    fn cover<C: Coverer + ?Sized>(
        &self,
        sc: &C,
        assign: &[Option<usize>],
    ) -> Result<(Vec<(usize, usize)>, f64)> {
        let base = &self.s.base;
        let sel: Vec<bool> = assign.iter().map(Option::is_some).collect();
        let covered = covered_mask(base, &sel);
        let universe: Vec<InterestId> = (0..base.interest_count)
            .filter(|&l| !covered[l])
            .map(InterestId)
            .collect();
        let spend = self.spend(assign);
        let mut capacity: Vec<f64> = self.budgets.iter().zip(&spend).map(|(b, s)| b - s).collect();
        let affordable = |o: &Offer, capacity: &[f64]| {
            o.participant == GOVERNMENT || within_budget(o.price, capacity[o.participant])
        };
        let cheapest = |i: usize, capacity: &[f64]| -> Offer {
            let mut best = self.offers[i][0];
            for o in &self.offers[i][1..] {
                if affordable(o, capacity) && o.subsidy < best.subsidy {
                    best = *o;
                }
            }
            best
        };
        let cands: Vec<CoverCandidate<'_>> = (0..base.site_count)
            .filter(|&i| !sel[i])
            .map(|i| CoverCandidate {
                id: SiteId(i),
                cost: cheapest(i, &capacity).subsidy,
                covers: &base.cover_sets[i],
            })
            .collect();
        let mut ids = match sc.cover(&cands, &universe) {
            Ok(ids) => ids,
            Err(Error::UncoverableUniverse { .. }) => return Ok((Vec::new(), f64::INFINITY)),
            Err(e) => return Err(e),
        };
        ids.sort_unstable();
        let mut picks = Vec::with_capacity(ids.len());
        let mut cost = 0.0;
        for id in ids {
            let o = cheapest(id.0, &capacity);
            if o.participant != GOVERNMENT {
                capacity[o.participant] -= o.price;
            }
            cost += o.subsidy;
            picks.push((id.0, o.participant));
        }
        Ok((picks, cost))
    }
}

/// Pack-and-cover over (site, participant) offers with the default greedy
/// subroutines.
pub fn subsidy_solve(s: &SubsidyInstance) -> Result<SubsidyOutcome> {
    subsidy_solve_with(s, &GreedyMultiKnapsack, &GreedySetCover, &DemandCoverageRank)
}

/// Same loop as the single-budget heuristic: pack across all budgets, release
/// the least important packed offers until the residual cover fits in the free
/// pool, merge the cover and top up with whatever every budget has left.
/// Offers are ranked by importance per normalised multi-budget cost
/// `c_ij + p_ij B / B_j`.
pub fn subsidy_solve_with<K, C, R>(s: &SubsidyInstance, kp: &K, sc: &C, ranker: &R) -> Result<SubsidyOutcome>
where
    K: MultiPacker + ?Sized,
    C: Coverer + ?Sized,
    R: Ranker + ?Sized,
{
    s.validate()?;
    let solver = Solver {
        s,
        offers: s.offers(),
        budgets: s.budgets(),
    };
    let base = &s.base;
    let pool = base.budget;
    let n = base.site_count;

    let mut assign: Vec<Option<usize>> = vec![None; n];
    solver.pack(kp, &mut assign, &solver.budgets);
    let mut free = pool - solver.spend(&assign)[GOVERNMENT];
    let (mut picks, mut cover_cost) = solver.cover(sc, &assign)?;

    while !within_budget(cover_cost, free) && within_budget(cover_cost, pool) {
        let costs: Vec<f64> = (0..n)
            .map(|i| match assign[i] {
                Some(j) => {
                    let o = solver.offer(i, j);
                    if j == GOVERNMENT || o.price == 0.0 {
                        o.subsidy
                    } else {
                        o.subsidy + o.price * (pool / solver.budgets[j])
                    }
                }
                None => 0.0,
            })
            .collect();
        let entries: Vec<RankInput<'_>> = (0..n)
            .filter(|&i| assign[i].is_some())
            .map(|i| RankInput {
                id: SiteId(i),
                demand: base.demand[i],
                cost: costs[i],
                covers: &base.cover_sets[i],
            })
            .collect();
        let order = ranker.rank(&entries);
        let fallback = entries.iter().map(|e| e.id);
        for id in order.iter().map(|e| e.id).chain(fallback) {
            if within_budget(cover_cost, free) {
                break;
            }
            if let Some(j) = assign[id.0] {
                free += solver.offer(id.0, j).subsidy;
                assign[id.0] = None;
            }
        }
        free = pool - solver.spend(&assign)[GOVERNMENT];
        (picks, cover_cost) = solver.cover(sc, &assign)?;
    }

    if !within_budget(cover_cost, free) {
        if assign.iter().any(Option::is_some) {
            assign.fill(None);
            free = pool;
            (picks, cover_cost) = solver.cover(sc, &assign)?;
        }
        if !within_budget(cover_cost, free) {
            return Err(Error::Infeasible(crate::ipac::cover_shortfall(cover_cost, pool)));
        }
    }

    for (i, j) in picks {
        assign[i] = Some(j);
    }
    let spend = solver.spend(&assign);
    let remaining: Vec<f64> = solver
        .budgets
        .iter()
        .zip(&spend)
        .map(|(b, s)| (b - s).max(0.0))
        .collect();
    solver.pack(kp, &mut assign, &remaining);

    let outcome = s.outcome(&assign);
    debug_assert!(validate_outcome(s, &outcome).is_empty());
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ipac::ipac_solve;
    use crate::oracle::exact_subsidy;

    fn iset(v: &[usize]) -> Vec<InterestId> {
        v.iter().copied().map(InterestId).collect()
    }

    fn base() -> MpcInstance {
        MpcInstance {
            site_count: 3,
            interest_count: 2,
            demand: vec![6.0, 5.0, 4.0],
            cost: vec![5.0, 4.0, 2.0],
            budget: 6.0,
            cover_sets: vec![iset(&[0]), iset(&[1]), iset(&[0, 1])],
            radius: 1.0,
        }
    }

    #[test]
    fn government_only_matches_ipac() {
        let s = SubsidyInstance { base: base(), providers: vec![] };
        let o = subsidy_solve(&s).unwrap();
        let direct = ipac_solve(&s.base).unwrap().solution;
        assert_eq!(o.selected(), direct.selected);
        assert_eq!(o.subsidy_paid, direct.total_cost);
        assert_eq!(o.total_demand, direct.total_demand);
        assert!(o.winners.iter().flatten().all(|&j| j == GOVERNMENT));
    }

    #[test]
    fn cheap_provider_wins_everything() {
        let bids = (0..3)
            .map(|i| Bid { site: SiteId(i), subsidy: 1.0, price: 1.0 })
            .collect();
        let s = SubsidyInstance {
            base: base(),
            providers: vec![Provider { budget: 100.0, bids }],
        };
        let o = subsidy_solve(&s).unwrap();
        assert_eq!(o.winners, vec![Some(1); 3]);
        assert!(validate_outcome(&s, &o).is_empty());
        let exact = exact_subsidy(&s).unwrap();
        assert_eq!(exact.winners, vec![Some(1); 3]);
        assert_eq!(o.total_demand, exact.total_demand);
    }

    #[test]
    fn broke_provider_wins_nothing() {
        let bids = (0..3)
            .map(|i| Bid { site: SiteId(i), subsidy: 0.5, price: 1.0 })
            .collect();
        let s = SubsidyInstance {
            base: base(),
            providers: vec![Provider { budget: 0.0, bids }],
        };
        let o = subsidy_solve(&s).unwrap();
        assert!(o.winners.iter().flatten().all(|&j| j == GOVERNMENT));
        assert!(validate_outcome(&s, &o).is_empty());
        assert_eq!(o.participant_spend[1], 0.0);
    }

    #[test]
    fn free_bids_still_respect_exclusivity() {
        let bids = (0..3)
            .map(|i| Bid { site: SiteId(i), subsidy: 0.0, price: 0.0 })
            .collect();
        let s = SubsidyInstance {
            base: MpcInstance { budget: 0.0, ..base() },
            providers: vec![Provider { budget: 0.0, bids }],
        };
        let o = subsidy_solve(&s).unwrap();
        assert_eq!(o.winners, vec![Some(1); 3]);
        assert_eq!(o.subsidy_paid, 0.0);
    }

    #[test]
    fn infeasible_pool() {
        let s = SubsidyInstance {
            base: MpcInstance { budget: 1.0, ..base() },
            providers: vec![],
        };
        assert!(matches!(subsidy_solve(&s), Err(Error::Infeasible(_))));
        assert!(matches!(exact_subsidy(&s), Err(Error::Infeasible(_))));
    }

    #[test]
    fn validator_catches_each_family() {
        let bids = vec![Bid { site: SiteId(0), subsidy: 1.0, price: 3.0 }];
        let s = SubsidyInstance {
            base: MpcInstance { budget: 2.0, ..base() },
            providers: vec![Provider { budget: 2.0, bids }],
        };
        let o = s.outcome(&[Some(1), Some(1), None]);
        let v = validate_outcome(&s, &o);
        assert!(v.contains(&OutcomeViolation::NoSuchBid { site: SiteId(1), participant: 1 }));
        assert!(v.iter().any(|x| matches!(x, OutcomeViolation::PoolExceeded { .. })));
        let o = s.outcome(&[Some(1), None, None]);
        let v = validate_outcome(&s, &o);
        assert!(v.iter().any(|x| matches!(x, OutcomeViolation::ProviderExceeded { participant: 1, .. })));
        assert!(v.contains(&OutcomeViolation::Uncovered { interest: InterestId(1) }));
    }

    #[test]
    fn invalid_bids_rejected() {
        let dup = vec![
            Bid { site: SiteId(0), subsidy: 1.0, price: 1.0 },
            Bid { site: SiteId(0), subsidy: 2.0, price: 1.0 },
        ];
        let s = SubsidyInstance { base: base(), providers: vec![Provider { budget: 1.0, bids: dup }] };
        assert!(s.validate().is_err());
        let far = vec![Bid { site: SiteId(9), subsidy: 1.0, price: 1.0 }];
        let s = SubsidyInstance { base: base(), providers: vec![Provider { budget: 1.0, bids: far }] };
        assert!(s.validate().is_err());
    }
}
