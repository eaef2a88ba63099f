//! Greedy routines for the subproblems the pack-and-cover heuristic is built
//! from: knapsack, set cover, min-knapsack and a multi-dimensional knapsack
//! with per-site exclusivity. All ties break towards the lowest id.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{within_budget, InterestId, SiteId};

/// Knapsack item: value is site demand, weight is site cost.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackItem {
    pub id: SiteId,
    pub value: f64,
    pub weight: f64,
}

/// Set-cover candidate; `covers` must be sorted and free of duplicates.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CoverCandidate<'a> {
    pub id: SiteId,
    pub cost: f64,
    pub covers: &'a [InterestId],
}

/// Item of the multi-dimensional knapsack: one participant building at one site.
/// At most one item per site may be selected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiDimItem {
    pub site: SiteId,
    pub participant: usize,
    pub value: f64,
    /// Consumption of each budget dimension.
    pub weights: Vec<f64>,
}

fn by_density_desc(a: f64, b: f64) -> Ordering {
    b.total_cmp(&a)
}

/// Greedy multi-dimensional knapsack.
///
/// Items are ordered by `value / sum_k w_k (B_ref / B_k)` where `B_ref` is the
/// largest budget; scaling by `B_ref` does not change the order and makes the
/// single-dimension case reduce exactly to `value / weight`. The density fill
/// is compared with the best single item topped up by the same fill; the
/// larger total value wins. Returns indices into `items`, ascending.
pub fn greedy_multidim_knapsack(items: &[MultiDimItem], budgets: &[f64]) -> Vec<usize> {
    let dims = budgets.len();
    let reference = budgets.iter().copied().fold(0.0_f64, f64::max);
    let eligible: Vec<usize> = (0..items.len())
        .filter(|&k| {
            let it = &items[k];
            it.weights.len() == dims
                && it
                    .weights
                    .iter()
                    .zip(budgets)
                    .all(|(&w, &b)| w >= 0.0 && within_budget(w, b))
        })
        .collect();
    if eligible.is_empty() {
        return Vec::new();
    }

    let density = |it: &MultiDimItem| {
        let norm: f64 = it
            .weights
            .iter()
            .zip(budgets)
            .filter(|(_, &b)| b > 0.0)
            .map(|(&w, &b)| if b == reference { w } else { w * (reference / b) })
            .sum();
        if norm > 0.0 {
            it.value / norm
        } else {
            f64::INFINITY
        }
    };
    let mut order = eligible.clone();
    let densities: Vec<f64> = items.iter().map(density).collect();
    order.sort_by(|&a, &b| {
        by_density_desc(densities[a], densities[b])
            .then(items[a].site.cmp(&items[b].site))
            .then(items[a].participant.cmp(&items[b].participant))
    });

    let site_span = items.iter().map(|it| it.site.0 + 1).max().unwrap_or(0);
    let fill = |seed: Option<usize>| -> (f64, Vec<usize>) {
        let mut used = vec![0.0; dims];
        let mut taken_sites = vec![false; site_span];
        let mut chosen = Vec::new();
        let mut value = 0.0;
        let mut try_add = |k: usize, used: &mut Vec<f64>| {
            let it = &items[k];
            if taken_sites[it.site.0] {
                return;
            }
            if it
                .weights
                .iter()
                .zip(used.iter())
                .zip(budgets)
                .all(|((&w, &u), &b)| within_budget(u + w, b))
            {
                for (u, w) in used.iter_mut().zip(&it.weights) {
                    *u += w;
                }
                taken_sites[it.site.0] = true;
                chosen.push(k);
                value += it.value;
            }
        };
        if let Some(s) = seed {
            try_add(s, &mut used);
        }
        for &k in &order {
            if Some(k) != seed {
                try_add(k, &mut used);
            }
        }
        (value, chosen)
    };

    let (fill_value, mut best) = fill(None);
    let top = eligible
        .iter()
        .copied()
        .max_by(|&a, &b| {
            items[a]
                .value
                .total_cmp(&items[b].value)
                .then(items[b].site.cmp(&items[a].site))
                .then(items[b].participant.cmp(&items[a].participant))
        })
        .expect("eligible is non-empty");
    if !best.contains(&top) {
        let (rescue_value, rescue) = fill(Some(top));
        if rescue_value > fill_value {
            best = rescue;
        }
    }
    best.sort_unstable();
    best
}

/// Greedy 0/1 knapsack: density fill or best single item (whichever is worth
/// more), topped up until no further item fits. Within half of the optimum.
pub fn greedy_knapsack(items: &[PackItem], budget: f64) -> Vec<SiteId> {
    let lifted: Vec<MultiDimItem> = items
        .iter()
        .map(|it| MultiDimItem {
            site: it.id,
            participant: 0,
            value: it.value,
            weights: vec![it.weight],
        })
        .collect();
    let mut ids: Vec<SiteId> = greedy_multidim_knapsack(&lifted, &[budget])
        .into_iter()
        .map(|k| items[k].id)
        .collect();
    ids.sort_unstable();
    ids
}

#[derive(Copy, Clone, PartialEq)]
struct CoverKey {
    ratio: f64,
    id: SiteId,
    slot: usize,
}

impl Eq for CoverKey {}

impl Ord for CoverKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ratio
            .total_cmp(&other.ratio)
            .then(self.id.cmp(&other.id))
            .then(self.slot.cmp(&other.slot))
    }
}

impl PartialOrd for CoverKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Cost-effectiveness greedy set cover followed by a pass that drops
/// redundant sets (most expensive first), so the result is minimal.
///
/// Uses lazy re-evaluation: a candidate's cost per newly covered element only
/// grows as coverage grows, so a popped key that is still no worse than the
/// next one is the true minimum. Returns ids ascending.
pub fn greedy_set_cover(
    cands: &[CoverCandidate<'_>],
    universe: &[InterestId],
) -> Result<Vec<SiteId>> {
    if universe.is_empty() {
        return Ok(Vec::new());
    }
    let span = universe.iter().map(|l| l.0 + 1).max().unwrap_or(0);
    let span = cands
        .iter()
        .flat_map(|c| c.covers.iter())
        .map(|l| l.0 + 1)
        .max()
        .unwrap_or(0)
        .max(span);
    let mut wanted = vec![false; span];
    for l in universe {
        wanted[l.0] = true;
    }

    let mut reachable = vec![false; span];
    for c in cands {
        for l in c.covers {
            reachable[l.0] = true;
        }
    }
    let mut missing: Vec<InterestId> = universe
        .iter()
        .copied()
        .filter(|l| !reachable[l.0])
        .collect();
    if !missing.is_empty() {
        missing.sort_unstable();
        missing.dedup();
        return Err(Error::UncoverableUniverse { missing });
    }

    let mut covered = vec![false; span];
    let mut remaining = wanted.iter().filter(|&&w| w).count();
    let gain = |c: &CoverCandidate<'_>, covered: &[bool]| {
        c.covers
            .iter()
            .filter(|l| wanted[l.0] && !covered[l.0])
            .count()
    };

    let mut heap = BinaryHeap::new();
    for (slot, c) in cands.iter().enumerate() {
        let g = gain(c, &covered);
        if g > 0 {
            heap.push(Reverse(CoverKey {
                ratio: c.cost / g as f64,
                id: c.id,
                slot,
            }));
        }
    }

    let mut chosen: Vec<usize> = Vec::new();
    while remaining > 0 {
        let Some(Reverse(key)) = heap.pop() else {
            unreachable!("every wanted element is reachable");
        };
        let c = &cands[key.slot];
        let g = gain(c, &covered);
        if g == 0 {
            continue;
        }
        let fresh = CoverKey {
            ratio: c.cost / g as f64,
            ..key
        };
        let is_min = heap.peek().is_none_or(|Reverse(top)| fresh <= *top);
        if !is_min {
            heap.push(Reverse(fresh));
            continue;
        }
        for l in c.covers {
            if wanted[l.0] && !covered[l.0] {
                covered[l.0] = true;
                remaining -= 1;
            }
        }
        chosen.push(key.slot);
    }

    // Redundancy pruning.
    let mut multiplicity = vec![0u32; span];
    for &slot in &chosen {
        for l in cands[slot].covers {
            if wanted[l.0] {
                multiplicity[l.0] += 1;
            }
        }
    }
    let mut by_cost = chosen.clone();
    by_cost.sort_by(|&a, &b| {
        cands[b]
            .cost
            .total_cmp(&cands[a].cost)
            .then(cands[b].id.cmp(&cands[a].id))
    });
    let mut keep = vec![true; cands.len()];
    for slot in by_cost {
        let redundant = cands[slot]
            .covers
            .iter()
            .filter(|l| wanted[l.0])
            .all(|l| multiplicity[l.0] >= 2);
        if redundant {
            keep[slot] = false;
            for l in cands[slot].covers {
                if wanted[l.0] {
                    multiplicity[l.0] -= 1;
                }
            }
        }
    }

    let mut ids: Vec<SiteId> = chosen
        .into_iter()
        .filter(|&s| keep[s])
        .map(|s| cands[s].id)
        .collect();
    ids.sort_unstable();
    Ok(ids)
}

/// Min-knapsack: cheapest selection whose total value reaches `target`.
///
/// For every cost threshold `tau` (each distinct item weight), items with
/// weight at most `tau` are taken in density order until the target is met;
/// each candidate is pruned of redundant items (most expensive first) and the
/// cheapest survives. With `tau` equal to the largest weight in an optimal
/// solution the candidate costs at most twice the optimum.
pub fn greedy_min_knapsack(items: &[PackItem], target: f64) -> Result<Vec<SiteId>> {
    if target <= 0.0 {
        return Ok(Vec::new());
    }
    let available: f64 = items.iter().map(|it| it.value).sum();
    if available < target {
        return Err(Error::UnreachableDemand { target, available });
    }

    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        by_density_desc(
            items[a].value / items[a].weight,
            items[b].value / items[b].weight,
        )
        .then(items[a].id.cmp(&items[b].id))
    });
    let mut thresholds: Vec<f64> = items.iter().map(|it| it.weight).collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let prune = |picked: &mut Vec<usize>| {
        let mut value: f64 = picked.iter().map(|&k| items[k].value).sum();
        let mut by_weight = picked.clone();
        by_weight.sort_by(|&a, &b| {
            items[b]
                .weight
                .total_cmp(&items[a].weight)
                .then(items[b].id.cmp(&items[a].id))
        });
        for k in by_weight {
            if value - items[k].value >= target {
                value -= items[k].value;
                picked.retain(|&p| p != k);
            }
        }
    };

    let mut best: Option<(f64, Vec<SiteId>)> = None;
    for &tau in &thresholds {
        let mut acc = 0.0;
        let mut picked = Vec::new();
        for &k in &order {
            if items[k].weight <= tau {
                picked.push(k);
                acc += items[k].value;
                if acc >= target {
                    break;
                }
            }
        }
        if acc < target {
            continue;
        }
        prune(&mut picked);
        let cost: f64 = picked.iter().map(|&k| items[k].weight).sum();
        let mut ids: Vec<SiteId> = picked.iter().map(|&k| items[k].id).collect();
        ids.sort_unstable();
        let better = match &best {
            None => true,
            Some((c, b)) => cost < *c || (cost == *c && ids < *b),
        };
        if better {
            best = Some((cost, ids));
        }
    }
    Ok(best.map(|(_, ids)| ids).unwrap_or_default())
}

/// Solution of the demand-and-set-cover combiner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DscSelection {
    pub cover: Vec<SiteId>,
    pub pack: Vec<SiteId>,
    pub union: Vec<SiteId>,
}

/// Covers `universe` and reaches `demand_target` by taking the union of a
/// set-cover solution and a min-knapsack solution. The cost is at most the
/// sum of the two parts.
pub fn dsc_union(
    cands: &[CoverCandidate<'_>],
    universe: &[InterestId],
    items: &[PackItem],
    demand_target: f64,
) -> Result<DscSelection> {
    let cover = greedy_set_cover(cands, universe)?;
    let pack = greedy_min_knapsack(items, demand_target)?;
    let mut union: Vec<SiteId> = cover.iter().chain(&pack).copied().collect();
    union.sort_unstable();
    union.dedup();
    Ok(DscSelection { cover, pack, union })
}
