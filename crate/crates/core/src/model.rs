//! Problem instance, cover sets and solution accounting.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack applied to every budget comparison. Costs are summed in
/// different orders by different solvers; this keeps a selection that one
/// routine considers affordable from being rejected by another over a few ulps.
pub const BUDGET_SLACK: f64 = 1e-9;

/// `spent <= budget`, up to [`BUDGET_SLACK`].
#[inline]
pub fn within_budget(spent: f64, budget: f64) -> bool {
    spent <= budget + BUDGET_SLACK * budget.abs().max(1.0)
}

/// Index of a candidate site, dense in `0..site_count`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SiteId(pub usize);

/// Index of a location of interest, dense in `0..interest_count`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InterestId(pub usize);

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for InterestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Mixed pack-and-cover instance: choose sites maximising demand subject to
/// the budget while every location of interest lies in a selected cover set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpcInstance {
    pub site_count: usize,
    pub interest_count: usize,
    /// Demand per site (energy units per period).
    pub demand: Vec<f64>,
    /// Installation cost per site.
    pub cost: Vec<f64>,
    pub budget: f64,
    /// Locations of interest within `radius` of each site, sorted and unique.
    pub cover_sets: Vec<Vec<InterestId>>,
    /// Radius the cover sets were built at (km).
    pub radius: f64,
}

impl MpcInstance {
    /// Assembles an instance from a distance table, building cover sets at `radius`.
    pub fn from_distances(
        demand: Vec<f64>,
        cost: Vec<f64>,
        budget: f64,
        distances: &DistanceTable,
        radius: f64,
    ) -> Self {
        MpcInstance {
            site_count: demand.len(),
            interest_count: distances.interest_count(),
            demand,
            cost,
            budget,
            cover_sets: build_cover_sets(distances, radius),
            radius,
        }
    }

    pub fn total_demand(&self) -> f64 {
        self.demand.iter().sum()
    }

    pub fn all_interests(&self) -> Vec<InterestId> {
        (0..self.interest_count).map(InterestId).collect()
    }

    /// Same instance with a different budget.
    pub fn with_budget(&self, budget: f64) -> Self {
        MpcInstance {
            budget,
            ..self.clone()
        }
    }
}

/// Interest-by-site table of network distances in km.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceTable {
    interests: usize,
    sites: usize,
    /// Row-major: `data[interest * sites + site]`.
    data: Vec<f64>,
}

impl DistanceTable {
    pub fn new(interests: usize, sites: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != interests * sites {
            return Err(Error::InvalidInput(format!(
                "distance table has {} entries, expected {interests}x{sites}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().position(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::InvalidInput(format!(
                "distance entry ({}, {}) is {}",
                bad / sites.max(1),
                bad % sites.max(1),
                data[bad]
            )));
        }
        Ok(DistanceTable {
            interests,
            sites,
            data,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let sites = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != sites) {
            return Err(Error::InvalidInput("ragged distance table".into()));
        }
        Self::new(rows.len(), sites, rows.concat())
    }

    /// Euclidean distances between planar points.
    pub fn euclidean(interests: &[(f64, f64)], sites: &[(f64, f64)]) -> Self {
        let mut data = Vec::with_capacity(interests.len() * sites.len());
        for &(ix, iy) in interests {
            for &(sx, sy) in sites {
                data.push((ix - sx).hypot(iy - sy));
            }
        }
        DistanceTable {
            interests: interests.len(),
            sites: sites.len(),
            data,
        }
    }

    pub fn interest_count(&self) -> usize {
        self.interests
    }

    pub fn site_count(&self) -> usize {
        self.sites
    }

    #[inline]
    pub fn get(&self, interest: InterestId, site: SiteId) -> f64 {
        self.data[interest.0 * self.sites + site.0]
    }

    pub fn row(&self, interest: InterestId) -> &[f64] {
        let start = interest.0 * self.sites;
        &self.data[start..start + self.sites]
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }
}

/// `S_i^r = { l : dist(l, i) <= r }` for every site. The ball is closed.
pub fn build_cover_sets(dist: &DistanceTable, r: f64) -> Vec<Vec<InterestId>> {
    let mut sets = vec![Vec::new(); dist.site_count()];
    for l in 0..dist.interest_count() {
        for (i, &d) in dist.row(InterestId(l)).iter().enumerate() {
            if d <= r {
                sets[i].push(InterestId(l));
            }
        }
    }
    sets
}

/// A single problem found by [`validate_instance`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    LengthMismatch {
        field: String,
        expected: usize,
        found: usize,
    },
    InterestOutOfRange {
        site: SiteId,
        interest: InterestId,
    },
    NonPositiveCost {
        site: SiteId,
        cost: f64,
    },
    NegativeDemand {
        site: SiteId,
        demand: f64,
    },
    NegativeBudget {
        budget: f64,
    },
    NonFinite {
        field: String,
    },
    NoCandidateSites,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LengthMismatch {
                field,
                expected,
                found,
            } => write!(f, "{field} has length {found}, expected {expected}"),
            Violation::InterestOutOfRange { site, interest } => {
                write!(f, "site {site} covers out-of-range interest {interest}")
            }
            Violation::NonPositiveCost { site, cost } => {
                write!(f, "site {site} has non-positive cost {cost}")
            }
            Violation::NegativeDemand { site, demand } => {
                write!(f, "site {site} has negative demand {demand}")
            }
            Violation::NegativeBudget { budget } => write!(f, "budget {budget} is negative"),
            Violation::NonFinite { field } => write!(f, "{field} contains a non-finite value"),
            Violation::NoCandidateSites => write!(f, "instance has no candidate sites"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "no violations");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_instance(inst: &MpcInstance) -> ValidationReport {
    let mut violations = Vec::new();
    let n = inst.site_count;
    if n == 0 {
        violations.push(Violation::NoCandidateSites);
    }
    for (field, len) in [
        ("demand", inst.demand.len()),
        ("cost", inst.cost.len()),
        ("cover_sets", inst.cover_sets.len()),
    ] {
        if len != n {
            violations.push(Violation::LengthMismatch {
                field: field.to_string(),
                expected: n,
                found: len,
            });
        }
    }
    if inst.demand.iter().any(|d| !d.is_finite()) {
        violations.push(Violation::NonFinite {
            field: "demand".into(),
        });
    }
    if inst.cost.iter().any(|c| !c.is_finite()) {
        violations.push(Violation::NonFinite {
            field: "cost".into(),
        });
    }
    if !inst.budget.is_finite() {
        violations.push(Violation::NonFinite {
            field: "budget".into(),
        });
    } else if inst.budget < 0.0 {
        violations.push(Violation::NegativeBudget {
            budget: inst.budget,
        });
    }
    for (i, &c) in inst.cost.iter().enumerate() {
        if c <= 0.0 {
            violations.push(Violation::NonPositiveCost {
                site: SiteId(i),
                cost: c,
            });
        }
    }
    for (i, &d) in inst.demand.iter().enumerate() {
        if d < 0.0 {
            violations.push(Violation::NegativeDemand {
                site: SiteId(i),
                demand: d,
            });
        }
    }
    for (i, set) in inst.cover_sets.iter().enumerate() {
        for &l in set {
            if l.0 >= inst.interest_count {
                violations.push(Violation::InterestOutOfRange {
                    site: SiteId(i),
                    interest: l,
                });
            }
        }
    }
    ValidationReport { violations }
}

/// Selection with its derived accounting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub selected: Vec<bool>,
    pub total_demand: f64,
    pub total_cost: f64,
    pub covered: Vec<InterestId>,
}

impl Solution {
    pub fn selected_ids(&self) -> Vec<SiteId> {
        self.selected
            .iter()
            .enumerate()
            .filter(|(_, &x)| x)
            .map(|(i, _)| SiteId(i))
            .collect()
    }

    pub fn selected_count(&self) -> usize {
        self.selected.iter().filter(|&&x| x).count()
    }
}

/// Indicator vector for a list of ids.
pub fn indicator(site_count: usize, ids: &[SiteId]) -> Vec<bool> {
    let mut x = vec![false; site_count];
    for id in ids {
        x[id.0] = true;
    }
    x
}

/// `sum_i c_i x_i`, summed in site order.
pub(crate) fn selected_sum(values: &[f64], sel: &[bool]) -> f64 {
    values
        .iter()
        .zip(sel)
        .filter(|(_, &x)| x)
        .map(|(v, _)| *v)
        .sum()
}

/// Marks every interest covered by the selection.
pub(crate) fn covered_mask(inst: &MpcInstance, sel: &[bool]) -> Vec<bool> {
    let mut mask = vec![false; inst.interest_count];
    for (set, _) in inst.cover_sets.iter().zip(sel).filter(|(_, &x)| x) {
        for l in set {
            mask[l.0] = true;
        }
    }
    mask
}

pub fn score_solution(inst: &MpcInstance, sel: &[bool]) -> Solution {
    assert_eq!(sel.len(), inst.site_count, "selection length mismatch");
    let covered = covered_mask(inst, sel)
        .iter()
        .enumerate()
        .filter(|(_, &c)| c)
        .map(|(l, _)| InterestId(l))
        .collect();
    Solution {
        selected: sel.to_vec(),
        total_demand: selected_sum(&inst.demand, sel),
        total_cost: selected_sum(&inst.cost, sel),
        covered,
    }
}

/// Budget respected and every location of interest covered.
pub fn is_feasible(inst: &MpcInstance, sel: &[bool]) -> bool {
    assert_eq!(sel.len(), inst.site_count, "selection length mismatch");
    within_budget(selected_sum(&inst.cost, sel), inst.budget)
        && covered_mask(inst, sel).iter().all(|&c| c)
}
