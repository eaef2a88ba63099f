//! Turns ingested tables into site costs, instance bundles and prediction views.

use std::collections::BTreeSet;

use chargeplan::costing::{
    arrival_rate_from_demand, haversine_km, land_cost, min_slots, service_rate_from_power,
    site_cost, LandCostModel, Location, PoiRecord, QueueSpec, SiteCostInputs, LEVEL2_INFRA_COST,
};
use chargeplan::{build_cover_sets, DistanceTable, MpcInstance};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::ingest::{DemandTable, Junction, PoiRow, SiteRow};

#[derive(Copy, Clone, Debug)]
pub struct QueueParams {
    pub sla_minutes: f64,
    pub power_kw: f64,
    pub energy_per_session: f64,
}

/// Sizing and pricing of one site, money in cents.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteCost {
    pub peak_kwh: f64,
    pub arrival_rate: f64,
    pub slots: u32,
    pub land_cents: f64,
    pub cost_cents: f64,
}

/// Logs one warning per category missing from the score table.
pub fn warn_unknown_categories(pois: &[PoiRow], model: &LandCostModel) {
    let unknown: BTreeSet<&str> = pois
        .iter()
        .map(|p| p.category.as_str())
        .filter(|c| !model.score_table.contains_key(*c))
        .collect();
    for c in unknown {
        log::warn!(
            "PoI category '{c}' has no score; using the default score {}",
            model.default_score
        );
    }
}

pub fn poi_records(pois: &[PoiRow]) -> Vec<PoiRecord> {
    pois.iter()
        .map(|p| PoiRecord {
            category: p.category.clone(),
            location: Location::Geo { lat: p.lat, lon: p.lon },
            distance_to_site: None,
        })
        .collect()
}

/// Queue-sized slot count and `N (L + F)` cost for every site. Sites without
/// demand still get one slot.
pub fn site_costs(
    sites: &[SiteRow],
    demand: Option<&DemandTable>,
    pois: &[PoiRow],
    q: QueueParams,
) -> CliResult<Vec<SiteCost>> {
    let model = LandCostModel::default();
    warn_unknown_categories(pois, &model);
    let records = poi_records(pois);
    let mu = service_rate_from_power(q.power_kw, q.energy_per_session);
    sites
        .iter()
        .map(|s| {
            let peak = demand.and_then(|d| d.peak(&s.id)).unwrap_or(0.0);
            let lambda = arrival_rate_from_demand(peak, q.energy_per_session);
            let slots = if lambda > 0.0 {
                min_slots(&QueueSpec::new(lambda, mu, q.sla_minutes / 60.0)?)
            } else {
                1
            };
            let land = land_cost(&Location::Geo { lat: s.lat, lon: s.lon }, &records, &model);
            let inputs = SiteCostInputs::new(slots, land, LEVEL2_INFRA_COST)?;
            Ok(SiteCost {
                peak_kwh: peak,
                arrival_rate: lambda,
                slots,
                land_cents: (land * 100.0).round(),
                cost_cents: (site_cost(&inputs) * 100.0).round(),
            })
        })
        .collect()
}

/// Serialised single-period instance. Money is in integer cents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceBundle {
    pub site_ids: Vec<String>,
    pub interest_ids: Vec<String>,
    pub demand: Vec<f64>,
    pub cost_cents: Vec<i64>,
    /// Slot counts when the costs came from queue sizing.
    #[serde(default)]
    pub slots: Vec<u32>,
    pub budget_cents: i64,
    pub radius: f64,
    pub distances: DistanceTable,
}

impl InstanceBundle {
    /// Checks shapes and re-validates the distance table.
    pub fn check(&self) -> CliResult<()> {
        let n = self.site_ids.len();
        let bad = |m: String| Err(CliError::Config(format!("instance bundle: {m}")));
        if self.demand.len() != n || self.cost_cents.len() != n {
            return bad(format!("{n} sites but {} demands and {} costs", self.demand.len(), self.cost_cents.len()));
        }
        if !self.slots.is_empty() && self.slots.len() != n {
            return bad(format!("{n} sites but {} slot counts", self.slots.len()));
        }
        let d = &self.distances;
        if d.site_count() != n || d.interest_count() != self.interest_ids.len() {
            return bad(format!(
                "distance table is {}x{}, expected {}x{n}",
                d.interest_count(),
                d.site_count(),
                self.interest_ids.len()
            ));
        }
        DistanceTable::new(d.interest_count(), d.site_count(), d.entries().to_vec())?;
        Ok(())
    }

    pub fn cost(&self) -> Vec<f64> {
        self.cost_cents.iter().map(|&c| c as f64).collect()
    }

    /// Instance at the bundle's radius with optional budget override (cents).
    pub fn instance(&self, budget: Option<f64>) -> MpcInstance {
        self.instance_at(self.radius, budget)
    }

    pub fn instance_at(&self, radius: f64, budget: Option<f64>) -> MpcInstance {
        MpcInstance {
            site_count: self.site_ids.len(),
            interest_count: self.interest_ids.len(),
            demand: self.demand.clone(),
            cost: self.cost(),
            budget: budget.unwrap_or(self.budget_cents as f64),
            cover_sets: build_cover_sets(&self.distances, radius),
            radius,
        }
    }
}

fn nearest(lat: f64, lon: f64, points: &[(f64, f64)], k: usize, skip: Option<usize>) -> Vec<usize> {
    let mut idx: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != skip)
        .map(|(j, &(a, b))| (haversine_km(lat, lon, a, b), j))
        .collect();
    idx.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    idx.into_iter().take(k).map(|(_, j)| j).collect()
}

/// Covariate views for a list of sites.
pub struct Views {
    pub names: Vec<&'static str>,
    pub matrices: Vec<DMatrix<f64>>,
}

/// Builds the PoI-count, traffic and neighbouring-demand views.
///
/// `train` lists the sites with observed demand; the neighbour view for a
/// training site excludes the site itself.
pub fn build_views(
    rows: &[&SiteRow],
    pois: &[PoiRow],
    poi_radius: f64,
    junctions: &[Junction],
    train: &[(&SiteRow, f64)],
    k: usize,
) -> CliResult<Views> {
    let mut names = Vec::new();
    let mut matrices = Vec::new();
    if !pois.is_empty() {
        let cats: Vec<&str> = pois
            .iter()
            .map(|p| p.category.as_str())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let m = DMatrix::from_fn(rows.len(), cats.len(), |r, c| {
            let s = rows[r];
            pois.iter()
                .filter(|p| p.category == cats[c])
                .filter(|p| haversine_km(s.lat, s.lon, p.lat, p.lon) <= poi_radius)
                .count() as f64
        });
        names.push("poi");
        matrices.push(m);
    }
    if !junctions.is_empty() {
        if junctions.len() < k {
            return Err(CliError::Config(format!(
                "traffic view needs {k} junctions, found {}",
                junctions.len()
            )));
        }
        let pts: Vec<(f64, f64)> = junctions.iter().map(|j| (j.lat, j.lon)).collect();
        let mut m = DMatrix::zeros(rows.len(), k);
        for (r, s) in rows.iter().enumerate() {
            for (c, j) in nearest(s.lat, s.lon, &pts, k, None).into_iter().enumerate() {
                m[(r, c)] = junctions[j].density;
            }
        }
        names.push("traffic");
        matrices.push(m);
    }
    if train.len() <= k {
        return Err(CliError::Config(format!(
            "neighbour view needs more than {k} sites with demand, found {}",
            train.len()
        )));
    }
    let pts: Vec<(f64, f64)> = train.iter().map(|(s, _)| (s.lat, s.lon)).collect();
    let mut m = DMatrix::zeros(rows.len(), k);
    for (r, s) in rows.iter().enumerate() {
        let own = train.iter().position(|(t, _)| t.id == s.id);
        for (c, j) in nearest(s.lat, s.lon, &pts, k, own).into_iter().enumerate() {
            m[(r, c)] = train[j].1;
        }
    }
    names.push("neighbour_demand");
    matrices.push(m);
    Ok(Views { names, matrices })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn site(id: &str, lat: f64, lon: f64) -> SiteRow {
        SiteRow { id: id.into(), lat, lon }
    }

    #[test]
    fn zero_demand_sites_get_one_slot() {
        let q = QueueParams { sla_minutes: 5.0, power_kw: 7.0, energy_per_session: 20.0 };
        let c = site_costs(&[site("a", 54.0, -1.0)], None, &[], q).unwrap();
        assert_eq!(c[0].slots, 1);
        let want = (LandCostModel::default().base_price + LEVEL2_INFRA_COST) * 100.0;
        assert_eq!(c[0].cost_cents, want.round());
    }

    #[test]
    fn busier_sites_need_more_slots() {
        let mut rows = std::collections::BTreeMap::new();
        rows.insert("a".to_string(), vec![10.0, 20.0]);
        rows.insert("b".to_string(), vec![200.0, 100.0]);
        let d = DemandTable { hours: vec![0, 1], rows };
        let q = QueueParams { sla_minutes: 5.0, power_kw: 7.0, energy_per_session: 20.0 };
        let c = site_costs(&[site("a", 54.0, -1.0), site("b", 54.0, -1.0)], Some(&d), &[], q).unwrap();
        assert_eq!(c[1].peak_kwh, 200.0);
        assert!(c[1].slots > c[0].slots);
        assert!(c[1].cost_cents > c[0].cost_cents);
    }

    #[test]
    fn neighbour_view_skips_the_site_itself() {
        let sites: Vec<SiteRow> = (0..4).map(|i| site(&format!("s{i}"), 0.0, i as f64 * 0.01)).collect();
        let train: Vec<(&SiteRow, f64)> = sites.iter().zip([1.0, 2.0, 3.0, 4.0]).collect();
        let rows: Vec<&SiteRow> = sites.iter().collect();
        let v = build_views(&rows, &[], 0.5, &[], &train, 2).unwrap();
        assert_eq!(v.names, vec!["neighbour_demand"]);
        let m = &v.matrices[0];
        assert_eq!((m[(0, 0)], m[(0, 1)]), (2.0, 3.0));
        assert_eq!((m[(3, 0)], m[(3, 1)]), (3.0, 2.0));
    }
}
