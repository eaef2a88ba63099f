//! Station sizing and pricing.
//!
//! A site is modelled as an M/M/N queue. The number of charging slots is the
//! smallest N whose expected wait meets the service level, and the site cost
//! is `N * (land + infrastructure)` per slot.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-slot infrastructure cost for a Level 2 charger (USD).
pub const LEVEL2_INFRA_COST: f64 = 1852.0;

/// Minimum per-unit land cost (USD).
pub const BASE_LAND_PRICE: f64 = 4000.0;

/// Arrival and service parameters of one site.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueueSpec {
    /// Customers per hour.
    pub arrival_rate: f64,
    /// Sessions completed per hour by one slot.
    pub service_rate: f64,
    /// Maximum expected wait, hours.
    pub sla_wait: f64,
}

impl QueueSpec {
    pub fn new(arrival_rate: f64, service_rate: f64, sla_wait: f64) -> Result<Self> {
        if !(arrival_rate > 0.0 && arrival_rate.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "arrival rate must be positive, got {arrival_rate}"
            )));
        }
        if !(service_rate > 0.0 && service_rate.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "service rate must be positive, got {service_rate}"
            )));
        }
        if !(sla_wait >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "SLA wait must be non-negative, got {sla_wait}"
            )));
        }
        Ok(QueueSpec {
            arrival_rate,
            service_rate,
            sla_wait,
        })
    }

    /// Offered load `lambda / mu`.
    pub fn load(&self) -> f64 {
        self.arrival_rate / self.service_rate
    }

    /// Smallest stable slot count, `floor(lambda / mu) + 1`.
    pub fn stability_floor(&self) -> u32 {
        self.load().floor() as u32 + 1
    }
}

/// Arrival rate from the peak hourly energy demand at a site.
pub fn arrival_rate_from_demand(peak_hourly_energy: f64, energy_per_session: f64) -> f64 {
    peak_hourly_energy / energy_per_session
}

/// Service rate of one slot: sessions per hour at the given charging power.
pub fn service_rate_from_power(power_kw: f64, energy_per_session: f64) -> f64 {
    power_kw / energy_per_session
}

/// Probability that an arrival waits in an M/M/N queue with offered load `rho`.
///
/// Evaluated through the Erlang-B recurrence `B_k = rho B_{k-1} / (k + rho B_{k-1})`
/// and `C = N B_N / (N - rho (1 - B_N))`, which stays finite for any N.
pub fn erlang_c(n: u32, rho: f64) -> Result<f64> {
    if n == 0 || !(rho >= 0.0) || rho >= n as f64 {
        return Err(Error::UnstableQueue {
            servers: n,
            load: rho,
        });
    }
    let mut b = 1.0;
    for k in 1..=n {
        b = rho * b / (k as f64 + rho * b);
    }
    let n = n as f64;
    let c = n * b / (n - rho * (1.0 - b));
    Ok(c.clamp(0.0, 1.0))
}

/// Mean wait before service, `ErlC(N, lambda/mu) / (N mu - lambda)`, in hours.
pub fn expected_wait(n: u32, q: &QueueSpec) -> Result<f64> {
    let capacity = n as f64 * q.service_rate;
    if capacity <= q.arrival_rate {
        return Err(Error::UnstableQueue {
            servers: n,
            load: q.load(),
        });
    }
    Ok(erlang_c(n, q.load())? / (capacity - q.arrival_rate))
}

/// Smallest slot count whose expected wait is within the SLA.
///
/// The expected wait decreases strictly in N, so an exponential probe followed
/// by bisection finds the boundary.
pub fn min_slots(q: &QueueSpec) -> u32 {
    let meets = |n: u32| expected_wait(n, q).is_ok_and(|w| w <= q.sla_wait);
    let floor = q.stability_floor();
    if meets(floor) {
        return floor;
    }
    let mut lo = floor; // violates
    let mut step = 1u32;
    let mut hi = floor.saturating_add(step);
    while !meets(hi) {
        lo = hi;
        step = step.saturating_mul(2);
        hi = hi.saturating_add(step);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if meets(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Planar or geodetic position.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Location {
    Geo { lat: f64, lon: f64 },
    /// Coordinates in km.
    Planar { x: f64, y: f64 },
}

const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Great-circle distance in km.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

impl Location {
    /// Distance in km; `None` when mixing geodetic and planar positions.
    pub fn distance_km(&self, other: &Location) -> Option<f64> {
        match (self, other) {
            (Location::Geo { lat, lon }, Location::Geo { lat: la, lon: lo }) => {
                Some(haversine_km(*lat, *lon, *la, *lo))
            }
            (Location::Planar { x, y }, Location::Planar { x: a, y: b }) => {
                Some((x - a).hypot(y - b))
            }
            _ => None,
        }
    }
}

/// Point of interest near a candidate site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoiRecord {
    pub category: String,
    pub location: Location,
    /// Pre-joined distance to the site being priced, km.
    #[serde(default)]
    pub distance_to_site: Option<f64>,
}

/// Land price as a base price plus distance-discounted point-of-interest scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandCostModel {
    pub base_price: f64,
    /// Only points of interest within this radius (km) contribute.
    pub poi_radius: f64,
    pub score_table: BTreeMap<String, f64>,
    /// Score for categories missing from the table.
    pub default_score: f64,
    /// Lower bound on the distance divisor, km.
    pub min_distance_clamp: f64,
}

impl Default for LandCostModel {
    fn default() -> Self {
        let score_table = [
            ("airport", 800.0),
            ("railway_station", 800.0),
            ("school", 300.0),
            ("restaurant", 300.0),
            ("hospital", 300.0),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        LandCostModel {
            base_price: BASE_LAND_PRICE,
            poi_radius: 1.0,
            score_table,
            default_score: 0.0,
            min_distance_clamp: 0.05,
        }
    }
}

impl LandCostModel {
    pub fn score(&self, category: &str) -> f64 {
        self.score_table
            .get(category)
            .copied()
            .unwrap_or(self.default_score)
    }
}

/// `L = p + sum_{j within delta} score_j / max(dist_j, clamp)`.
///
/// Records without a pre-joined distance are measured from `site`; records
/// whose distance cannot be determined are skipped.
pub fn land_cost(site: &Location, pois: &[PoiRecord], model: &LandCostModel) -> f64 {
    let mut total = model.base_price;
    for poi in pois {
        let Some(dist) = poi
            .distance_to_site
            .or_else(|| site.distance_km(&poi.location))
        else {
            continue;
        };
        if dist <= model.poi_radius {
            total += model.score(&poi.category) / dist.max(model.min_distance_clamp);
        }
    }
    total
}

/// Inputs to the per-site cost `N (L + F)`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteCostInputs {
    pub slots: u32,
    pub land_unit: f64,
    pub infra_unit: f64,
}

impl SiteCostInputs {
    pub fn new(slots: u32, land_unit: f64, infra_unit: f64) -> Result<Self> {
        if slots == 0 {
            return Err(Error::InvalidInput("a sized site has at least one slot".into()));
        }
        if !(land_unit >= 0.0) || !(infra_unit >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "unit costs must be non-negative (land {land_unit}, infra {infra_unit})"
            )));
        }
        Ok(SiteCostInputs {
            slots,
            land_unit,
            infra_unit,
        })
    }
}

pub fn site_cost(inputs: &SiteCostInputs) -> f64 {
    inputs.slots as f64 * (inputs.land_unit + inputs.infra_unit)
}

/// Floor applied to perturbed costs so they stay positive.
pub const DEFAULT_COST_FLOOR: f64 = 1.0;

/// Adds independent `N(0, sigma^2)` noise to each cost, clamped below at `floor`.
pub fn perturb_costs(costs: &[f64], sigma: f64, seed: u64, floor: f64) -> Result<Vec<f64>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "noise sigma must be finite and non-negative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(costs.to_vec());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(costs
        .iter()
        .map(|&c| (c + normal.sample(&mut rng)).max(floor))
        .collect())
}
