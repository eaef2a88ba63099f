//! JSON-in, JSON-out bindings behind `web/index.html`.
//!
//! Each export has a plain Rust twin (`*_json`) so the logic can be tested
//! natively; the `#[wasm_bindgen]` wrappers only convert errors.

use chargeplan::costing::{expected_wait, min_slots, QueueSpec};
use chargeplan::oracle::{gen_instance, GenParams};
use chargeplan::reachability::{radius_candidates, sweep, RadiusFamily, SweepOptions};
use chargeplan::{MpcSolver, SolverKind};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Largest instance the exhaustive solver is offered for.
pub const ORACLE_LIMIT: usize = 16;

#[derive(Clone, Debug, Deserialize)]
#[serde(default)]
pub struct DemoRequest {
    pub sites: usize,
    pub interests: usize,
    pub extent: f64,
    pub radius: f64,
    pub budget_fraction: f64,
    pub seed: u64,
    /// Weight of demand against radius in the sweep.
    pub alpha: f64,
    pub isotonic: bool,
    pub solver: SolverKind,
}

impl Default for DemoRequest {
    fn default() -> Self {
        DemoRequest {
            sites: 12,
            interests: 8,
            extent: 10.0,
            radius: 4.0,
            budget_fraction: 0.4,
            seed: 7,
            alpha: 0.5,
            isotonic: false,
            solver: SolverKind::Ipac,
        }
    }
}

impl DemoRequest {
    fn params(&self) -> GenParams {
        GenParams {
            site_count: self.sites,
            interest_count: self.interests,
            extent: self.extent,
            radius: self.radius,
            budget_fraction: self.budget_fraction,
            seed: self.seed,
            ..GenParams::default()
        }
    }
}

#[derive(Debug, Serialize)]
struct SolverOutcome {
    solver: &'static str,
    feasible: bool,
    selected: Vec<usize>,
    demand: f64,
    cost: f64,
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct Placement {
    sites: Vec<(f64, f64)>,
    interests: Vec<(f64, f64)>,
    demand: Vec<f64>,
    cost: Vec<f64>,
    budget: f64,
    radius: f64,
    total_demand: f64,
    results: Vec<SolverOutcome>,
}

fn parse(request: &str) -> Result<DemoRequest, String> {
    if request.trim().is_empty() {
        return Ok(DemoRequest::default());
    }
    serde_json::from_str(request).map_err(|e| format!("bad request: {e}"))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Generates an instance and solves it with every solver that fits.
pub fn generate_and_solve_json(request: &str) -> Result<String, String> {
    let req = parse(request)?;
    let g = gen_instance(&req.params()).map_err(|e| e.to_string())?;
    let inst = &g.instance;
    let results = SolverKind::ALL
        .iter()
        .filter(|k| **k != SolverKind::Oracle || inst.site_count <= ORACLE_LIMIT)
        .map(|k| match k.solve(inst) {
            Ok(s) => SolverOutcome {
                solver: k.as_str(),
                feasible: true,
                selected: s.selected_ids().iter().map(|id| id.0).collect(),
                demand: s.total_demand,
                cost: s.total_cost,
                error: None,
            },
            Err(e) => SolverOutcome {
                solver: k.as_str(),
                feasible: false,
                selected: vec![],
                demand: 0.0,
                cost: 0.0,
                error: Some(e.to_string()),
            },
        })
        .collect();
    to_json(&Placement {
        total_demand: inst.total_demand(),
        sites: g.sites,
        interests: g.interests,
        demand: inst.demand.clone(),
        cost: inst.cost.clone(),
        budget: inst.budget,
        radius: inst.radius,
        results,
    })
}

/// Scores every candidate radius of a generated instance.
pub fn radius_sweep_json(request: &str) -> Result<String, String> {
    let req = parse(request)?;
    if req.solver == SolverKind::Oracle && req.sites > ORACLE_LIMIT {
        return Err(format!("the exact solver is limited to {ORACLE_LIMIT} sites"));
    }
    let g = gen_instance(&req.params()).map_err(|e| e.to_string())?;
    let i = g.instance;
    let family = RadiusFamily::new(i.demand, i.cost, i.budget, g.distances);
    let set = radius_candidates(&family.distances).map_err(|e| e.to_string())?;
    let result = sweep(&family, &set.radii, req.alpha, &req.solver, SweepOptions { isotonic: req.isotonic })
        .map_err(|e| e.to_string())?;
    to_json(&result)
}

#[derive(Debug, Serialize)]
struct QueuePoint {
    slots: u32,
    wait_minutes: f64,
}

#[derive(Debug, Serialize)]
struct QueueCurve {
    load: f64,
    stability_floor: u32,
    min_slots: u32,
    points: Vec<QueuePoint>,
}

/// Expected wait against slot count for an M/M/N station, from the stability
/// floor up to `extra` slots past the smallest count meeting the SLA.
pub fn queue_curve_json(arrivals_per_hour: f64, sessions_per_hour: f64, sla_minutes: f64, extra: u32) -> Result<String, String> {
    let q = QueueSpec::new(arrivals_per_hour, sessions_per_hour, sla_minutes / 60.0).map_err(|e| e.to_string())?;
    let floor = q.stability_floor();
    let n = min_slots(&q);
    let points = (floor..=n + extra)
        .map(|slots| {
            expected_wait(slots, &q)
                .map(|w| QueuePoint { slots, wait_minutes: w * 60.0 })
                .map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;
    to_json(&QueueCurve { load: q.load(), stability_floor: floor, min_slots: n, points })
}

#[wasm_bindgen]
pub fn generate_and_solve(request: &str) -> Result<String, JsError> {
    generate_and_solve_json(request).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn radius_sweep(request: &str) -> Result<String, JsError> {
    radius_sweep_json(request).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn queue_curve(arrivals_per_hour: f64, sessions_per_hour: f64, sla_minutes: f64, extra: u32) -> Result<String, JsError> {
    queue_curve_json(arrivals_per_hour, sessions_per_hour, sla_minutes, extra).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn version() -> String {
    chargeplan::VERSION.to_string()
}
