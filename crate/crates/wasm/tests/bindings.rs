use chargeplan_web::{generate_and_solve_json, queue_curve_json, radius_sweep_json};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn placement_reports_every_solver_within_budget() {
    let v = parse(&generate_and_solve_json(r#"{"sites": 10, "seed": 3}"#).unwrap());
    let results = v["results"].as_array().unwrap();
    let names: Vec<&str> = results.iter().map(|r| r["solver"].as_str().unwrap()).collect();
    assert_eq!(names, ["ipac", "naive", "oracle"]);
    let budget = v["budget"].as_f64().unwrap();
    let oracle = results[2]["demand"].as_f64().unwrap();
    for r in results.iter().filter(|r| r["feasible"].as_bool().unwrap()) {
        assert!(r["cost"].as_f64().unwrap() <= budget * (1.0 + 1e-9));
        assert!(r["demand"].as_f64().unwrap() <= oracle + 1e-9);
    }
    assert_eq!(v["sites"].as_array().unwrap().len(), 10);
}

#[test]
fn oracle_skipped_on_large_instances() {
    let v = parse(&generate_and_solve_json(r#"{"sites": 40}"#).unwrap());
    assert_eq!(v["results"].as_array().unwrap().len(), 2);
}

#[test]
fn empty_request_uses_defaults() {
    assert!(generate_and_solve_json("").is_ok());
    assert!(generate_and_solve_json("{\"sites\": \"many\"}").unwrap_err().starts_with("bad request"));
}

#[test]
fn sweep_picks_a_scored_radius() {
    let v = parse(&radius_sweep_json(r#"{"sites": 10, "alpha": 0.7, "solver": "oracle"}"#).unwrap());
    let best = v["best_radius"].as_f64().unwrap();
    let records = v["records"].as_array().unwrap();
    let top = records.iter().filter_map(|r| r["objective"].as_f64()).fold(f64::NEG_INFINITY, f64::max);
    let at_best = records.iter().find(|r| r["radius"].as_f64() == Some(best)).unwrap();
    assert_eq!(at_best["objective"].as_f64().unwrap(), top);
    assert!(radius_sweep_json(r#"{"alpha": 2}"#).is_err());
    assert!(radius_sweep_json(r#"{"sites": 30, "solver": "oracle"}"#).is_err());
}

#[test]
fn queue_curve_matches_worked_case() {
    let v = parse(&queue_curve_json(4.0, 2.0, 5.0, 2).unwrap());
    assert_eq!(v["min_slots"], 4);
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.first().unwrap()["slots"], v["stability_floor"]);
    assert_eq!(points.last().unwrap()["slots"], 6);
    let waits: Vec<f64> = points.iter().map(|p| p["wait_minutes"].as_f64().unwrap()).collect();
    assert!(waits.windows(2).all(|w| w[1] < w[0]));
    assert!(queue_curve_json(0.0, 2.0, 5.0, 1).is_err());
}
