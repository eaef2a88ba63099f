//! Generated experiment suites comparing the solvers.

use std::path::Path;
use std::time::Instant;

use chargeplan::oracle::{gen_instance, GenParams, ENUMERATION_LIMIT};
use chargeplan::{Error, MpcInstance, MpcSolver, Solution, SolverKind};
use serde_json::{json, Value};

use crate::args::{Experiment, ExperimentArgs, SuiteArgs};
use crate::error::{CliError, CliResult};
use crate::run::{cents, fmt_f64, Output, RunConfig};
use crate::synth::{in_cents, pipeline_costs};

pub fn run(a: &ExperimentArgs, out: &Path) -> CliResult<Value> {
    match &a.kind {
        Experiment::Compare(s) => compare(s, out),
        Experiment::BudgetSweep { suite, fractions } => budget_sweep(suite, fractions, out),
        Experiment::Noise { suite, sigma } => noise(suite, sigma, out),
    }
}

fn config(name: &str, s: &SuiteArgs) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::new(name);
    cfg.seed = Some(s.seed);
    cfg.radius = Some(s.radius);
    cfg.extra("instances", s.instances)
        .extra("min_sites", s.min_sites)
        .extra("max_sites", s.max_sites)
        .extra("interests", s.interests)
        .extra("budget_fraction", s.budget_fraction)
        .extra("oracle", s.oracle)
        .extra("timing", s.timing);
    cfg.check()?;
    if s.instances == 0 || s.min_sites == 0 || s.min_sites > s.max_sites || s.interests == 0 {
        return Err(CliError::Config(
            "suite needs at least one instance, 1 <= min-sites <= max-sites and interests >= 1".into(),
        ));
    }
    if s.oracle && s.max_sites > ENUMERATION_LIMIT {
        return Err(CliError::Config(format!(
            "--oracle supports at most {ENUMERATION_LIMIT} sites, got --max-sites {}",
            s.max_sites
        )));
    }
    Ok(cfg)
}

/// Suite member `k`: site counts cycle through the configured range.
fn params(s: &SuiteArgs, k: usize) -> GenParams {
    GenParams {
        site_count: s.min_sites + k % (s.max_sites - s.min_sites + 1),
        interest_count: s.interests,
        radius: s.radius,
        budget_fraction: s.budget_fraction,
        seed: s.seed + k as u64,
        ..GenParams::default()
    }
}

fn solvers(s: &SuiteArgs) -> Vec<SolverKind> {
    let mut v = vec![SolverKind::Ipac, SolverKind::Naive];
    if s.oracle {
        v.push(SolverKind::Oracle);
    }
    v
}

struct Outcome {
    solution: Option<Solution>,
    wall_ms: f64,
}

fn attempt(solver: SolverKind, inst: &MpcInstance) -> CliResult<Outcome> {
    let start = Instant::now();
    let res = solver.solve(inst);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    match res {
        Ok(sol) => Ok(Outcome { solution: Some(sol), wall_ms }),
        Err(Error::Infeasible(_)) => Ok(Outcome { solution: None, wall_ms }),
        Err(e) => Err(e.into()),
    }
}

fn demand_of(o: &Outcome) -> f64 {
    o.solution.as_ref().map_or(0.0, |s| s.total_demand)
}

fn compare(s: &SuiteArgs, out: &Path) -> CliResult<Value> {
    let cfg = config("experiment compare", s)?;
    let kinds = solvers(s);
    let mut rows = Vec::new();
    let mut feasible = vec![0usize; kinds.len()];
    let mut demand = vec![0.0; kinds.len()];
    let mut ratio = vec![0.0; kinds.len()];
    let mut scored = 0usize;
    for k in 0..s.instances {
        let p = params(s, k);
        let inst = in_cents(&gen_instance(&p)?.instance);
        let results = kinds.iter().map(|&kind| attempt(kind, &inst)).collect::<CliResult<Vec<_>>>()?;
        let opt = s.oracle.then(|| demand_of(&results[kinds.len() - 1]));
        if let Some(opt) = opt.filter(|&d| d > 0.0) {
            scored += 1;
            for (j, r) in results.iter().enumerate() {
                ratio[j] += demand_of(r) / opt;
            }
        }
        for (j, (kind, r)) in kinds.iter().zip(&results).enumerate() {
            let mut row = vec![p.seed.to_string(), p.site_count.to_string(), kind.to_string()];
            match &r.solution {
                Some(sol) => {
                    feasible[j] += 1;
                    demand[j] += sol.total_demand;
                    row.extend([fmt_f64(sol.total_demand), cents(sol.total_cost).to_string(), "1".into()]);
                }
                None => row.extend([String::new(), String::new(), "0".into()]),
            }
            if s.timing {
                row.push(format!("{:.3}", r.wall_ms));
            }
            rows.push(row);
        }
    }
    let mut header = vec!["seed", "sites", "solver", "demand", "cost_cents", "feasible"];
    if s.timing {
        header.push("wall_ms");
    }
    let mut o = Output::create(out)?;
    o.csv("comparison.csv", &header, &rows)?;
    let per_solver: serde_json::Map<String, Value> = kinds
        .iter()
        .enumerate()
        .map(|(j, kind)| {
            let mut v = json!({
                "feasible": feasible[j],
                "mean_demand": demand[j] / s.instances as f64,
            });
            if scored > 0 {
                v["mean_ratio_to_optimum"] = json!(ratio[j] / scored as f64);
            }
            (kind.to_string(), v)
        })
        .collect();
    let gap = if demand[1] > 0.0 { 100.0 * (demand[0] - demand[1]) / demand[1] } else { 0.0 };
    let summary = json!({
        "instances": s.instances,
        "solvers": per_solver,
        "ipac_gain_over_naive_pct": gap,
    });
    o.finish(&cfg, summary)
}

fn budget_sweep(s: &SuiteArgs, fractions: &[f64], out: &Path) -> CliResult<Value> {
    let mut cfg = config("experiment budget-sweep", s)?;
    if fractions.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
        return Err(CliError::Config("--fractions must be finite and non-negative".into()));
    }
    cfg.extra("fractions", fractions);
    let kinds = solvers(s);
    let suite: Vec<MpcInstance> = (0..s.instances)
        .map(|k| Ok(in_cents(&gen_instance(&params(s, k))?.instance)))
        .collect::<CliResult<_>>()?;
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for &f in fractions {
        let mut cells = serde_json::Map::new();
        for &kind in &kinds {
            let (mut ok, mut total, mut ms) = (0usize, 0.0, 0.0);
            for inst in &suite {
                let budget = (f * inst.cost.iter().sum::<f64>()).round();
                let r = attempt(kind, &inst.with_budget(budget))?;
                ok += usize::from(r.solution.is_some());
                total += demand_of(&r);
                ms += r.wall_ms;
            }
            let mean = total / suite.len() as f64;
            let mut row = vec![fmt_f64(f), kind.to_string(), suite.len().to_string(), ok.to_string(), fmt_f64(mean)];
            if s.timing {
                row.push(format!("{ms:.3}"));
            }
            rows.push(row);
            cells.insert(kind.to_string(), json!({ "feasible": ok, "mean_demand": mean }));
        }
        table.push(json!({ "fraction": f, "solvers": cells }));
    }
    let mut header = vec!["fraction", "solver", "instances", "feasible", "mean_demand"];
    if s.timing {
        header.push("wall_ms");
    }
    let mut o = Output::create(out)?;
    o.csv("budget_sweep.csv", &header, &rows)?;
    o.finish(&cfg, json!({ "instances": s.instances, "fractions": table }))
}

fn noise(s: &SuiteArgs, sigmas: &[f64], out: &Path) -> CliResult<Value> {
    let mut cfg = config("experiment noise", s)?;
    cfg.noise_sigma = Some(sigmas.to_vec());
    cfg.check()?;
    let mut rows = Vec::new();
    let mut per_sigma = Vec::new();
    for &sigma in sigmas {
        let (mut both, mut gap_sum, mut ipac_ok, mut naive_ok) = (0usize, 0.0, 0usize, 0usize);
        for k in 0..s.instances {
            let p = GenParams {
                cost_source: pipeline_costs(),
                noise_sigma: sigma,
                ..params(s, k)
            };
            let inst = in_cents(&gen_instance(&p)?.instance);
            let ipac = attempt(SolverKind::Ipac, &inst)?;
            let naive = attempt(SolverKind::Naive, &inst)?;
            let (di, dn) = (demand_of(&ipac), demand_of(&naive));
            ipac_ok += usize::from(ipac.solution.is_some());
            naive_ok += usize::from(naive.solution.is_some());
            if ipac.solution.is_some() && naive.solution.is_some() && dn > 0.0 {
                both += 1;
                gap_sum += 100.0 * (di - dn) / dn;
            }
            rows.push(vec![
                fmt_f64(sigma),
                p.seed.to_string(),
                p.site_count.to_string(),
                flag(ipac.solution.is_some()),
                fmt_f64(di),
                flag(naive.solution.is_some()),
                fmt_f64(dn),
            ]);
        }
        per_sigma.push(json!({
            "sigma": sigma,
            "ipac_feasible": ipac_ok,
            "naive_feasible": naive_ok,
            "compared": both,
            "mean_gap_pct": if both > 0 { gap_sum / both as f64 } else { 0.0 },
        }));
    }
    let mut o = Output::create(out)?;
    o.csv(
        "noise.csv",
        &["sigma", "seed", "sites", "ipac_feasible", "ipac_demand", "naive_feasible", "naive_demand"],
        &rows,
    )?;
    o.finish(&cfg, json!({ "instances": s.instances, "sigmas": per_sigma }))
}

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}
