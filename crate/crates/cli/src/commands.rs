//! One handler per subcommand. Each builds its [`RunConfig`], checks it,
//! does the work, writes artifacts and returns a JSON summary.

use std::collections::HashMap;
use std::path::Path;

use chargeplan::demand::{fit_mdr, fit_predict, loocv_rmse, ModelKind};
use chargeplan::extensions::{
    multi_period_solve, subsidy_solve, validate_outcome, validate_schedule, MultiPeriodInstance,
    SubsidyInstance, GOVERNMENT,
};
use chargeplan::ipac::ipac_solve;
use chargeplan::oracle::exact_subsidy;
use chargeplan::reachability::{radius_candidates, sweep, RadiusFamily, SweepOptions};
use chargeplan::{is_feasible, validate_instance, MpcInstance, MpcSolver, Solution, SolverKind};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::ingest::{self, hour_column, DemandTable, HOURS};
use crate::pipeline::{self, InstanceBundle, QueueParams};
use crate::run::{cents, dollars_to_cents, fmt_f64, read_json, Output, RunConfig};
use crate::{experiment, synth};

pub fn run(cli: Cli) -> CliResult<Value> {
    let out = cli.out_dir.as_path();
    match cli.command {
        Command::Validate(a) => validate(&a, out),
        Command::Ingest(a) => ingest(&a, out),
        Command::Cost(a) => cost(&a, out),
        Command::Predict(a) => predict(&a, out),
        Command::Solve(a) => solve(&a, out),
        Command::Sweep(a) => sweep_cmd(&a, out),
        Command::MultiPeriod(a) => multi_period(&a, out),
        Command::Subsidy(a) => subsidy(&a, out),
        Command::Experiment(a) => experiment::run(&a, out),
        Command::Gen(a) => gen(&a, out),
    }
}

fn load_bundle(path: &Path) -> CliResult<InstanceBundle> {
    let b: InstanceBundle = read_json(path)?;
    b.check()?;
    Ok(b)
}

fn checked(inst: MpcInstance) -> CliResult<MpcInstance> {
    let report = validate_instance(&inst);
    if report.is_ok() {
        Ok(inst)
    } else {
        Err(chargeplan::Error::InvalidInstance(report).into())
    }
}

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

/// Rows of `solution.csv`: site_id, selected, participant, slots, cost_cents, demand.
fn solution_rows(b: &InstanceBundle, sol: &Solution) -> Vec<Vec<String>> {
    (0..b.site_ids.len())
        .map(|i| {
            vec![
                b.site_ids[i].clone(),
                flag(sol.selected[i]),
                String::new(),
                b.slots.get(i).map_or(String::new(), u32::to_string),
                b.cost_cents[i].to_string(),
                fmt_f64(b.demand[i]),
            ]
        })
        .collect()
}

const SOLUTION_HEADER: [&str; 6] = ["site_id", "selected", "participant", "slots", "cost_cents", "demand"];

/// Selection indicator read back from a `solution.csv`.
pub fn read_selection(path: &Path, site_ids: &[String]) -> CliResult<Vec<bool>> {
    let index: HashMap<&str, usize> = site_ids.iter().enumerate().map(|(k, s)| (s.as_str(), k)).collect();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::parse(path, 1, e.to_string()))?;
    let header = rdr.headers().map_err(|e| CliError::parse(path, 1, e.to_string()))?.clone();
    let col = |name: &str| header.iter().position(|h| h == name).ok_or_else(|| CliError::schema(path, name));
    let (ci, cs) = (col("site_id")?, col("selected")?);
    let mut sel = vec![false; site_ids.len()];
    let mut seen = vec![false; site_ids.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::parse(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let i = *index
            .get(&rec[ci])
            .ok_or_else(|| CliError::parse(path, line, format!("unknown site_id '{}'", &rec[ci])))?;
        sel[i] = match &rec[cs] {
            "1" => true,
            "0" => false,
            other => return Err(CliError::parse(path, line, format!("column 'selected': '{other}' is not 0 or 1"))),
        };
        seen[i] = true;
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(CliError::Config(format!("{}: no row for site '{}'", path.display(), site_ids[i])));
    }
    Ok(sel)
}

fn validate(a: &ValidateArgs, out: &Path) -> CliResult<Value> {
    let mut cfg = RunConfig::new("validate");
    cfg.input("instance", &a.instance);
    if let Some(s) = &a.solution {
        cfg.input("solution", s);
    }
    cfg.radius = a.radius;
    cfg.check()?;
    let b = load_bundle(&a.instance)?;
    let inst = checked(b.instance_at(a.radius.unwrap_or(b.radius), None))?;
    let mut summary = json!({
        "valid": true,
        "sites": inst.site_count,
        "interests": inst.interest_count,
    });
    if let Some(path) = &a.solution {
        let sel = read_selection(path, &b.site_ids)?;
        let sol = chargeplan::score_solution(&inst, &sel);
        if !is_feasible(&inst, &sel) {
            return Err(chargeplan::Error::Infeasible(format!(
                "{}: selection costs {} cents against a budget of {} or leaves locations uncovered",
                path.display(),
                cents(sol.total_cost),
                b.budget_cents
            ))
            .into());
        }
        summary["solution_feasible"] = json!(true);
        summary["demand"] = json!(sol.total_demand);
        summary["cost_cents"] = json!(cents(sol.total_cost));
    }
    let mut o = Output::create(out)?;
    o.json("validation.json", &summary)?;
    o.finish(&cfg, summary)
}

struct Loaded {
    sites: Vec<ingest::SiteRow>,
    demand: Option<DemandTable>,
    pois: Vec<ingest::PoiRow>,
    junctions: Vec<ingest::Junction>,
}

fn data_config(cfg: &mut RunConfig, d: &DataFiles) -> CliResult<Vec<usize>> {
    cfg.input("sites", &d.sites);
    for (role, p) in [("demand", &d.demand), ("poi", &d.poi), ("traffic", &d.traffic)] {
        if let Some(p) = p {
            cfg.input(role, p);
        }
    }
    let hours = match &d.hours {
        Some(spec) => ingest::parse_hours(spec)?,
        None => (0..HOURS).collect(),
    };
    cfg.extra("hours", &hours);
    Ok(hours)
}

fn load(d: &DataFiles, hours: &[usize]) -> CliResult<Loaded> {
    Ok(Loaded {
        sites: ingest::read_sites(&d.sites)?,
        demand: d.demand.as_deref().map(|p| ingest::read_demand(p, hours)).transpose()?,
        pois: d.poi.as_deref().map(ingest::read_pois).transpose()?.unwrap_or_default(),
        junctions: d.traffic.as_deref().map(ingest::read_junctions).transpose()?.unwrap_or_default(),
    })
}

fn queue_config(cfg: &mut RunConfig, q: &QueueArgs) -> QueueParams {
    cfg.sla_minutes = Some(q.sla_minutes);
    cfg.power_kw = Some(q.power_kw);
    cfg.energy_per_session = Some(q.energy_per_session);
    QueueParams {
        sla_minutes: q.sla_minutes,
        power_kw: q.power_kw,
        energy_per_session: q.energy_per_session,
    }
}

fn warn_missing_demand(data: &Loaded) {
    let missing = match &data.demand {
        Some(d) => data.sites.iter().filter(|s| !d.rows.contains_key(&s.id)).count(),
        None => data.sites.len(),
    };
    if missing > 0 {
        log::warn!("{missing} site(s) have no demand row; their demand is 0");
    }
}

fn ingest(a: &IngestArgs, out: &Path) -> CliResult<Value> {
    let mut cfg = RunConfig::new("ingest");
    let hours = data_config(&mut cfg, &a.data)?;
    if let Some(p) = &a.distances {
        cfg.input("distances", p);
    }
    let q = queue_config(&mut cfg, &a.queue);
    cfg.budget = Some(a.budget);
    cfg.radius = Some(a.radius);
    cfg.check()?;

    let data = load(&a.data, &hours)?;
    warn_missing_demand(&data);
    // Traffic junctions are the locations of interest when given, else the
    // candidate sites themselves.
    let interests: Vec<(String, f64, f64)> = if data.junctions.is_empty() {
        data.sites.iter().map(|s| (s.id.clone(), s.lat, s.lon)).collect()
    } else {
        data.junctions.iter().map(|j| (j.id.clone(), j.lat, j.lon)).collect()
    };
    let distances = ingest::distance_table(&interests, &data.sites, a.distances.as_deref())?;
    let costs = pipeline::site_costs(&data.sites, data.demand.as_ref(), &data.pois, q)?;
    let bundle = InstanceBundle {
        site_ids: data.sites.iter().map(|s| s.id.clone()).collect(),
        interest_ids: interests.into_iter().map(|(id, _, _)| id).collect(),
        demand: data
            .sites
            .iter()
            .map(|s| data.demand.as_ref().and_then(|d| d.total(&s.id)).unwrap_or(0.0))
            .collect(),
        cost_cents: costs.iter().map(|c| cents(c.cost_cents)).collect(),
        slots: costs.iter().map(|c| c.slots).collect(),
        budget_cents: cents(dollars_to_cents(a.budget)),
        radius: a.radius,
        distances,
    };
    bundle.check()?;
    let mut o = Output::create(out)?;
    o.json("instance.json", &bundle)?;
    let summary = json!({
        "sites": bundle.site_ids.len(),
        "interests": bundle.interest_ids.len(),
        "total_cost_cents": bundle.cost_cents.iter().sum::<i64>(),
        "budget_cents": bundle.budget_cents,
    });
    o.finish(&cfg, summary)
}

fn cost(a: &CostArgs, out: &Path) -> CliResult<Value> {
    let mut cfg = RunConfig::new("cost");
    let hours = data_config(&mut cfg, &a.data)?;
    let q = queue_config(&mut cfg, &a.queue);
    cfg.check()?;
    let data = load(&a.data, &hours)?;
    warn_missing_demand(&data);
    let costs = pipeline::site_costs(&data.sites, data.demand.as_ref(), &data.pois, q)?;
    let rows: Vec<Vec<String>> = data
        .sites
        .iter()
        .zip(&costs)
        .map(|(s, c)| {
            vec![
                s.id.clone(),
                fmt_f64(c.peak_kwh),
                fmt_f64(c.arrival_rate),
                c.slots.to_string(),
                cents(c.land_cents).to_string(),
                cents(c.cost_cents).to_string(),
            ]
        })
        .collect();
    let mut o = Output::create(out)?;
    o.csv(
        "costs.csv",
        &["site_id", "peak_kwh", "arrival_rate", "slots", "land_cents", "cost_cents"],
        &rows,
    )?;
    let summary = json!({
        "sites": costs.len(),
        "total_slots": costs.iter().map(|c| u64::from(c.slots)).sum::<u64>(),
        "total_cost_cents": costs.iter().map(|c| cents(c.cost_cents)).sum::<i64>(),
    });
    o.finish(&cfg, summary)
}

fn model_kind(m: Model) -> ModelKind {
    match m {
        Model::Mdr => ModelKind::Mdr,
        Model::ConcatLr => ModelKind::ConcatLr,
        Model::Uniform => ModelKind::UniformEnsemble,
    }
}

fn rows_of(m: &DMatrix<f64>, range: std::ops::Range<usize>) -> DMatrix<f64> {
    m.rows(range.start, range.len()).into_owned()
}

fn predict(a: &PredictArgs, out: &Path) -> CliResult<Value> {
    let mut cfg = RunConfig::new("predict");
    let hours = data_config(&mut cfg, &a.data)?;
    cfg.extra("k", a.k)
        .extra("poi_radius", a.poi_radius)
        .extra("model", model_kind(a.model).as_str())
        .extra("components", a.components)
        .extra("loocv", a.loocv);
    cfg.check()?;
    if a.k == 0 {
        return Err(CliError::Config("--k must be at least 1".into()));
    }
    if a.data.demand.is_none() {
        return Err(CliError::Config("predict needs --demand with observed sites".into()));
    }
    let data = load(&a.data, &hours)?;
    let demand = data.demand.as_ref().expect("checked above");
    let train: Vec<&ingest::SiteRow> = data.sites.iter().filter(|s| demand.rows.contains_key(&s.id)).collect();
    let target: Vec<&ingest::SiteRow> = data.sites.iter().filter(|s| !demand.rows.contains_key(&s.id)).collect();
    let unknown = demand.rows.keys().filter(|id| !data.sites.iter().any(|s| &s.id == *id)).count();
    if unknown > 0 {
        log::warn!("{unknown} demand row(s) refer to unknown sites and are ignored");
    }
    let totals: Vec<(&ingest::SiteRow, f64)> = train.iter().map(|s| (*s, demand.total(&s.id).unwrap_or(0.0))).collect();
    let all: Vec<&ingest::SiteRow> = train.iter().chain(&target).copied().collect();
    let views = pipeline::build_views(&all, &data.pois, a.poi_radius, &data.junctions, &totals, a.k)?;
    let n = train.len();
    let xs_train: Vec<DMatrix<f64>> = views.matrices.iter().map(|m| rows_of(m, 0..n)).collect();
    let xs_target: Vec<DMatrix<f64>> = views.matrices.iter().map(|m| rows_of(m, n..all.len())).collect();
    let y = DMatrix::from_fn(n, hours.len(), |r, c| demand.rows[&train[r].id][c]);

    let kind = model_kind(a.model);
    let mut summary = json!({
        "train_sites": n,
        "predicted_sites": target.len(),
        "views": views.names,
        "model": kind.as_str(),
    });
    let mut header = vec!["site_id".to_string()];
    header.extend(hours.iter().map(|&h| hour_column(h)));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::new();
    if !target.is_empty() {
        let pred = fit_predict(kind, &xs_train, &y, &xs_target, a.components)?;
        for (r, s) in target.iter().enumerate() {
            let mut row = vec![s.id.clone()];
            // Demand is non-negative; linear predictions can dip below zero.
            row.extend(pred.row(r).iter().map(|v| fmt_f64(v.max(0.0))));
            rows.push(row);
        }
    } else {
        log::warn!("every site has observed demand; nothing to predict");
    }
    if kind == ModelKind::Mdr {
        let m = fit_mdr(&xs_train, &y, a.components)?;
        let w: serde_json::Map<String, Value> =
            views.names.iter().zip(&m.weights).map(|(n, w)| (n.to_string(), json!(w))).collect();
        summary["weights"] = Value::Object(w);
    }
    let mut o = Output::create(out)?;
    o.csv("predictions.csv", &header, &rows)?;
    if a.loocv {
        let mut lrows = Vec::new();
        let mut means = serde_json::Map::new();
        for kind in ModelKind::ALL {
            let rep = loocv_rmse(&xs_train, &y, kind, a.components)?;
            let mut row = vec![kind.as_str().to_string(), fmt_f64(rep.mean)];
            row.extend(rep.per_column.iter().map(|v| fmt_f64(*v)));
            means.insert(kind.as_str().to_string(), json!(rep.mean));
            lrows.push(row);
        }
        let mut lh = vec!["model".to_string(), "mean_rmse".to_string()];
        lh.extend(hours.iter().map(|&h| hour_column(h)));
        let lh: Vec<&str> = lh.iter().map(String::as_str).collect();
        o.csv("loocv.csv", &lh, &lrows)?;
        summary["loocv_rmse"] = Value::Object(means);
    }
    o.finish(&cfg, summary)
}

fn solve(a: &SolveArgs, out: &Path) -> CliResult<Value> {
    let mut cfg = RunConfig::new("solve");
    cfg.input("instance", &a.instance);
    cfg.solver = Some(a.solver.to_string());
    cfg.budget = a.budget;
    cfg.radius = a.radius;
    cfg.check()?;
    let b = load_bundle(&a.instance)?;
    let radius = a.radius.unwrap_or(b.radius);
    let inst = checked(b.instance_at(radius, a.budget.map(dollars_to_cents)))?;
    let mut summary = json!({ "solver": a.solver.as_str() });
    let sol = if a.solver == SolverKind::Ipac {
        let run = ipac_solve(&inst)?;
        summary["iterations"] = json!(run.trace.len());
        summary["cover_fallback"] = json!(run.used_cover_fallback);
        run.solution
    } else {
        a.solver.solve(&inst)?
    };
    if !is_feasible(&inst, &sol.selected) {
        return Err(CliError::Internal(format!("{} returned an infeasible selection", a.solver)));
    }
    summary["feasible"] = json!(true);
    summary["demand"] = json!(sol.total_demand);
    summary["cost_cents"] = json!(cents(sol.total_cost));
    summary["budget_cents"] = json!(cents(inst.budget));
    summary["radius"] = json!(radius);
    summary["selected"] = json!(sol.selected_count());
    let mut o = Output::create(out)?;
    o.csv("solution.csv", &SOLUTION_HEADER, &solution_rows(&b, &sol))?;
    o.finish(&cfg, summary)
}

fn sweep_cmd(a: &SweepArgs, out: &Path) -> CliResult<Value> {
    let mut cfg = RunConfig::new("sweep");
    cfg.input("instance", &a.instance);
    cfg.alpha = Some(a.alpha);
    cfg.radius_grid = a.radii.clone();
    cfg.solver = Some(a.solver.to_string());
    cfg.extra("isotonic", a.isotonic);
    cfg.check()?;
    let b = load_bundle(&a.instance)?;
    checked(b.instance(None))?;
    let family = RadiusFamily::new(b.demand.clone(), b.cost(), b.budget_cents as f64, b.distances.clone());
    let radii = match &a.radii {
        Some(r) => r.clone(),
        None => radius_candidates(&b.distances)?.radii,
    };
    let res = sweep(&family, &radii, a.alpha, &a.solver, SweepOptions { isotonic: a.isotonic })?;
    let rows: Vec<Vec<String>> = res
        .records
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.radius),
                fmt_f64(r.demand_star),
                r.objective.map_or(String::new(), fmt_f64),
                flag(r.feasible),
            ]
        })
        .collect();
    let mut o = Output::create(out)?;
    o.csv("sweep.csv", &["radius", "demand_star", "objective", "feasible"], &rows)?;
    let mut summary = json!({
        "radii": res.records.len(),
        "feasible": res.records.iter().filter(|r| r.feasible).count(),
        "r_min": res.r_min,
        "r_max": res.r_max,
        "best_radius": res.best_radius,
    });
    if let Some(best) = res.best() {
        summary["best_objective"] = json!(best.objective);
        summary["best_demand"] = json!(best.demand_star);
        if let Some(sol) = &best.solution {
            o.csv("solution.csv", &SOLUTION_HEADER, &solution_rows(&b, sol))?;
        }
    }
    o.finish(&cfg, summary)
}

fn join(ids: impl Iterator<Item = usize>) -> String {
    ids.map(|i| i.to_string()).collect::<Vec<_>>().join(";")
}

fn multi_period(a: &MultiPeriodArgs, out: &Path) -> CliResult<Value> {
    let mut cfg = RunConfig::new("multi-period");
    cfg.input("instance", &a.instance);
    cfg.solver = Some(a.solver.to_string());
    cfg.check()?;
    let mp: MultiPeriodInstance = read_json(&a.instance)?;
    cfg.alpha = Some(mp.alpha);
    let schedule = multi_period_solve(&mp, &a.solver)?;
    let violations = validate_schedule(&mp, &schedule);
    if !violations.is_empty() {
        return Err(CliError::Internal(format!("schedule fails validation: {violations:?}")));
    }
    let rows: Vec<Vec<String>> = schedule
        .plans
        .iter()
        .map(|p| {
            vec![
                p.period.to_string(),
                fmt_f64(p.radius),
                join(p.installed.iter().map(|s| s.0)),
                join(p.expanded.iter().copied()),
                cents(p.available).to_string(),
                cents(p.spend).to_string(),
                cents(p.carry_out).to_string(),
                fmt_f64(p.served_demand),
            ]
        })
        .collect();
    let mut o = Output::create(out)?;
    o.csv(
        "schedule.csv",
        &["period", "radius", "installed", "expanded", "available_cents", "spend_cents", "carry_out_cents", "served_demand"],
        &rows,
    )?;
    let last = schedule.plans.last().expect("at least one period");
    let summary = json!({
        "periods": schedule.plans.len(),
        "installed": schedule.selections.last().map_or(0, |s| s.iter().filter(|&&x| x).count()),
        "spend_cents": schedule.plans.iter().map(|p| cents(p.spend)).sum::<i64>(),
        "served_demand": last.served_demand,
    });
    o.finish(&cfg, summary)
}

fn subsidy(a: &SubsidyArgs, out: &Path) -> CliResult<Value> {
    let mut cfg = RunConfig::new("subsidy");
    cfg.input("instance", &a.instance);
    cfg.solver = Some(if a.exact { "oracle" } else { "ipac" }.to_string());
    cfg.check()?;
    let s: SubsidyInstance = read_json(&a.instance)?;
    s.validate()?;
    let o = if a.exact { exact_subsidy(&s)? } else { subsidy_solve(&s)? };
    let violations = validate_outcome(&s, &o);
    if !violations.is_empty() {
        return Err(CliError::Internal(format!("outcome fails validation: {violations:?}")));
    }
    let paid_at = |i: usize, j: usize| -> f64 {
        if j == GOVERNMENT {
            s.base.cost[i]
        } else {
            s.providers[j - 1].bids.iter().find(|b| b.site.0 == i).map_or(f64::NAN, |b| b.subsidy)
        }
    };
    let rows: Vec<Vec<String>> = (0..s.base.site_count)
        .map(|i| {
            let w = o.winners[i];
            vec![
                i.to_string(),
                flag(w.is_some()),
                w.map_or(String::new(), |j| j.to_string()),
                String::new(),
                cents(w.map_or(s.base.cost[i], |j| paid_at(i, j))).to_string(),
                fmt_f64(s.base.demand[i]),
            ]
        })
        .collect();
    let budgets: Vec<f64> = std::iter::once(s.base.budget).chain(s.providers.iter().map(|p| p.budget)).collect();
    let prow: Vec<Vec<String>> = budgets
        .iter()
        .zip(&o.participant_spend)
        .enumerate()
        .map(|(j, (b, sp))| {
            vec![
                j.to_string(),
                cents(*b).to_string(),
                cents(*sp).to_string(),
                o.winners.iter().filter(|w| **w == Some(j)).count().to_string(),
            ]
        })
        .collect();
    let mut out = Output::create(out)?;
    out.csv("solution.csv", &SOLUTION_HEADER, &rows)?;
    out.csv("participants.csv", &["participant", "budget_cents", "spend_cents", "sites"], &prow)?;
    let summary = json!({
        "demand": o.total_demand,
        "subsidy_paid_cents": cents(o.subsidy_paid),
        "selected": o.winners.iter().filter(|w| w.is_some()).count(),
        "provider_sites": o.winners.iter().filter(|w| matches!(w, Some(j) if *j != GOVERNMENT)).count(),
    });
    out.finish(&cfg, summary)
}

fn gen(a: &GenArgs, out: &Path) -> CliResult<Value> {
    let mut cfg = RunConfig::new("gen");
    cfg.seed = Some(a.seed);
    cfg.radius = Some(a.radius);
    cfg.noise_sigma = Some(vec![a.noise_sigma]);
    cfg.extra("kind", format!("{:?}", a.kind).to_lowercase())
        .extra("sites", a.sites)
        .extra("interests", a.interests)
        .extra("interests_at_sites", a.interests_at_sites)
        .extra("extent", a.extent)
        .extra("budget_fraction", a.budget_fraction)
        .extra("costs", format!("{:?}", a.costs).to_lowercase());
    match a.kind {
        GenKind::MultiPeriod => cfg.extra("periods", a.periods),
        GenKind::Subsidy => cfg.extra("providers", a.providers),
        GenKind::Mpc => &mut cfg,
    };
    cfg.check()?;
    let mut o = Output::create(out)?;
    let summary = match a.kind {
        GenKind::Mpc => {
            let b = synth::mpc(a)?;
            o.json("instance.json", &b)?;
            json!({ "file": "instance.json", "sites": b.site_ids.len(), "interests": b.interest_ids.len(), "budget_cents": b.budget_cents })
        }
        GenKind::MultiPeriod => {
            let mp = synth::multi_period(a)?;
            o.json("multi_period.json", &mp)?;
            json!({ "file": "multi_period.json", "periods": mp.periods.len() })
        }
        GenKind::Subsidy => {
            let s = synth::subsidy(a)?;
            o.json("subsidy.json", &s)?;
            json!({ "file": "subsidy.json", "sites": s.base.site_count, "providers": s.providers.len() })
        }
    };
    o.finish(&cfg, summary)
}
