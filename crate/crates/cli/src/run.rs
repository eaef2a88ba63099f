//! Run configuration, artifact writing and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Everything that determines a run's artifacts. Echoed into the manifest.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunConfig {
    pub command: String,
    /// Input role to path, as given on the command line.
    pub inputs: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sla_minutes: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_kw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_per_session: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_sigma: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<String>,
    /// Command-specific settings.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, Value>,
}

fn check_range(name: &str, v: Option<f64>, ok: impl Fn(f64) -> bool, want: &str) -> CliResult<()> {
    match v {
        Some(x) if !(x.is_finite() && ok(x)) => {
            Err(CliError::Config(format!("--{name} must be {want}, got {x}")))
        }
        _ => Ok(()),
    }
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        RunConfig {
            command: command.to_string(),
            ..RunConfig::default()
        }
    }

    pub fn input(&mut self, role: &str, path: &Path) -> &mut Self {
        self.inputs.insert(role.to_string(), path.display().to_string());
        self
    }

    pub fn extra(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).expect("config values serialise");
        self.extra.insert(key.to_string(), v);
        self
    }

    /// Checks input files and numeric ranges before any work starts.
    pub fn check(&self) -> CliResult<()> {
        for (role, path) in &self.inputs {
            if !Path::new(path).is_file() {
                return Err(CliError::Config(format!("{role} file '{path}' does not exist")));
            }
        }
        check_range("budget", self.budget, |x| x >= 0.0, "non-negative")?;
        check_range("alpha", self.alpha, |x| (0.0..=1.0).contains(&x), "in [0, 1]")?;
        check_range("radius", self.radius, |x| x >= 0.0, "non-negative")?;
        check_range("sla-minutes", self.sla_minutes, |x| x >= 0.0, "non-negative")?;
        check_range("power-kw", self.power_kw, |x| x > 0.0, "positive")?;
        check_range("energy-per-session", self.energy_per_session, |x| x > 0.0, "positive")?;
        for &r in self.radius_grid.iter().flatten() {
            check_range("radii", Some(r), |x| x >= 0.0, "non-negative")?;
        }
        for &s in self.noise_sigma.iter().flatten() {
            check_range("sigma", Some(s), |x| x >= 0.0, "non-negative")?;
        }
        Ok(())
    }
}

/// Collects artifacts in the output directory and writes the manifest last.
pub struct Output {
    dir: PathBuf,
    artifacts: BTreeMap<String, usize>,
}

impl Output {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            artifacts: BTreeMap::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        let path = self.path(name);
        let werr = |e: csv::Error| CliError::Internal(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(werr)?;
        w.write_record(header).map_err(werr)?;
        for r in rows {
            w.write_record(r).map_err(werr)?;
        }
        w.flush().map_err(|e| CliError::write(&path, e))?;
        self.artifacts.insert(name.to_string(), rows.len());
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> CliResult<()> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Internal(format!("serialising {name}: {e}")))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::write(&path, e))?;
        self.artifacts.insert(name.to_string(), 1);
        Ok(())
    }

    /// Writes `manifest.json` and returns the summary for stdout.
    pub fn finish(mut self, config: &RunConfig, summary: Value) -> CliResult<Value> {
        let manifest = serde_json::json!({
            "tool": "chargeplan",
            "cli_version": env!("CARGO_PKG_VERSION"),
            "core_version": chargeplan::VERSION,
            "config": config,
            "artifacts": self.artifacts,
            "summary": summary,
        });
        self.json("manifest.json", &manifest)?;
        Ok(summary)
    }
}

/// Money as integer cents.
pub fn cents(x: f64) -> i64 {
    x.round() as i64
}

pub fn dollars_to_cents(x: f64) -> f64 {
    (x * 100.0).round()
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(path, e.line() as u64, e.to_string()))
}
