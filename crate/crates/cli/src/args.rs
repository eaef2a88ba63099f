use std::path::PathBuf;

use chargeplan::SolverKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "chargeplan", version, about = "Plan charging-station placement under a budget and a reachability radius")]
pub struct Cli {
    /// Directory for artifacts.
    #[arg(long, global = true, env = "CHARGEPLAN_OUT_DIR", default_value = "out")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check an instance bundle and, optionally, a solution against it.
    Validate(ValidateArgs),
    /// Build an instance bundle from raw CSV files.
    Ingest(IngestArgs),
    /// Size and price every candidate site.
    Cost(CostArgs),
    /// Predict hourly demand for sites without observations.
    Predict(PredictArgs),
    /// Solve a single-period instance.
    Solve(SolveArgs),
    /// Solve across reachability radii and score the trade-off.
    Sweep(SweepArgs),
    /// Plan an incremental deployment over several periods.
    MultiPeriod(MultiPeriodArgs),
    /// Allocate sites among the government and subsidised providers.
    Subsidy(SubsidyArgs),
    /// Run a generated experiment suite.
    Experiment(ExperimentArgs),
    /// Generate a seeded synthetic instance.
    Gen(GenArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DataFiles {
    /// sites.csv: site_id, lat, lon.
    #[arg(long)]
    pub sites: PathBuf,
    /// demand.csv: site_id, h00..h23 (kWh).
    #[arg(long)]
    pub demand: Option<PathBuf>,
    /// poi.csv: poi_id, category, lat, lon.
    #[arg(long)]
    pub poi: Option<PathBuf>,
    /// traffic.csv: junction_id, lat, lon, density.
    #[arg(long)]
    pub traffic: Option<PathBuf>,
    /// Only use these hours, e.g. `7-9,17-19`.
    #[arg(long)]
    pub hours: Option<String>,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct QueueArgs {
    /// Maximum expected wait before charging starts.
    #[arg(long, default_value_t = 5.0)]
    pub sla_minutes: f64,
    /// Charging power per slot.
    #[arg(long, default_value_t = 7.0)]
    pub power_kw: f64,
    /// Energy delivered per session, kWh.
    #[arg(long, default_value_t = 20.0)]
    pub energy_per_session: f64,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// solution.csv to re-check against the instance.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// Check at this radius instead of the bundle's, km.
    #[arg(long)]
    pub radius: Option<f64>,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[command(flatten)]
    pub data: DataFiles,
    /// distances.csv: interest_id, site_id, km. Missing pairs use haversine.
    #[arg(long)]
    pub distances: Option<PathBuf>,
    #[command(flatten)]
    pub queue: QueueArgs,
    /// Budget in dollars.
    #[arg(long)]
    pub budget: f64,
    /// Reachability radius, km.
    #[arg(long)]
    pub radius: f64,
}

#[derive(Args, Debug)]
pub struct CostArgs {
    #[command(flatten)]
    pub data: DataFiles,
    #[command(flatten)]
    pub queue: QueueArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Mdr,
    ConcatLr,
    Uniform,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[command(flatten)]
    pub data: DataFiles,
    /// Neighbouring junctions and sites per view.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// PoIs within this many km are counted.
    #[arg(long, default_value_t = 0.5)]
    pub poi_radius: f64,
    #[arg(long, value_enum, default_value_t = Model::Mdr)]
    pub model: Model,
    /// Canonical components per regression.
    #[arg(long)]
    pub components: Option<usize>,
    /// Also report leave-one-out RMSE of every model family.
    #[arg(long)]
    pub loocv: bool,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value = "ipac")]
    pub solver: SolverKind,
    /// Override the bundle budget, dollars.
    #[arg(long)]
    pub budget: Option<f64>,
    /// Override the bundle radius, km.
    #[arg(long)]
    pub radius: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Weight of demand against radius.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Radii to evaluate; defaults to every distinct feasible-coverage radius.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long, default_value = "ipac")]
    pub solver: SolverKind,
    /// Carry the previous radius's selection forward when it scores higher.
    #[arg(long)]
    pub isotonic: bool,
}

#[derive(Args, Debug)]
pub struct MultiPeriodArgs {
    /// Multi-period instance JSON (money in cents).
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value = "ipac")]
    pub solver: SolverKind,
}

#[derive(Args, Debug)]
pub struct SubsidyArgs {
    /// Subsidy instance JSON (money in cents).
    #[arg(long)]
    pub instance: PathBuf,
    /// Solve exhaustively instead of with the greedy allocation.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Args, Debug, Clone)]
pub struct SuiteArgs {
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
    #[arg(long, default_value_t = 6)]
    pub min_sites: usize,
    #[arg(long, default_value_t = 16)]
    pub max_sites: usize,
    #[arg(long, default_value_t = 8)]
    pub interests: usize,
    #[arg(long, default_value_t = 4.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 0.4)]
    pub budget_fraction: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Include the exhaustive solver (only for up to 20 sites).
    #[arg(long)]
    pub oracle: bool,
    /// Add wall-clock times to the tables; makes them non-reproducible.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    #[command(subcommand)]
    pub kind: Experiment,
}

#[derive(Subcommand, Debug)]
pub enum Experiment {
    /// Every solver on every suite instance.
    Compare(SuiteArgs),
    /// Feasibility and demand as the budget grows.
    BudgetSweep {
        #[command(flatten)]
        suite: SuiteArgs,
        /// Budgets as fractions of the total site cost.
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.8,1.0")]
        fractions: Vec<f64>,
    },
    /// IPAC against the baseline under Gaussian cost noise.
    Noise {
        #[command(flatten)]
        suite: SuiteArgs,
        /// Noise standard deviations, dollars.
        #[arg(long, value_delimiter = ',', default_value = "1000,3000")]
        sigma: Vec<f64>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Mpc,
    MultiPeriod,
    Subsidy,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum CostKind {
    Uniform,
    Pipeline,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value_t = GenKind::Mpc)]
    pub kind: GenKind,
    #[arg(long, default_value_t = 12)]
    pub sites: usize,
    #[arg(long, default_value_t = 8)]
    pub interests: usize,
    /// Put one location of interest on every site.
    #[arg(long)]
    pub interests_at_sites: bool,
    /// Side of the square region, km.
    #[arg(long, default_value_t = 10.0)]
    pub extent: f64,
    #[arg(long, default_value_t = 4.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 0.5)]
    pub budget_fraction: f64,
    #[arg(long, value_enum, default_value_t = CostKind::Uniform)]
    pub costs: CostKind,
    /// Gaussian cost noise, dollars.
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Periods for `--kind multi-period`.
    #[arg(long, default_value_t = 3)]
    pub periods: usize,
    /// Providers for `--kind subsidy`.
    #[arg(long, default_value_t = 2)]
    pub providers: usize,
}
