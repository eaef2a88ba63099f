//! Charging-site placement under a budget and a reachability requirement.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the problem instance, cover-set construction and
//!   feasibility accounting.
//! * [`costing`] sizes stations with an M/M/N queue and prices them.
//! * [`subsolvers`] provides greedy knapsack, set-cover, min-knapsack and
//!   multi-dimensional knapsack routines.
//! * [`ipac`] implements the iterative pack-and-cover heuristic and the
//!   cover-then-pack baseline.
//! * [`reachability`] sweeps the reachability radius.
//! * [`extensions`] covers incremental multi-period deployment and
//!   subsidy allocation across providers.
//! * [`demand`] predicts per-site demand from several data views.
//! * [`oracle`] contains exhaustive solvers and a seeded instance generator.

pub mod costing;
pub mod demand;
pub mod error;
pub mod extensions;
pub mod ipac;
pub mod model;
pub mod oracle;
pub mod reachability;
pub mod solver;
pub mod subsolvers;

pub use error::{Error, Result};
pub use model::{
    build_cover_sets, is_feasible, score_solution, validate_instance, DistanceTable, InterestId,
    MpcInstance, SiteId, Solution, ValidationReport, Violation,
};
pub use solver::{MpcSolver, SolverKind};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
