use thiserror::Error;

use crate::model::{InterestId, ValidationReport};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(ValidationReport),

    #[error("no feasible solution found: {0}")]
    Infeasible(String),

    #[error("{} interest point(s) cannot be covered by any candidate", missing.len())]
    UncoverableUniverse { missing: Vec<InterestId> },

    #[error("demand target {target} exceeds total available demand {available}")]
    UnreachableDemand { target: f64, available: f64 },

    #[error("queue with {servers} server(s) is unstable at offered load {load}")]
    UnstableQueue { servers: u32, load: f64 },

    #[error("instance of size {size} exceeds the exhaustive-search limit {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("radius {radius} lies outside [{min}, {max}]")]
    RadiusOutOfRange { radius: f64, min: f64, max: f64 },

    #[error("period {period} cannot satisfy its covering constraints within the cumulative budget")]
    PeriodInfeasible { period: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
