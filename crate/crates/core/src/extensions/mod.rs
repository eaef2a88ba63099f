//! Multi-period deployment and subsidy allocation built on the pack-and-cover
//! heuristic.

pub mod multiperiod;
pub mod subsidy;

pub use multiperiod::{
    multi_period_solve, validate_schedule, DeploymentSchedule, Expansion, MultiPeriodInstance,
    Period, PeriodPlan, ScheduleViolation,
};
pub use subsidy::{
    subsidy_solve, subsidy_solve_with, validate_outcome, Bid, GreedyMultiKnapsack, MultiPacker,
    OutcomeViolation, Provider, SubsidyInstance, SubsidyOutcome, GOVERNMENT,
};
