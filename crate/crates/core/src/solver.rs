use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MpcInstance, Solution};
use crate::{ipac, oracle};

/// Anything that produces a feasible selection for an instance, or
/// [`Error::Infeasible`] when it cannot find one.
pub trait MpcSolver {
    fn solve(&self, inst: &MpcInstance) -> Result<Solution>;
}

impl<S: MpcSolver + ?Sized> MpcSolver for &S {
    fn solve(&self, inst: &MpcInstance) -> Result<Solution> {
        (**self).solve(inst)
    }
}

/// Built-in solvers.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    #[default]
    Ipac,
    Naive,
    Oracle,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::Ipac, SolverKind::Naive, SolverKind::Oracle];

    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Ipac => "ipac",
            SolverKind::Naive => "naive",
            SolverKind::Oracle => "oracle",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ipac" => Ok(SolverKind::Ipac),
            "naive" => Ok(SolverKind::Naive),
            "oracle" | "exact" => Ok(SolverKind::Oracle),
            other => Err(Error::InvalidInput(format!("unknown solver '{other}'"))),
        }
    }
}

impl MpcSolver for SolverKind {
    fn solve(&self, inst: &MpcInstance) -> Result<Solution> {
        match self {
            SolverKind::Ipac => ipac::ipac_solve(inst).map(|run| run.solution),
            SolverKind::Naive => ipac::naive_solve(inst),
            SolverKind::Oracle => oracle::exact_mpc(inst),
        }
    }
}
