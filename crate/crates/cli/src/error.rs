use std::path::Path;

use serde_json::json;
use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: u64,
        message: String,
    },

    #[error("{file}: missing column '{column}'")]
    Schema { file: String, column: String },

    #[error("{0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },

    #[error("{0}")]
    Internal(String),

    #[error(transparent)]
    Core(#[from] chargeplan::Error),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNEXPECTED: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

impl CliError {
    pub fn parse(file: &Path, line: u64, message: impl Into<String>) -> Self {
        CliError::Parse {
            file: file.display().to_string(),
            line,
            message: message.into(),
        }
    }

    pub fn schema(file: &Path, column: &str) -> Self {
        CliError::Schema {
            file: file.display().to_string(),
            column: column.to_string(),
        }
    }

    pub fn read(path: &Path, source: std::io::Error) -> Self {
        CliError::Read {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn write(path: &Path, source: std::io::Error) -> Self {
        CliError::Write {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use chargeplan::Error as E;
        match self {
            CliError::Core(
                E::Infeasible(_)
                | E::PeriodInfeasible { .. }
                | E::UncoverableUniverse { .. }
                | E::UnreachableDemand { .. },
            ) => EXIT_INFEASIBLE,
            CliError::Write { .. } | CliError::Internal(_) => EXIT_UNEXPECTED,
            _ => EXIT_INPUT,
        }
    }

    pub fn kind(&self) -> &'static str {
        use chargeplan::Error as E;
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Schema { .. } => "schema",
            CliError::Config(_) => "config",
            CliError::Read { .. } => "read",
            CliError::Write { .. } => "write",
            CliError::Internal(_) => "internal",
            CliError::Core(e) => match e {
                E::InvalidInstance(_) => "invalid_instance",
                E::Infeasible(_) => "infeasible",
                E::UncoverableUniverse { .. } => "uncoverable_universe",
                E::UnreachableDemand { .. } => "unreachable_demand",
                E::UnstableQueue { .. } => "unstable_queue",
                E::TooLarge { .. } => "too_large",
                E::DegenerateData(_) => "degenerate_data",
                E::RadiusOutOfRange { .. } => "radius_out_of_range",
                E::PeriodInfeasible { .. } => "period_infeasible",
                E::InvalidInput(_) => "invalid_input",
            },
        }
    }

    /// Machine-readable form written to stderr on failure.
    pub fn to_json(&self) -> serde_json::Value {
        let mut body = json!({
            "kind": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        match self {
            CliError::Parse { file, line, .. } => {
                body["file"] = json!(file);
                body["line"] = json!(line);
            }
            CliError::Schema { file, column } => {
                body["file"] = json!(file);
                body["column"] = json!(column);
            }
            CliError::Read { path, .. } | CliError::Write { path, .. } => {
                body["file"] = json!(path);
            }
            CliError::Core(chargeplan::Error::PeriodInfeasible { period }) => {
                body["period"] = json!(period);
            }
            _ => {}
        }
        json!({ "error": body })
    }
}
