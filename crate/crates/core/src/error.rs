use std::path::PathBuf;

use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse instance: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid instance: {}", join_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("time index {omega} is already in the schedule")]
    AlreadyScheduled { omega: usize },

    #[error("operation requires a deterministic initial state, instance has a covariance")]
    UnsupportedInit,

    #[error("enumeration guard exceeded: {0}")]
    Guard(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("monotonicity violated: gain {gain:e} for time index {omega}")]
    Monotonicity { omega: usize, gain: f64 },
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_)
            | Error::Invalid(_)
            | Error::Schedule(_)
            | Error::Dimension(_)
            | Error::AlreadyScheduled { .. }
            | Error::UnsupportedInit
            | Error::Guard(_)
            | Error::Config(_) => 1,
            Error::Io { .. } | Error::Csv(_) => 2,
            Error::NonFinite(_) | Error::Monotonicity { .. } => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
