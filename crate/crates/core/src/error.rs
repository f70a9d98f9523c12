use std::path::PathBuf;

use thiserror::Error;

use crate::model::{TaskId, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("scenario is infeasible: {0}")]
    Infeasible(String),

    #[error("task {task} cannot be scheduled: {reason}")]
    InfeasibleTask { task: TaskId, reason: String },

    #[error("search limits exceeded: {0}")]
    LimitsExceeded(String),

    #[error("no schedule completes within {max_rotations} rotation(s)")]
    NoScheduleWithinRotations { max_rotations: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("{}", format_violations(.0))]
    Validation(Vec<Violation>),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors that mean "no feasible schedule", as opposed to bad input.
    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self,
            Error::Infeasible(_)
                | Error::InfeasibleTask { .. }
                | Error::NoScheduleWithinRotations { .. }
        )
    }
}

fn format_violations(violations: &[Violation]) -> String {
    let mut out = format!("scenario has {} violation(s)", violations.len());
    for v in violations {
        out.push_str("\n  - ");
        out.push_str(&v.to_string());
    }
    out
}
