use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the numerical routines and data loaders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite integrand value {value} at node x = {node}")]
    NonFinite { node: f64, value: f64 },

    #[error("no convergence by m = {m}: last iterates {last} and {previous}")]
    Convergence { m: usize, last: f64, previous: f64 },

    #[error("step size underflow at s = {s} (h = {h:e})")]
    Stiffness { s: f64, h: f64 },

    #[error("requested accuracy not met at s = {s}: {reason}")]
    Accuracy { s: f64, reason: String },

    #[error("{0} outside the supported domain")]
    Domain(String),

    #[error("eigensolver failed to converge after {iterations} iterations")]
    EigenNonConvergence { iterations: usize },

    #[error("insufficient statistics: {have} samples, need at least {need}")]
    InsufficientStatistics { have: usize, need: usize },

    #[error("{}:{line}: parse error: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("data integrity: line {line}: {msg}")]
    DataIntegrity { line: usize, msg: String },

    #[error("fit error: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
