//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Config document could not be parsed.
    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    /// A calibration key is unknown.
    #[error("unknown key: {0}")]
    UnknownKey(String),

    /// A calibration invariant is violated; names the offending key and bound.
    #[error("{key} must be {bound}")]
    Invariant { key: String, bound: String },

    /// An argument fell outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Steady-state borrower consumption came out non-positive.
    #[error("steady-state borrower consumption non-positive")]
    NonPositiveConsumption,

    /// The rational-expectations system has multiple stable solutions.
    #[error("multiple stable solutions")]
    Indeterminate,

    /// The rational-expectations system has no stable solution.
    #[error("no stable solution")]
    Explosive,

    /// The solver did not converge within its iteration budget.
    #[error("solver did not converge within {iterations} iterations (last residual {residual:.3e})")]
    SolverNoConvergence { iterations: usize, residual: f64 },

    /// A shock name is not in the shock registry.
    #[error("unknown shock: {0}")]
    UnknownShock(String),

    /// A variable name is not in the variable registry.
    #[error("unknown variable: {0}")]
    UnknownVariable(String),

    /// Matrix or path dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The regression design matrix is rank deficient.
    #[error("rank-deficient design: collinear columns {0:?}")]
    CollinearColumns(Vec<String>),

    /// A dataset column is missing or unusable.
    #[error("dataset error: {0}")]
    Dataset(String),

    /// A required series is missing from a path set.
    #[error("missing series for requested loss version: {0}")]
    MissingSeries(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
