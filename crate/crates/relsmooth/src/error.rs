//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A point violates the domain of a reference-function component.
    #[error("domain violation at coordinate {index}: value {value}")]
    Domain { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A scalar lies outside the range of a component gradient.
    #[error("value {value} outside gradient range of component")]
    OutOfRange { value: f64 },

    /// A mirror step has no minimizer inside the open component domain.
    #[error("mirror step leaves the domain at coordinate {index}")]
    StepOutOfDomain { index: usize },

    #[error("certificate error: {0}")]
    Certificate(String),

    #[error("invalid problem data: {0}")]
    Data(String),

    /// Design matrix became numerically singular.
    #[error("matrix numerically singular (condition estimate {cond:.3e})")]
    Singular { cond: f64 },

    #[error("problem defines no stochastic gradient oracle")]
    OracleUnavailable,

    #[error("optimal value unknown for this problem")]
    MissingOptimum,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("iteration did not converge: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
