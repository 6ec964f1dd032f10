use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("operators do not commute (commutator norm {residual:.3e})")]
    Commutation { residual: f64 },
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("polynomial is not symmetric (coefficient defect {0:.3e})")]
    Symmetry(f64),
    #[error("unsupported divisor: {0}")]
    UnsupportedDivisor(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("hypothesis not met: {0}")]
    Hypothesis(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("usage: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
