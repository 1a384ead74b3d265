use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invariant violations: {}", .0.join("; "))]
    InvariantViolation(Vec<String>),
    #[error("out of window: {0}")]
    OutOfWindow(String),
    #[error("non-rational spectrum: irreducible factor {0}")]
    NonRationalSpectrum(String),
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("step limit exceeded after {0} steps")]
    StepLimitExceeded(usize),
    #[error("incompatible algebras: {0}")]
    IncompatibleAlgebras(String),
    #[error("cap {cap} is below the faithful bound {need}")]
    CapTooSmall { cap: i64, need: i64 },
}

pub type Result<T> = std::result::Result<T, Error>;
