use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("ring size {0} is too small (need at least 4 sites)")]
    RingTooSmall(usize),
    #[error("site index {index} out of range for ring of {size} sites")]
    SiteOutOfRange { index: usize, size: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("no particles left at t = {time}")]
    Extinct { time: f64 },
    #[error("ring size {size} exceeds the exact-enumeration limit of {limit}")]
    SizeGuard { size: usize, limit: usize },
    #[error("generator is reducible; closed classes (by representative state): {classes:?}")]
    Reducible { classes: Vec<Vec<String>> },
    #[error("linear system is singular: {0}")]
    Singular(String),
    #[error("degenerate fit: {0}")]
    Degenerate(String),
    #[error("missing table entry for pattern {0}")]
    MissingPattern(String),
    #[error("invalid pattern {0:?}")]
    InvalidPattern(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("stationary solve did not converge: residual {residual:e} after {iterations} sweeps")]
    NoConvergence { residual: f64, iterations: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
