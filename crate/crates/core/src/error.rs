use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("constraint set is empty")]
    EmptyConstraintSet,
    #[error("invalid cone: {0}")]
    InvalidCone(String),
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("enumeration limit exceeded: {0}")]
    TooLarge(String),
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
