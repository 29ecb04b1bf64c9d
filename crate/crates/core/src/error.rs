use thiserror::Error;

/// Errors produced by the geometry, potential, localization and spectral layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("direction lies in the subspace; its quotient direction is undefined")]
    UndefinedQuotientDirection,

    #[error("function domain is a point; radial limits need a direction")]
    DomainIsPoint,

    #[error("direction budget {budget} is below the {required} required stratum representatives")]
    InsufficientBudget { required: usize, budget: usize },

    #[error("invalid dispersion: {0}")]
    InvalidDispersion(String),

    #[error(
        "Lanczos did not converge after {iterations} matrix-vector products \
         (best Ritz value {energy}, residual {residual:e})"
    )]
    ConvergenceFailure {
        energy: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("spectral-edge oracle failed: {0}")]
    OracleFailure(String),

    #[error("radius {radius} must be below half the box half-length ({limit})")]
    RadiusTooLarge { radius: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
