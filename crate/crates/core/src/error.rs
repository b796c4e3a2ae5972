use thiserror::Error;

/// Errors raised by the numerical kernel, samplers and estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("iteration cap reached after {cap} Poisson points; reduce the number of sites or alpha")]
    IterationCap { cap: u64 },

    #[error("acceptance rate {rate:e} is below 1e-6 after {proposals} proposals")]
    RejectionCap { rate: f64, proposals: u64 },

    #[error("too few exceedances: found {found}, need at least {needed}")]
    TooFewExceedances { found: usize, needed: usize },

    #[error("sample contains no threshold exceedances")]
    EmptySample,

    #[error("threshold too low: V(u) = {0} exceeds 1")]
    ThresholdTooLow(f64),

    #[error("optimizer did not converge within {evals} evaluations")]
    NonConvergence { evals: usize },

    #[error("target {target} is unattainable, must lie in ({lo}, {hi})")]
    Unattainable { target: f64, lo: f64, hi: f64 },

    #[error("degenerate data: {0}")]
    Degenerate(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
