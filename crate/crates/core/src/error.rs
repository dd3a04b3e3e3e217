//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by distribution handling, estimators, surrogates and
/// benchmark problems.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A distribution descriptor failed validation.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// A sample batch was requested with fewer than two rows.
    #[error("sample size must be at least 2, got {0}")]
    SampleSize(usize),

    /// Dimensions of two inputs do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Two batches that must share a sample size do not.
    #[error("batch sizes must match: {0} vs {1}")]
    BatchSizeMismatch(usize, usize),

    /// A kernel or estimator parameter is outside its valid range.
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// The Nystrom landmark count is outside 1..=m.
    #[error("landmark count {h} must be between 1 and the sample size {m}")]
    LandmarkCount { h: usize, m: usize },

    /// A numeric input contained NaN or infinity.
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    /// A matrix that must be (numerically) positive semi-definite is not,
    /// even after the jitter ladder.
    #[error("matrix is not positive definite (smallest eigenvalue {min_eig:.3e}), jitter up to {max_jitter:.1e} did not help")]
    NotPositiveDefinite { min_eig: f64, max_jitter: f64 },

    /// Pseudo-inversion of a landmark block failed.
    #[error("pseudo-inverse failed: {0}")]
    PseudoInverse(String),

    /// An operation that needs a fitted model was called before `fit`.
    #[error("model has no fitted factorization; call fit first")]
    NotFitted,

    /// An operation received an empty observation set.
    #[error("observation set is empty")]
    EmptyObservations,

    /// A point lies outside the problem domain.
    #[error("point lies outside the domain in coordinate {coord}: {value} not in [{lo}, {hi}]")]
    OutOfDomain {
        coord: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// A Monte Carlo precondition (minimum draw count) was violated.
    #[error("Monte Carlo sample count {got} is below the minimum {min}")]
    McSampleCount { got: usize, min: usize },

    /// Robust regret was requested before the robust optimum was computed.
    #[error("robust optimum has not been precomputed for this problem configuration; run precompute first")]
    MissingPrecompute,

    /// A precomputed quantity is unstable at the configured resolution.
    #[error("precompute unstable: {0}; increase n_mc or grid density")]
    PrecomputeUnstable(String),

    /// A problem asset or configuration document failed to parse.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
