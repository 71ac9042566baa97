//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by operator validation, simulation, and the learning
/// algorithms.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("dimension {dim} exceeds the exact-simulation cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("matrix is not Hermitian (max deviation {max_dev:e})")]
    NotHermitian { max_dev: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPositiveSemidefinite { min_eig: f64 },

    #[error("trace deviates from 1 by {dev:e}")]
    TraceNotUnit { dev: f64 },

    #[error("operator is not idempotent (max |P^2 - P| entry {max_dev:e})")]
    NotIdempotent { max_dev: f64 },

    #[error("rank {rank} out of range for dimension {dim}")]
    RankOutOfRange { rank: usize, dim: usize },

    #[error("trace form left the unit interval by {excess:e}")]
    ExpectationOutOfRange { excess: f64 },

    #[error("empty input: {what}")]
    EmptyInput { what: &'static str },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("value out of range for `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("state at index {index} was already consumed: a single copy admits one measurement")]
    AlreadyConsumed { index: usize },

    #[error("population too small: need {needed} indices, have {available}")]
    InsufficientPopulation { needed: usize, available: usize },

    #[error("not enough unconsumed factors: need {needed}, have {available}")]
    InsufficientUnconsumed { needed: usize, available: usize },

    #[error("hypothesis list is empty")]
    EmptyHypotheses,

    #[error("threshold-search precondition violated: (ln m + C2)^2 = {lhs:.4} >= C1 n eps^2 = {rhs:.4}")]
    PreconditionViolated { lhs: f64, rhs: f64 },

    #[error("product sample exhausted after {pairs_used} block pairs")]
    SampleExhausted { pairs_used: usize },

    #[error("scenario does not match the bound kind: {reason}")]
    ScenarioMismatch { reason: String },

    #[error("relative entropy diverges: state support leaks outside the reference support")]
    InfiniteDivergence,
}

pub type Result<T> = std::result::Result<T, Error>;
