use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mode index {mode} out of range for {num_modes} modes")]
    InvalidMode { mode: usize, num_modes: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is numerically singular")]
    Singular,

    #[error("state norm is not positive")]
    NonPositiveNorm,

    #[error("conditioning has zero success probability")]
    ZeroSuccessProbability,

    #[error("operation requires zero-mean terms")]
    NonzeroMean,

    #[error("matrix is not symmetric within tolerance")]
    NonSymmetric,

    #[error("Fock-space state not converged: boundary tail mass {tail:.3e}")]
    Unconverged { tail: f64 },

    #[error("phase-space point outside the reliable truncation window")]
    WindowExceeded,

    #[error("no crossing found in the search range")]
    NoCrossing,

    #[error("scheme does not violate the inequality at unit efficiency")]
    NoViolation,
}

pub type Result<T> = std::result::Result<T, Error>;
