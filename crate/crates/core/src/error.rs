use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: deviation {deviation:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("eigensolver or variational solver failed to converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("state is singular or below the positivity floor (min eigenvalue {min_eig:.3e})")]
    SingularState { min_eig: f64 },

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("Renyi order alpha={0} is out of range (must be positive)")]
    AlphaOutOfRange(f64),

    #[error("support violation: p has mass on an outcome where q vanishes")]
    SupportViolation,

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("circuit fit failed: achieved delta {achieved:.3e} exceeds cap {cap:.3e}")]
    FitFailed { achieved: f64, cap: f64 },

    #[error("state is not permutation invariant (deviation {0:.3e})")]
    NotPermutationInvariant(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
