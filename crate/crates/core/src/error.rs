use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Twice the total spin must be a positive integer.
    #[error("invalid spin: 2j = {0} (must be >= 1)")]
    InvalidSpin(u32),

    #[error("qubit count {n} out of range (allowed 1..={max})")]
    QubitCount { n: usize, max: usize },

    #[error("qubit index {index} out of range for {n} qubits")]
    QubitIndex { index: usize, n: usize },

    #[error("state outside symmetric subspace")]
    OutsideSymmetricSubspace,

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("trace {0} differs from 1")]
    Trace(f64),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("vector is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("unexpected basis: {0}")]
    Basis(String),

    #[error("tomographically incomplete")]
    TomographicallyIncomplete,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A numerical invariant (norm, trace, positivity) drifted past tolerance
    /// during a computation.
    #[error("numerical invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
