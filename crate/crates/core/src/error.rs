use thiserror::Error;

/// Errors raised by the space, subspace, functional and relation operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SsdbError {
    #[error("pairing matrix is not symmetric (max |P - P^T| = {deviation:e})")]
    NotSymmetric { deviation: f64 },
    #[error("pairing matrix is not involutive (max |P^2 - I| = {deviation:e})")]
    NotInvolutive { deviation: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid dimension {0}: must be positive")]
    InvalidDimension(usize),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("non-finite entry in input")]
    NonFinite,
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error("operands live in different spaces")]
    SpaceMismatch,
    #[error("subspace is not q-positive (min eigenvalue {min_eigenvalue:e})")]
    NotQPositive { min_eigenvalue: f64 },
    #[error("subspace is not q-negative (max eigenvalue {max_eigenvalue:e})")]
    NotQNegative { max_eigenvalue: f64 },
    #[error("q-complement is not q-negative (max eigenvalue {max_eigenvalue:e})")]
    ComplementNotQNegative { max_eigenvalue: f64 },
    #[error("reduced system is singular")]
    SingularSystem,
    #[error("relation is not monotone (min eigenvalue {min_eigenvalue:e})")]
    NotMonotone { min_eigenvalue: f64 },
    #[error("matrix is not monotone (min eigenvalue of symmetric part {min_eigenvalue:e})")]
    NotMonotoneMatrix { min_eigenvalue: f64 },
}

impl SsdbError {
    /// Stable variant name, used in machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            SsdbError::NotSymmetric { .. } => "NotSymmetric",
            SsdbError::NotInvolutive { .. } => "NotInvolutive",
            SsdbError::DimensionMismatch { .. } => "DimensionMismatch",
            SsdbError::InvalidDimension(_) => "InvalidDimension",
            SsdbError::NotSquare { .. } => "NotSquare",
            SsdbError::NonFinite => "NonFinite",
            SsdbError::InvalidTolerance(_) => "InvalidTolerance",
            SsdbError::SpaceMismatch => "SpaceMismatch",
            SsdbError::NotQPositive { .. } => "NotQPositive",
            SsdbError::NotQNegative { .. } => "NotQNegative",
            SsdbError::ComplementNotQNegative { .. } => "ComplementNotQNegative",
            SsdbError::SingularSystem => "SingularSystem",
            SsdbError::NotMonotone { .. } => "NotMonotone",
            SsdbError::NotMonotoneMatrix { .. } => "NotMonotoneMatrix",
        }
    }
}

pub type Result<T> = std::result::Result<T, SsdbError>;
