use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown group `{0}`")]
    UnknownGroup(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("basis matrices are linearly dependent")]
    SingularGram,
    #[error("basis is not closed under the commutator")]
    NotClosed,
    #[error("bilinear form is not symmetric and ad-invariant")]
    FormNotInvariant,
    #[error("matrix is not in the group (residual {0:e})")]
    NotInGroup(f64),
    #[error("path is not quasi-periodic (residual {0:e})")]
    NotQuasiPeriodic(f64),
    #[error("non-finite value encountered")]
    NonFinite,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("oracle could not decide: {0}")]
    OracleAbort(String),
}

pub type Result<T> = std::result::Result<T, Error>;
