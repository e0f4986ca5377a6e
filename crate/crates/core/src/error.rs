use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {0}: need at least {1}")]
    InvalidDimension(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not antisymmetric (max |A + Aᵀ| = {0:e})")]
    NotAntisymmetric(f64),

    #[error("matrix is not orthogonal (max |QᵀQ - I| = {0:e})")]
    NotOrthogonal(f64),

    #[error("non-finite value encountered")]
    NonFinite,

    #[error("empty input")]
    EmptyInput,

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid degree ell = {0}")]
    InvalidDegree(i64),

    #[error("invalid order m = {m} for ell = {ell}")]
    InvalidOrder { ell: usize, m: i64 },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("subspace is not invariant under the permutation (residual {0:e})")]
    InvarianceViolation(f64),

    #[error("unknown radial law '{0}'")]
    UnknownRadialLaw(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
