use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {dim} out of range (complex has dims {dims})")]
    Dimension { dim: isize, dims: usize },
    #[error("chain of dimension {found} where dimension {expected} was required")]
    DimensionMismatch { expected: isize, found: isize },
    #[error("malformed facet {0:?}: repeated vertex")]
    MalformedFacet(Vec<String>),
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("enumeration cap exceeded: {found} {what} > cap {cap}; use method heuristic or lp-enum")]
    CapExceeded { what: String, found: usize, cap: usize },
    #[error("enumeration work limit exceeded: {found} candidates > limit {limit}; use method heuristic")]
    WorkLimit { found: u128, limit: u128 },
    #[error("unknown named complex {0:?}")]
    UnknownName(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("infinite cover: H_1 has free rank {0}")]
    InfiniteCover(usize),
    #[error("complex is not connected")]
    Disconnected,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("oracle contract violated at step {step}: {reason}")]
    OracleViolation { step: usize, reason: String },
    #[error("algorithm invariant violated: {0}")]
    Invariant(String),
    #[error("invalid argument: {0}")]
    Argument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
