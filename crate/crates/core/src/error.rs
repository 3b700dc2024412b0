use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("expected {expected} bits, got {actual}")]
    BitLength { expected: usize, actual: usize },

    #[error("value {value} out of range [0, {bound})")]
    OutOfRange { value: u64, bound: u64 },

    #[error("tuple length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("invalid subcarrier index tuple {0:?}")]
    InvalidTuple(Vec<usize>),

    #[error("index set {0:?} is not in the family")]
    NotInFamily(Vec<usize>),

    #[error("hypothesis space of 2^{bits} is too large for exhaustive enumeration (limit 2^{limit}); use sampled mode")]
    SpaceTooLarge { bits: u32, limit: u32 },

    #[error("codebook fails full-difference check for codes {0} and {1}")]
    FullDiversityViolated(usize, usize),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
