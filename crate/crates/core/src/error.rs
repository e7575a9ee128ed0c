use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1, got {0}")]
    BadDegree(u32),
    #[error("polynomial is not monic")]
    NotMonic,
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("operands belong to different fields ({0} vs {1})")]
    MixedFields(String, String),
    #[error("leading coefficient of the zero polynomial")]
    ZeroLead,
    #[error("polynomial of degree {deg} does not fit in G_{n}")]
    OutOfWindow { deg: u32, n: u32 },
    #[error("characteristic {0} is excluded; need p > 3")]
    SmallCharacteristic(u64),
    #[error("field of order {0} is too large for this operation")]
    FieldTooLarge(u64),
    #[error("window too large: {0} terms exceeds the limit of {1}")]
    WindowTooLarge(u128, u128),
    #[error("epsilon is required for this family")]
    EpsilonUnset,
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
