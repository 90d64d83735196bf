use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("minor order {order} out of range (at most {max})")]
    OrderOutOfRange { order: usize, max: usize },
    #[error("direction vectors are linearly dependent")]
    DependentDirections,
    #[error("the zero vector has no projective height")]
    ZeroVector,
    #[error("subvariety is empty")]
    EmptySubvariety,
    #[error("operation needs a proper subvariety, got the whole space")]
    FullSpace,
    #[error("{0} is not the discriminant of an imaginary quadratic order")]
    InvalidDiscriminant(i64),
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("discriminant {0} exceeds the factorization limit")]
    DiscriminantTooLarge(i64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precision exhausted at {bits} bits")]
    PrecisionExhausted { bits: u32 },
    #[error("undecidable at current precision: {0}")]
    Undecidable(String),
    #[error("class polynomial coefficient {index} is not integral (ball {ball})")]
    NonIntegralCoefficient { index: usize, ball: String },
    #[error("point does not lie on the subvariety")]
    NotOnSubvariety,
    #[error("discriminant cap {0} is below 3")]
    CapTooSmall(u64),
    #[error("coefficient {0} is zero")]
    ZeroCoefficient(usize),
    #[error("cache i/o: {0}")]
    Io(String),
}
