use thiserror::Error;

use crate::field::FieldSpec;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(FieldSpec, FieldSpec),

    #[error("division by zero")]
    DivisionByZero,

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("prime modulus {0} is too large (must be below 2^31)")]
    ModulusTooLarge(u64),

    #[error("cannot enumerate the rationals")]
    InfiniteField,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular")]
    SingularInput,

    #[error("conjugating matrix is singular")]
    SingularConjugator,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("target is not in the span of the pair products")]
    SpanDeficient,

    #[error("internal contradiction: {0}")]
    InternalContradiction(String),

    #[error("enumeration too large: {count} elements exceeds ceiling {ceiling}")]
    TooLarge { count: u128, ceiling: u128 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::PreconditionViolated(msg.into())
    }

    pub(crate) fn contradiction(msg: impl Into<String>) -> Self {
        Error::InternalContradiction(msg.into())
    }
}
