use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("precision must be positive, got {0}")]
    InvalidPrecision(i64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands use different primes ({0} and {1})")]
    PrimeMismatch(u64, u64),
    #[error("element is indistinguishable from zero and cannot be inverted")]
    NotInvertible,
    #[error("element has negative valuation {0} and is not a p-adic integer")]
    NotIntegral(i64),
    #[error("element has valuation {0} and does not lie in pZ_p")]
    NotInMaximalIdeal(i64),
    #[error("insufficient precision: need {needed} digits, have {available}")]
    InsufficientPrecision { needed: i64, available: i64 },
    #[error("length mismatch: expected {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("operation needs a nonzero differential polynomial")]
    ZeroPolynomial,
    #[error("leading term carries no power of Y0..Yn")]
    PureXLeadingTerm,
    #[error("not divisible: {0}")]
    NotDivisible(String),
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("Y index {index} exceeds configured order {max}")]
    OrderExceeded { index: usize, max: usize },
    #[error("precision exhausted during elimination: {0}")]
    PrecisionExhausted(String),
    #[error("annihilator candidate failed cross-validation: {0}")]
    UnconfirmedCandidate(String),
    #[error("configuration rejected: {0}")]
    ConfigRejected(String),
}

pub type Result<T> = std::result::Result<T, Error>;
