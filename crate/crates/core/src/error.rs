use thiserror::Error;

/// Errors raised by the arithmetic, local and descent layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is outside the supported integer range")]
    Range(String),
    #[error("valuation of zero is undefined")]
    ZeroValuation,
    #[error("zero has no square class")]
    ZeroClass,
    #[error("{0} is not prime")]
    NotPrime(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate quartic form ({d1}, {c}, {d2})")]
    DegenerateForm { d1: i128, c: i128, d2: i128 },
    #[error("singular curve y^2 = x^3 + ({a})x^2 + ({b})x")]
    SingularCurve { a: i128, b: i128 },
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("internal consistency error: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
