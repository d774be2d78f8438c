use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("valuation undefined for zero input")]
    ZeroValuation,
    #[error("p = {0} is not an odd prime")]
    BadPrime(i64),
    #[error("level must be >= 1, got {0}")]
    BadLevel(i64),
    #[error("insufficient precision: {0}")]
    Precision(String),
    #[error("ill-conditioned poles: {0}")]
    IllConditioned(String),
    #[error("non-multiplicative character table")]
    NotMultiplicative,
    #[error("truncation did not stabilize: {0}")]
    NoStabilization(String),
    #[error("pole constraint violated: {0}")]
    PoleClass(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("Cayley pole: det(2JX - I) = 0")]
    CayleyPole,
    #[error("singular locus of Phi: det(h + I) = 0")]
    SingularLocus,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("not symplectic")]
    NotSymplectic,
    #[error("enumeration budget exceeded: need {needed}, budget {budget}")]
    Budget { needed: u128, budget: u128 },
    #[error("insufficient k for tail: {0}")]
    TailFit(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
