use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero has no factorization")]
    ZeroInput,
    #[error("{what} exceeds the configured cap {cap}")]
    CapExceeded { what: &'static str, cap: String },
    #[error("could not factor {0}; supply the factorization externally")]
    Unfactored(String),
    #[error("singular curve: 4a^3 + 27b^2 = 0")]
    Singular,
    #[error("{0} is not squarefree")]
    NotSquarefree(String),
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("{0} is not prime")]
    NotPrime(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("curve has trivial conductor")]
    TrivialConductor,
    #[error("no rational {0}-torsion point")]
    NoRationalTorsion(u64),
    #[error("torsion field data for p = {0} must be supplied externally")]
    MissingTorsionFieldData(u64),
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("B = {b} is below the threshold {threshold}")]
    BelowThreshold { b: f64, threshold: f64 },
    #[error("precision failure: {0}")]
    Precision(String),
    #[error("iteration did not converge: {0}")]
    NonConvergent(String),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("parse error: {0}")]
    Parse(String),
}
