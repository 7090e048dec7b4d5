use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("measure space needs at least one atom")]
    EmptySpace,
    #[error("atom weight {index} is {value}, weights must be finite and strictly positive")]
    InvalidWeight { index: usize, value: f64 },
    #[error("expected {expected} values, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("value {index} is {value}, functions must be finite and nonnegative")]
    InvalidValue { index: usize, value: f64 },
    #[error("functions live on different measure spaces")]
    SpaceMismatch,
    #[error("invalid exponent p = {0}")]
    InvalidExponent(f64),
    #[error("{what} is not defined for p = {p}")]
    UnsupportedRegime { what: &'static str, p: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("numerical domain error: {0}")]
    NumericalDomain(String),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("unknown inequality `{0}`")]
    UnknownInequality(String),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
