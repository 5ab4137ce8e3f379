use thiserror::Error;

/// Errors raised across the library. CLI exit codes are derived from the
/// variant (see [`Error::exit_code`]).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point lies on the hyperplane at infinity of the projective map")]
    SingularPoint,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not unimodular (det = {det})")]
    NotUnimodular { det: String },
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("algorithm `{system}` does not support n = {n}")]
    UnsupportedDimension { system: String, n: usize },
    #[error("point lies on a cell boundary")]
    BoundaryPoint,
    #[error("point lies outside the domain")]
    OutOfDomain,
    #[error("cylinder {0} is empty")]
    EmptyCylinder(String),
    #[error("system `{0}` is not full; its invariant density is not the kernel integral over the whole dual domain")]
    NonFullSystem(String),
    #[error("integral diverges: {0}")]
    DivergentIntegral(String),
    #[error("no known intertwiner for `{system}` with n = {n}")]
    NoKnownIntertwiner { system: String, n: usize },
    #[error("search exhausted {examined} candidates without a match")]
    SearchSpaceExhausted { examined: u64 },
    #[error("invalid digit: {0}")]
    InvalidDigit(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::OutOfDomain => 2,
            Error::BoundaryPoint => 3,
            Error::NonFullSystem(_) => 4,
            Error::EmptyCylinder(_) => 5,
            Error::DivergentIntegral(_) => 6,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
