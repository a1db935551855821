use thiserror::Error;

/// Errors produced by the `leftmatch` library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("distribution has no entries")]
    EmptyDistribution,
    #[error("negative probability {probability} for degree {degree}")]
    NegativeProbability { degree: u32, probability: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    SumNotOne { sum: f64 },
    #[error("degree {0} appears more than once")]
    DuplicateDegree(u32),
    #[error("degree 0 is not allowed")]
    DegreeZero,
    #[error("alpha * n = {value} is not an integer")]
    NonIntegralSplit { value: f64 },
    #[error("mean of the per-node probabilities is {actual}, expected {expected}")]
    MeanMismatch { expected: f64, actual: f64 },
    #[error("degree {degree} exceeds the number of right nodes {m}")]
    DegreeExceedsM { degree: u32, m: usize },
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error("graph has no left-perfect matching")]
    NoMatchingExists,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
