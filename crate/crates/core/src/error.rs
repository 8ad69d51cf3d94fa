use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid event family: {0}")]
    InvalidFamily(String),
    #[error("incompatible event universes: {left:?} vs {right:?}")]
    FamilyMismatch { left: Vec<String>, right: Vec<String> },
    #[error("mask {mask:#b} is out of range for a family of {size} events")]
    MaskOutOfRange { mask: u32, size: usize },
    #[error("unknown event label `{0}`")]
    UnknownLabel(String),
    #[error("insufficient history: need {needed} rows, have {available}")]
    InsufficientHistory { needed: usize, available: usize },
    #[error("invalid indicator config: {0}")]
    InvalidConfig(String),
    #[error("row {row}: {message}")]
    Ingest { row: usize, message: String },
    #[error("csv header: {0}")]
    Header(String),
    #[error("empty series")]
    EmptySeries,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("distribution is not normalized (sum = {sum})")]
    NotNormalized { sum: f64 },
    #[error("negative probability {value} at mask {mask:#b}")]
    NegativeProbability { mask: u32, value: f64 },
    #[error("absolute continuity violated at mask {mask:#b}: p > 0 but p* = 0")]
    AbsoluteContinuity { mask: u32 },
    #[error("unmodeled circumstance {mask:#b}: p(F) > 0 but the conditional row is undefined")]
    UnmodeledCircumstance { mask: u32 },
    #[error("Gibbs normalizer vanished")]
    ZeroNormalizer,
    #[error("target mean value {target} outside the attainable interval [{min}, {max}]")]
    InfeasibleTarget { target: f64, min: f64, max: f64 },
    #[error("target mean value {target} is only attained in the limit (rate cap {cap} reached, residual {residual})")]
    LimitOnly { target: f64, cap: f64, residual: f64 },
    #[error("bisection did not converge: residual {residual} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
