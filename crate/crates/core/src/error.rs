use std::fmt;

use thiserror::Error;

/// Location and cause of a failure to parse expression or report text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the input.
    pub position: usize,
    pub reason: String,
}

impl ParseError {
    pub fn new(position: usize, reason: impl Into<String>) -> Self {
        Self { position, reason: reason.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: {}", self.position, self.reason)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("square root of negative value {0:e}")]
    NegativeSqrtArgument(f64),
    #[error("alpha {0} outside (-1, 1]")]
    AlphaOutOfRange(f64),
    #[error("leaf regions do not share one variable list")]
    MixedVariableLists,
    #[error("boolean node has no operands")]
    EmptyOperands,
    #[error("parse error {0}")]
    Parse(#[from] ParseError),
    #[error("invalid primitive: {0}")]
    InvalidSpec(String),
    #[error("unknown test case `{0}`")]
    UnknownTestCase(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("Sobol dimension {0} unsupported (1..=16)")]
    DimensionUnsupported(usize),
    #[error("requested Sobol points exceed the 32-bit index space")]
    TooManyPoints,
    #[error("bounds do not match sample dimension or are not increasing")]
    BoundsMismatch,
    #[error("design matrix is rank deficient (singular value ratio {0:e})")]
    RankDeficient(f64),
    #[error("{points} points cannot determine {terms} coefficients")]
    InsufficientPoints { points: usize, terms: usize },
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("temperature must be positive, got {0}")]
    NonpositiveTemperature(f64),
    #[error("integrator failure: {0}")]
    IntegratorFailure(String),
    #[error("integrator could not meet tolerance at t = {0}")]
    ToleranceNotMet(f64),
    #[error("no constraints given")]
    EmptyConstraintList,
    #[error("point lies outside the identification box")]
    OutOfBox,
    #[error("plot count needs d >= 2, got {0}")]
    DTooSmall(u32),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
