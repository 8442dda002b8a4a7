use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid ball: radius must be positive and finite, got {0}")]
    InvalidBall(f64),

    #[error("corrupt input: non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("grids differ between operands")]
    GridMismatch,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("zero weight mass on ball B({center}, {radius})")]
    ZeroMass { center: f64, radius: f64 },

    #[error("no closed form available: {0}")]
    NoClosedForm(String),

    #[error("norm bracket failed: modular still above 1 at lambda = {0}")]
    BracketFailed(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
