use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("symbol is not finite at lattice point xi = {xi}")]
    Singularity { xi: f64 },

    #[error("solution blew up at t = {time}")]
    BlowUp { time: f64 },

    #[error("budget violated at step {step}: ||I_N u|| = {norm} > {limit}")]
    BudgetViolation { step: usize, norm: f64, limit: f64 },

    #[error("degenerate trial: right-hand side vanishes")]
    DegenerateTrial,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("decode error: {0}")]
    Decode(String),
}

pub type Result<T> = std::result::Result<T, Error>;
