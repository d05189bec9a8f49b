use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basepoint mismatch: {left} vs {right}")]
    BasepointMismatch { left: f64, right: f64 },

    #[error("arity mismatch: expected {expected} state polynomials, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("non-finite coefficient produced by {operation}")]
    NonFinite { operation: &'static str },

    #[error("unsupported function `{0}`")]
    UnsupportedFunction(String),

    #[error("cyclic auxiliary definition: {0}")]
    CyclicDefinition(String),

    #[error("domain error evaluating initial value of state `{state}`: {reason}")]
    Domain { state: String, reason: String },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid options: {0}")]
    InvalidOptions(String),

    #[error("iteration diverged at iteration {iteration}{}", segment.map(|j| format!(" (segment {j})")).unwrap_or_default())]
    Divergence {
        iteration: usize,
        segment: Option<usize>,
    },

    #[error("integration diverged at t = {time}")]
    OracleDivergence { time: f64 },

    #[error("residual does not change sign on [{lo}, {hi}]")]
    Bracketing { lo: f64, hi: f64 },

    #[error("sampling grids do not match: {0}")]
    GridMismatch(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("problem file: {0}")]
    ProblemFile(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
