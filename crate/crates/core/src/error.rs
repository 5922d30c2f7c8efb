use thiserror::Error;

/// Errors raised by graph construction, dynamics, solvers and bounds.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The input is well formed but the operation is undefined on it
    /// (disconnected graph, missing stubborn agents, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A randomized generator gave up after its retry budget.
    #[error("generation failed: {0}")]
    Generation(String),

    /// An iterative method stopped before meeting its tolerance.
    #[error("{method} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// A Monte-Carlo walk exceeded the hard step cap.
    #[error("random walk from node {start} exceeded {cap} steps")]
    WalkCapExceeded { start: usize, cap: usize },

    /// Exact conductance enumeration requested beyond its size cap.
    #[error("exact mode supports at most {cap} free nodes, got {got}")]
    Mode { cap: usize, got: usize },

    /// Malformed text input.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
