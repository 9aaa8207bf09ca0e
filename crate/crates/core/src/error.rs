use std::path::PathBuf;

/// Errors produced by operators, solvers and the benchmark harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    /// The iterate sits at a stationary point: every gradient score is zero.
    #[error("iterate is stationary (all gradient scores vanish)")]
    Stationary,

    #[error("power method produced a zero vector")]
    ZeroVector,

    #[error("run diverged at iteration {iteration}: {reason}")]
    Diverged { iteration: u64, reason: String },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("estimate undefined: {0}")]
    Undefined(&'static str),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
