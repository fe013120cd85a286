use thiserror::Error;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("register of dimension {dim} exceeds the configured maximum of {max}")]
    SizeLimit { dim: usize, max: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("unsupported dimension {dim}: {reason}")]
    UnsupportedDimension { dim: usize, reason: &'static str },

    #[error("circuit unitary deviates from unitarity by {defect:e}")]
    NonUnitary { defect: f64 },

    #[error("channel is not trace preserving (defect {defect:e})")]
    NotTracePreserving { defect: f64 },

    #[error("fixed-point solver did not converge; best residual {best_residual:e}")]
    Convergence { best_residual: f64 },

    #[error("transcripts are not comparable: {0}")]
    IncomparableTranscripts(String),

    #[error("invalid machine specification: {0}")]
    InvalidMachine(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
