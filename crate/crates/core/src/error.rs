use thiserror::Error;

#[derive(Debug, Error)]
pub enum TscError {
    #[error("ZeroPoint: row {row} has norm {norm:e}, below 1e-12")]
    ZeroPoint { row: usize, norm: f64 },

    #[error("InvalidQ: q = {q} must lie in 1..={max} for N = {n}")]
    InvalidQ { q: usize, n: usize, max: usize },

    #[error("ConvergenceFailure: {0}")]
    ConvergenceFailure(String),

    #[error("EmptyAfterRemoval: all {0} points were flagged as outliers")]
    EmptyAfterRemoval(usize),

    #[error("DegenerateErasure: point {0} is identically zero after erasure")]
    DegenerateErasure(usize),

    #[error("LengthMismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("NotOrthonormal: max |UᵀU - I| = {0:e}")]
    NotOrthonormal(f64),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = TscError> = std::result::Result<T, E>;
