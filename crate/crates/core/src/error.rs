use thiserror::Error;

/// Errors raised by the learning core.
#[derive(Debug, Error)]
pub enum GvfError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("learner poisoned after {samples} samples: {reason}")]
    Poisoned { samples: u64, reason: String },

    #[error("projection is rank deficient (rank {rank} of {columns} columns)")]
    RankDeficient { rank: usize, columns: usize },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed binary data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GvfError>;

pub(crate) fn contract(msg: impl Into<String>) -> GvfError {
    GvfError::Contract(msg.into())
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(GvfError::DimensionMismatch { expected, found })
    }
}
