use thiserror::Error;

#[derive(Debug, Error)]
pub enum SoccerError {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type SoccerResult<T> = std::result::Result<T, SoccerError>;
