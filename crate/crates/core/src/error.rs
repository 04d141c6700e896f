use thiserror::Error;

/// Errors raised across the simulator.
#[derive(Debug, Error)]
pub enum CoexError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown {kind} id {id}")]
    Lookup { kind: &'static str, id: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid state: {0}")]
    State(String),
    #[error("channel {channel} out of range (num_channels = {num_channels})")]
    Range { channel: usize, num_channels: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoexError>;
