use thiserror::Error;

/// Errors raised by the decoding library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("position {0} is not masked")]
    PositionNotMasked(usize),
    #[error("position {position} out of range for length {length}")]
    PositionOutOfRange { position: usize, length: usize },
    #[error("token {token} out of range 1..={vocab_size}")]
    TokenOutOfRange { token: u32, vocab_size: u32 },
    #[error("duplicate position {0} in action")]
    DuplicatePosition(usize),
    #[error("state has no masked positions")]
    NoMasksRemaining,
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid joint distribution: {0}")]
    InvalidJoint(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("position {0} missing from marginals")]
    MissingPosition(usize),
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error("schedule exhausted with {0} masks remaining")]
    ScheduleExhausted(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
