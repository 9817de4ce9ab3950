use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("capability {0} is not in the capability set")]
    UnknownCapability(u32),
    #[error("capability labels must be strictly increasing")]
    UnorderedCapabilities,
    #[error("capability set must not be empty")]
    EmptyCapabilitySet,
    #[error("player index {index} out of range for {players} players")]
    PlayerOutOfRange { index: usize, players: usize },
    #[error("expected a {expected} belief bank")]
    WrongMode { expected: &'static str },
    #[error("action set is empty")]
    NoActions,
    #[error("observed action is not legal in this state")]
    IllegalAction,
    #[error("negative loss {0}")]
    NegativeLoss(f64),
    #[error("loss vector has {got} entries, expected {expected}")]
    LossLength { got: usize, expected: usize },
    #[error("delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("temperature schedule needs t >= 1")]
    InvalidTimeStep,
    #[error("no value available for assignment")]
    MissingAssignmentValue,
    #[error("empty input")]
    Empty,
    #[error("search root is terminal")]
    TerminalRoot,
    #[error("search level {0} has not been completed")]
    LevelNotSearched(usize),
    #[error("player {0} is not the current actor")]
    NotActorsTurn(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = core::result::Result<T, Error>;
