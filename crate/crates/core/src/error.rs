use crate::ids::{PeerId, TopicId};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("scoring config is empty")]
    EmptyConfig,
    #[error("topic {0} is not in the scoring config")]
    UnknownTopic(TopicId),
    #[error("peer {0} is not a node of the network")]
    UnknownPeer(PeerId),
    #[error("event is addressed to {actual}, not to {expected}")]
    WrongActor { expected: PeerId, actual: PeerId },
    #[error("heartbeat elapsed time must be positive, got {0}")]
    NonPositiveElapsed(crate::Rational),
    #[error("event `{0}` is not handled by this transition")]
    UnexpectedEvent(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("invalid attack gadget: {0}")]
    InvalidGadget(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
