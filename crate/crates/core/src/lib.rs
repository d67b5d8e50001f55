//! Executable model of GossipSub v1.1 peer scoring.
//!
//! Peer state machines and a deterministic network driver ([`engine`]), the
//! exact score function ([`scoring`]), property checks with counterexample
//! search ([`propcheck`]), and score-function attack synthesis
//! ([`attacks`]). All counters and scores are exact rationals.

pub mod attacks;
pub mod config;
pub mod engine;
pub mod error;
pub mod event;
pub mod ids;
pub mod propcheck;
pub mod rational;
pub mod rng;
pub mod scoring;
pub mod topology;
pub mod trace;
pub mod types;

pub use config::{Params, Profile, ScoringConfig, TopicParams, Weights};
pub use engine::{RunBudget, TransitionResult};
pub use error::{Error, Result};
pub use event::{Event, Msg, Verb};
pub use ids::{PayloadId, PeerId, TopicId};
pub use rational::{q, Rational};
pub use types::{GlobalCounters, MsgsState, NbrTopicState, Network, Payload, PeerState, TopicCounters};
