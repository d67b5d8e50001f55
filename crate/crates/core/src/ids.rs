//! Opaque, totally ordered identifiers for peers, topics and payloads.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Characters that would break the line-oriented text formats.
const RESERVED: &[char] = &['[', ']', ',', '#', '"', '='];

/// A printable token: non-empty, no whitespace, no reserved punctuation.
pub fn is_valid_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_graphic() && !RESERVED.contains(&c))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid {kind} token {value:?}")]
pub struct InvalidToken {
    pub kind: &'static str,
    pub value: String,
}

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $kind:literal) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(String);

        impl $name {
            /// Panics on an invalid token; use `parse` for untrusted input.
            pub fn new(s: impl Into<String>) -> Self {
                let s = s.into();
                assert!(is_valid_token(&s), "invalid {} token {:?}", $kind, s);
                $name(s)
            }

            /// Sorts before every valid id; used as a range lower bound.
            #[allow(dead_code)]
            pub(crate) fn min_sentinel() -> Self {
                $name(String::new())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl FromStr for $name {
            type Err = InvalidToken;
            fn from_str(s: &str) -> Result<Self, InvalidToken> {
                if is_valid_token(s) {
                    Ok($name(s.to_string()))
                } else {
                    Err(InvalidToken { kind: $kind, value: s.to_string() })
                }
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&self.0)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

id_type!(
    /// A peer in the network.
    PeerId,
    "peer"
);
id_type!(
    /// A pubsub topic.
    TopicId,
    "topic"
);
id_type!(
    /// Stand-in for a content hash; equal ids mean the same message.
    PayloadId,
    "payload id"
);
