//! The closed event vocabulary and its one-line text form.
//!
//! ```text
//! A SND B CONNECT1 [T1,T2]
//! A RCV B GRAFT T1
//! A RCV B IHAVE [m1,m2]
//! A RCV B PAYLOAD <pid> <topic> <origin> <content>
//! A JOIN T1
//! A LEAVE T1
//! A HBM 7/10
//! A APP <pid> <topic> <origin> <content>
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{PayloadId, PeerId, TopicId};
use crate::rational::Rational;
use crate::types::Payload;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verb {
    Snd,
    Rcv,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Msg {
    Connect1(Vec<TopicId>),
    Connect2(Vec<TopicId>),
    Prune(TopicId),
    Graft(TopicId),
    Sub(TopicId),
    Unsub(TopicId),
    IHave(Vec<PayloadId>),
    IWant(Vec<PayloadId>),
    Payload(Payload),
}

impl Msg {
    /// Data messages are handled by the message-state machine; the rest are
    /// control RPCs.
    pub fn is_data(&self) -> bool {
        matches!(self, Msg::IHave(_) | Msg::IWant(_) | Msg::Payload(_))
    }

    /// The single topic an RPC or payload refers to, if any.
    pub fn topic(&self) -> Option<&TopicId> {
        match self {
            Msg::Prune(t) | Msg::Graft(t) | Msg::Sub(t) | Msg::Unsub(t) => Some(t),
            Msg::Payload(p) => Some(&p.top),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Event {
    /// `from` is always the peer at which the event occurs: for `Snd` it
    /// sends to `to`, for `Rcv` it receives from `to`.
    Msg {
        from: PeerId,
        verb: Verb,
        to: PeerId,
        msg: Msg,
    },
    Join {
        peer: PeerId,
        topic: TopicId,
    },
    Leave {
        peer: PeerId,
        topic: TopicId,
    },
    Heartbeat {
        peer: PeerId,
        elapsed: Rational,
    },
    App {
        peer: PeerId,
        payload: Payload,
    },
}

impl Event {
    pub fn snd(from: &PeerId, to: &PeerId, msg: Msg) -> Self {
        Event::Msg {
            from: from.clone(),
            verb: Verb::Snd,
            to: to.clone(),
            msg,
        }
    }

    pub fn rcv(at: &PeerId, from: &PeerId, msg: Msg) -> Self {
        Event::Msg {
            from: at.clone(),
            verb: Verb::Rcv,
            to: from.clone(),
            msg,
        }
    }

    pub fn heartbeat(peer: &PeerId, elapsed: Rational) -> Self {
        Event::Heartbeat {
            peer: peer.clone(),
            elapsed,
        }
    }

    /// The peer whose state this event concerns.
    pub fn actor(&self) -> &PeerId {
        match self {
            Event::Msg { from, .. } => from,
            Event::Join { peer, .. }
            | Event::Leave { peer, .. }
            | Event::Heartbeat { peer, .. }
            | Event::App { peer, .. } => peer,
        }
    }

    pub fn is_heartbeat(&self) -> bool {
        matches!(self, Event::Heartbeat { .. })
    }

    pub fn is_snd(&self) -> bool {
        matches!(self, Event::Msg { verb: Verb::Snd, .. })
    }

    /// For `p SND q m`, the matching `q RCV p m`.
    pub fn delivery(&self) -> Option<Event> {
        match self {
            Event::Msg {
                from,
                verb: Verb::Snd,
                to,
                msg,
            } => Some(Event::rcv(to, from, msg.clone())),
            _ => None,
        }
    }

    /// Topics mentioned anywhere in the event.
    pub fn topics(&self) -> Vec<&TopicId> {
        match self {
            Event::Msg { msg, .. } => match msg {
                Msg::Connect1(ts) | Msg::Connect2(ts) => ts.iter().collect(),
                other => other.topic().into_iter().collect(),
            },
            Event::Join { topic, .. } | Event::Leave { topic, .. } => vec![topic],
            Event::Heartbeat { .. } => vec![],
            Event::App { payload, .. } => vec![&payload.top],
        }
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, xs: &[T]) -> fmt::Result {
    f.write_str("[")?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{x}")?;
    }
    f.write_str("]")
}

fn write_payload(f: &mut fmt::Formatter<'_>, p: &Payload) -> fmt::Result {
    write!(f, "{} {} {} {}", p.pid, p.top, p.origin, p.content)
}

impl fmt::Display for Msg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Msg::Connect1(ts) => {
                f.write_str("CONNECT1 ")?;
                write_list(f, ts)
            }
            Msg::Connect2(ts) => {
                f.write_str("CONNECT2 ")?;
                write_list(f, ts)
            }
            Msg::Prune(t) => write!(f, "PRUNE {t}"),
            Msg::Graft(t) => write!(f, "GRAFT {t}"),
            Msg::Sub(t) => write!(f, "SUB {t}"),
            Msg::Unsub(t) => write!(f, "UNSUB {t}"),
            Msg::IHave(ids) => {
                f.write_str("IHAVE ")?;
                write_list(f, ids)
            }
            Msg::IWant(ids) => {
                f.write_str("IWANT ")?;
                write_list(f, ids)
            }
            Msg::Payload(p) => {
                f.write_str("PAYLOAD ")?;
                write_payload(f, p)
            }
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Msg { from, verb, to, msg } => {
                let v = match verb {
                    Verb::Snd => "SND",
                    Verb::Rcv => "RCV",
                };
                write!(f, "{from} {v} {to} {msg}")
            }
            Event::Join { peer, topic } => write!(f, "{peer} JOIN {topic}"),
            Event::Leave { peer, topic } => write!(f, "{peer} LEAVE {topic}"),
            Event::Heartbeat { peer, elapsed } => write!(f, "{peer} HBM {elapsed}"),
            Event::App { peer, payload } => {
                write!(f, "{peer} APP ")?;
                write_payload(f, payload)
            }
        }
    }
}

fn token<T: FromStr>(s: &str, what: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    s.parse::<T>().map_err(|e| format!("bad {what}: {e}"))
}

fn list<T: FromStr>(s: &str, what: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    let inner = s
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| format!("expected a [..] list of {what}, got {s:?}"))?;
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner.split(',').map(|x| token(x, what)).collect()
}

fn payload(words: &[&str]) -> std::result::Result<Payload, String> {
    match words {
        [pid, top, origin, content] => {
            if !crate::ids::is_valid_token(content) {
                return Err(format!("bad payload content {content:?}"));
            }
            Ok(Payload::new(
                *content,
                token(pid, "payload id")?,
                token(top, "topic")?,
                token(origin, "peer")?,
            ))
        }
        _ => Err("payload needs: <pid> <topic> <origin> <content>".into()),
    }
}

fn one<'a>(words: &[&'a str], what: &str) -> std::result::Result<&'a str, String> {
    match words {
        [w] => Ok(w),
        _ => Err(format!("expected exactly one {what}")),
    }
}

fn parse_msg(kind: &str, rest: &[&str]) -> std::result::Result<Msg, String> {
    Ok(match kind {
        "CONNECT1" => Msg::Connect1(list(one(rest, "topic list")?, "topic")?),
        "CONNECT2" => Msg::Connect2(list(one(rest, "topic list")?, "topic")?),
        "PRUNE" => Msg::Prune(token(one(rest, "topic")?, "topic")?),
        "GRAFT" => Msg::Graft(token(one(rest, "topic")?, "topic")?),
        "SUB" => Msg::Sub(token(one(rest, "topic")?, "topic")?),
        "UNSUB" => Msg::Unsub(token(one(rest, "topic")?, "topic")?),
        "IHAVE" => Msg::IHave(list(one(rest, "id list")?, "payload id")?),
        "IWANT" => Msg::IWant(list(one(rest, "id list")?, "payload id")?),
        "PAYLOAD" => Msg::Payload(payload(rest)?),
        other => return Err(format!("unknown message kind {other:?}")),
    })
}

impl FromStr for Event {
    type Err = String;

    fn from_str(line: &str) -> std::result::Result<Self, String> {
        let words: Vec<&str> = line.split_whitespace().collect();
        let (actor, kind, rest) = match words.as_slice() {
            [a, k, rest @ ..] => (*a, *k, rest),
            _ => return Err("expected `<peer> <kind> ...`".into()),
        };
        let peer: PeerId = token(actor, "peer")?;
        match kind {
            "SND" | "RCV" => {
                let (to, mkind, mrest) = match rest {
                    [to, mk, mr @ ..] => (*to, *mk, mr),
                    _ => return Err("expected `<peer> SND|RCV <peer> <message>`".into()),
                };
                let verb = if kind == "SND" { Verb::Snd } else { Verb::Rcv };
                Ok(Event::Msg {
                    from: peer,
                    verb,
                    to: token(to, "peer")?,
                    msg: parse_msg(mkind, mrest)?,
                })
            }
            "JOIN" => Ok(Event::Join {
                peer,
                topic: token(one(rest, "topic")?, "topic")?,
            }),
            "LEAVE" => Ok(Event::Leave {
                peer,
                topic: token(one(rest, "topic")?, "topic")?,
            }),
            "HBM" => {
                let elapsed: Rational = token(one(rest, "elapsed time")?, "elapsed time")?;
                if !elapsed.is_positive() {
                    return Err(format!("heartbeat elapsed time must be positive, got {elapsed}"));
                }
                Ok(Event::Heartbeat { peer, elapsed })
            }
            "APP" => Ok(Event::App {
                peer,
                payload: payload(rest)?,
            }),
            other => Err(format!("unknown event kind {other:?}")),
        }
    }
}

/// Parses an event script: one event per line, blank lines and `#`
/// comments ignored.
pub fn parse_events(text: &str) -> Result<Vec<Event>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        out.push(line.parse().map_err(|m| Error::parse(i + 1, m))?);
    }
    Ok(out)
}

pub fn format_events(events: &[Event]) -> String {
    let mut s = String::new();
    for e in events {
        s.push_str(&e.to_string());
        s.push('\n');
    }
    s
}
