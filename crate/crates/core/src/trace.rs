//! Line-delimited trace export.
//!
//! Each line is an event in its text form, a tab, then one of: the network
//! after the event as JSON (`full`), the SHA-256 of that JSON (`digest`), or
//! a `0`/`1` violation bit (`violations`, written only at the victim's
//! heartbeats).

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::attacks::score_prop_violation;
use crate::config::ScoringConfig;
use crate::error::{Error, Result};
use crate::event::Event;
use crate::ids::{PeerId, TopicId};
use crate::types::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceLevel {
    #[default]
    Full,
    Digest,
    Violations,
}

impl fmt::Display for TraceLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceLevel::Full => "full",
            TraceLevel::Digest => "digest",
            TraceLevel::Violations => "violations",
        })
    }
}

impl FromStr for TraceLevel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "full" => Ok(TraceLevel::Full),
            "digest" => Ok(TraceLevel::Digest),
            "violations" => Ok(TraceLevel::Violations),
            other => Err(format!(
                "unknown trace level {other:?} (expected full, digest or violations)"
            )),
        }
    }
}

pub fn canonical_json(net: &Network) -> String {
    serde_json::to_string(net).expect("networks serialize")
}

/// Hex SHA-256 of the canonical JSON form.
pub fn digest(net: &Network) -> String {
    hex::encode(Sha256::digest(canonical_json(net).as_bytes()))
}

/// What follows the event on a trace line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entry {
    Full(Network),
    Digest(String),
    Violation(bool),
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Full(net) => f.write_str(&canonical_json(net)),
            Entry::Digest(d) => f.write_str(d),
            Entry::Violation(b) => f.write_str(if *b { "1" } else { "0" }),
        }
    }
}

pub fn format_line(ev: &Event, entry: &Entry) -> String {
    format!("{ev}\t{entry}")
}

/// Parses one line of a trace written at `level`.
pub fn parse_line(line: &str, level: TraceLevel, ln: usize) -> Result<(Event, Entry)> {
    let (ev, rest) = line
        .split_once('\t')
        .ok_or_else(|| Error::parse(ln, "trace line needs a tab after the event"))?;
    let ev: Event = ev.parse().map_err(|e: String| Error::parse(ln, e))?;
    let entry = match level {
        TraceLevel::Full => Entry::Full(serde_json::from_str(rest).map_err(|e| Error::parse(ln, e.to_string()))?),
        TraceLevel::Digest => {
            if rest.len() != 64 || !rest.bytes().all(|b| b.is_ascii_hexdigit()) {
                return Err(Error::parse(ln, "digest must be 64 hex digits"));
            }
            Entry::Digest(rest.to_string())
        }
        TraceLevel::Violations => match rest {
            "0" => Entry::Violation(false),
            "1" => Entry::Violation(true),
            other => return Err(Error::parse(ln, format!("violation bit must be 0 or 1, got {other:?}"))),
        },
    };
    Ok((ev, entry))
}

pub fn parse_trace(text: &str, level: TraceLevel) -> Result<Vec<(Event, Entry)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_line(l, level, i + 1))
        .collect()
}

/// The network after the last event of a full-level trace.
pub fn final_network(text: &str) -> Result<Option<Network>> {
    let last = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).last();
    match last {
        None => Ok(None),
        Some((i, l)) => match parse_line(l, TraceLevel::Full, i + 1)?.1 {
            Entry::Full(net) => Ok(Some(net)),
            _ => unreachable!(),
        },
    }
}

/// The gadget a violations-level trace evaluates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Probe {
    pub victim: PeerId,
    pub attacker: PeerId,
    pub attacked: Vec<TopicId>,
}

/// Streams trace lines to `out` as events are observed. I/O and scoring
/// errors are held until [`TraceWriter::finish`].
pub struct TraceWriter<'a, W: Write> {
    out: W,
    level: TraceLevel,
    probe: Option<&'a Probe>,
    cfg: &'a ScoringConfig,
    lines: usize,
    err: Option<Error>,
}

impl<'a, W: Write> TraceWriter<'a, W> {
    /// The violations level needs a probe.
    pub fn new(out: W, level: TraceLevel, probe: Option<&'a Probe>, cfg: &'a ScoringConfig) -> Result<Self> {
        if level == TraceLevel::Violations && probe.is_none() {
            return Err(Error::InvalidConfig(
                "the violations trace level needs a victim, an attacker and attacked topics".into(),
            ));
        }
        Ok(TraceWriter {
            out,
            level,
            probe,
            cfg,
            lines: 0,
            err: None,
        })
    }

    pub fn observe(&mut self, ev: &Event, net: &Network) {
        if self.err.is_some() {
            return;
        }
        let entry = match self.level {
            TraceLevel::Full => Entry::Full(net.clone()),
            TraceLevel::Digest => Entry::Digest(digest(net)),
            TraceLevel::Violations => {
                let probe = self.probe.expect("checked in new");
                if !(ev.is_heartbeat() && ev.actor() == &probe.victim) {
                    return;
                }
                let bit = net
                    .get(&probe.victim)
                    .ok_or_else(|| Error::UnknownPeer(probe.victim.clone()))
                    .and_then(|st| score_prop_violation(st, &probe.attacker, &probe.attacked, self.cfg));
                match bit {
                    Ok(b) => Entry::Violation(b),
                    Err(e) => {
                        self.err = Some(e);
                        return;
                    }
                }
            }
        };
        if let Err(e) = writeln!(self.out, "{}", format_line(ev, &entry)) {
            self.err = Some(e.into());
            return;
        }
        self.lines += 1;
    }

    /// Flushes and returns the number of lines written.
    pub fn finish(mut self) -> Result<usize> {
        if let Some(e) = self.err.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.lines)
    }
}
