//! Peer and network state machines.
//!
//! A peer transition takes the old [`PeerState`] by value and returns the
//! new one together with the events it emits; nothing else is touched.

mod heartbeat;
mod msgs;
mod nbr;
mod network;

pub use heartbeat::heartbeat;
pub use msgs::{update_msgs_state, MsgsUpdate};
pub use nbr::{update_nbr_topic_state, NbrUpdate};
pub use network::{drive, run_network, run_network_violations, Trace};

use serde::{Deserialize, Serialize};

use crate::config::{ScoringConfig, TopicParams};
use crate::error::{Error, Result};
use crate::event::{Event, Msg, Verb};
use crate::ids::{PeerId, TopicId};
use crate::rational::Rational;
use crate::types::{GctrsMap, GlobalCounters, PeerState, TctrsMap, TopicCounters};

/// Engine constants that have no counterpart in the scoring params.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineLimits {
    /// How often the same message is served to the same peer via IWANT.
    pub max_iwant_serves: u64,
    /// Peers added per heartbeat by opportunistic grafting.
    pub opportunistic_graft_peers: usize,
}

impl Default for EngineLimits {
    fn default() -> Self {
        EngineLimits {
            max_iwant_serves: 3,
            opportunistic_graft_peers: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunBudget {
    pub max_events: usize,
    pub seed: u64,
    #[serde(default)]
    pub limits: EngineLimits,
}

impl RunBudget {
    pub fn new(max_events: usize, seed: u64) -> Self {
        RunBudget {
            max_events,
            seed,
            limits: EngineLimits::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionResult {
    pub state: PeerState,
    pub emitted: Vec<Event>,
}

/// Applies one event at peer `me`.
///
/// `SND` events record that `me` sent something and leave its state alone;
/// delivery is the network driver's job.
pub fn transition(
    me: &PeerId,
    st: PeerState,
    ev: &Event,
    cfg: &ScoringConfig,
    budget: &RunBudget,
) -> Result<TransitionResult> {
    check_event(me, ev, cfg)?;
    match ev {
        Event::Msg { verb: Verb::Snd, .. } => Ok(TransitionResult {
            state: st,
            emitted: Vec::new(),
        }),
        Event::Heartbeat { elapsed, .. } => heartbeat(me, st, elapsed, cfg, budget),
        Event::Msg { msg, .. } if msg.is_data() => {
            let PeerState {
                nts,
                mst,
                tctrs,
                gctrs,
                scores,
                decay_clock,
            } = st;
            let up = update_msgs_state(me, mst, &nts, &scores, tctrs, gctrs, ev, cfg, budget)?;
            Ok(TransitionResult {
                state: PeerState {
                    nts,
                    mst: up.mst,
                    tctrs: up.tctrs,
                    gctrs: up.gctrs,
                    scores,
                    decay_clock,
                },
                emitted: up.emitted,
            })
        }
        _ => {
            let PeerState {
                nts,
                mst,
                tctrs,
                gctrs,
                scores,
                decay_clock,
            } = st;
            let up = update_nbr_topic_state(me, nts, scores, tctrs, gctrs, ev, cfg, budget)?;
            let mut mst = mst;
            if let Event::App { payload, .. } = ev {
                msgs::record_publish(me, &mut mst, payload);
            }
            Ok(TransitionResult {
                state: PeerState {
                    nts: up.nts,
                    mst,
                    tctrs: up.tctrs,
                    gctrs: up.gctrs,
                    scores: up.scores,
                    decay_clock,
                },
                emitted: up.emitted,
            })
        }
    }
}

fn check_event(me: &PeerId, ev: &Event, cfg: &ScoringConfig) -> Result<()> {
    cfg.global()?;
    if ev.actor() != me {
        return Err(Error::WrongActor {
            expected: me.clone(),
            actual: ev.actor().clone(),
        });
    }
    if let Event::Heartbeat { elapsed, .. } = ev {
        if !elapsed.is_positive() {
            return Err(Error::NonPositiveElapsed(elapsed.clone()));
        }
    }
    for t in ev.topics() {
        cfg.require(t)?;
    }
    Ok(())
}

/// The peer on the other end of a received message, if `ev` is one.
fn received_from(ev: &Event) -> Option<(&PeerId, &Msg)> {
    match ev {
        Event::Msg {
            verb: Verb::Rcv,
            to,
            msg,
            ..
        } => Some((to, msg)),
        _ => None,
    }
}

fn is_graylisted(p: &PeerId, scores: &crate::types::ScoreMap, cfg: &ScoringConfig) -> Result<bool> {
    let thr = &cfg.global()?.params.gray_list_threshold;
    Ok(crate::types::lookup_score(p, scores) < *thr)
}

pub(crate) fn tc_mut<'a>(m: &'a mut TctrsMap, p: &PeerId, t: &TopicId) -> &'a mut TopicCounters {
    m.entry((p.clone(), t.clone())).or_default()
}

pub(crate) fn gc_mut<'a>(m: &'a mut GctrsMap, p: &PeerId) -> &'a mut GlobalCounters {
    m.entry(p.clone()).or_default()
}

/// Adds one to `x`, saturating at `cap`.
pub(crate) fn bump_capped(x: &mut Rational, cap: &Rational) {
    let next = &*x + Rational::one();
    *x = Rational::min_of(&next, cap);
}

/// Removes `q` from the mesh bookkeeping for `t`. With `penalize`, the
/// current delivery deficit becomes sticky in `q`'s failure penalty.
pub(crate) fn leave_mesh_counters(tctrs: &mut TctrsMap, q: &PeerId, t: &TopicId, wp: &TopicParams, penalize: bool) {
    let tc = tc_mut(tctrs, q, t);
    if penalize {
        let deficit = crate::scoring::deficit_penalty(tc, &wp.params);
        tc.mfp += deficit;
    }
    tc.mesh_time = Rational::zero();
}
