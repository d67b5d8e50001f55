use std::collections::VecDeque;

use crate::attacks::score_prop_violation;
use crate::config::ScoringConfig;
use crate::error::{Error, Result};
use crate::event::Event;
use crate::ids::{PeerId, TopicId};
use crate::types::Network;

use super::{transition, RunBudget};

/// Each processed event paired with the network right after it.
pub type Trace = Vec<(Event, Network)>;

/// Runs `events` through the network.
///
/// Every scripted event enters a FIFO queue that is drained, cascades
/// included, before the next scripted event is admitted. A `SND` whose
/// destination is a node enqueues the matching `RCV`; events emitted by a
/// transition are enqueued in order. Processing stops after
/// `budget.max_events` events. `observe` sees every processed event and the
/// network after it.
pub fn drive(
    mut net: Network,
    events: &[Event],
    budget: &RunBudget,
    cfg: &ScoringConfig,
    mut observe: impl FnMut(&Event, &Network),
) -> Result<Network> {
    cfg.global()?;
    let mut processed = 0usize;
    let mut queue: VecDeque<Event> = VecDeque::new();
    for scripted in events {
        queue.push_back(scripted.clone());
        while let Some(ev) = queue.pop_front() {
            if processed >= budget.max_events {
                return Ok(net);
            }
            step(&mut net, &ev, budget, cfg, &mut queue)?;
            processed += 1;
            observe(&ev, &net);
        }
    }
    Ok(net)
}

fn step(
    net: &mut Network,
    ev: &Event,
    budget: &RunBudget,
    cfg: &ScoringConfig,
    queue: &mut VecDeque<Event>,
) -> Result<()> {
    if let Some(rcv) = ev.delivery() {
        if let Event::Msg { to, .. } = ev {
            if net.contains(to) {
                queue.push_back(rcv);
            }
        }
        // The sender need not be a node: scripted traffic from outside peers
        // is how attackers act.
        if !net.contains(ev.actor()) {
            for t in ev.topics() {
                cfg.require(t)?;
            }
            return Ok(());
        }
    }
    let me = ev.actor().clone();
    let slot = net.get_mut(&me).ok_or_else(|| Error::UnknownPeer(me.clone()))?;
    let st = std::mem::take(slot);
    let res = transition(&me, st, ev, cfg, budget)?;
    *net.get_mut(&me).expect("still present") = res.state;
    queue.extend(res.emitted);
    Ok(())
}

/// The full trace of a run. Memory grows with the trace; use [`drive`] or
/// [`run_network_violations`] for long runs.
pub fn run_network(net: Network, events: &[Event], budget: &RunBudget, cfg: &ScoringConfig) -> Result<Trace> {
    let mut trace = Vec::new();
    drive(net, events, budget, cfg, |ev, n| trace.push((ev.clone(), n.clone())))?;
    Ok(trace)
}

/// One bit per heartbeat at `victim`: whether the victim then scores the
/// attacker positively overall while scoring it negatively in every
/// attacked topic.
#[allow(clippy::too_many_arguments)]
pub fn run_network_violations(
    net: Network,
    events: &[Event],
    budget: &RunBudget,
    cfg: &ScoringConfig,
    victim: &PeerId,
    attacker: &PeerId,
    attacked: &[TopicId],
) -> Result<Vec<bool>> {
    let mut bits = Vec::new();
    let mut err = None;
    drive(net, events, budget, cfg, |ev, n| {
        if ev.is_heartbeat() && ev.actor() == victim {
            match n.get(victim) {
                Some(st) => match score_prop_violation(st, attacker, attacked, cfg) {
                    Ok(b) => bits.push(b),
                    Err(e) => err = err.take().or(Some(e)),
                },
                None => err = err.take().or(Some(Error::UnknownPeer(victim.clone()))),
            }
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(bits),
    }
}
