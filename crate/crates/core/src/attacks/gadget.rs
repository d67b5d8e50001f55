use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::config::ScoringConfig;
use crate::engine::{drive, RunBudget};
use crate::error::{Error, Result};
use crate::event::{Event, Msg};
use crate::ids::{PayloadId, PeerId, TopicId};
use crate::rational::Rational;
use crate::scoring::{calc_score, calc_score_topic};
use crate::types::{add_unique, lookup_tctrs, MsgKey, Network, Payload, PeerState};

/// Attacker `attacker` and victim `victim` share a mesh in every topic of
/// `shared`; in `attacked` the attacker withholds deliveries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AttackGadget {
    pub attacker: PeerId,
    pub victim: PeerId,
    pub attacked: BTreeSet<TopicId>,
    pub shared: BTreeSet<TopicId>,
}

impl AttackGadget {
    pub fn new(
        attacker: &PeerId,
        victim: &PeerId,
        attacked: impl IntoIterator<Item = TopicId>,
        shared: impl IntoIterator<Item = TopicId>,
    ) -> Self {
        AttackGadget {
            attacker: attacker.clone(),
            victim: victim.clone(),
            attacked: attacked.into_iter().collect(),
            shared: shared.into_iter().collect(),
        }
    }

    pub fn attacked_list(&self) -> Vec<TopicId> {
        self.attacked.iter().cloned().collect()
    }

    pub fn shared_list(&self) -> Vec<TopicId> {
        self.shared.iter().cloned().collect()
    }

    /// Checks the gadget shape against a start state in which the attacker
    /// is still an ordinary node.
    pub fn validate(&self, net: &Network, cfg: &ScoringConfig) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidGadget(format!("{}->{}: {m}", self.attacker, self.victim)));
        if self.attacker == self.victim {
            return bad("attacker and victim coincide".into());
        }
        if !self.attacked.is_subset(&self.shared) {
            return bad("attacked topics must be a subset of shared topics".into());
        }
        for t in &self.shared {
            cfg.require(t)?;
        }
        let v = match net.get(&self.victim) {
            Some(v) => v,
            None => return bad("victim is not a node".into()),
        };
        for t in &self.shared {
            if !v.nts.in_mesh(t, &self.attacker) {
                return bad(format!("attacker is not in the victim's {t} mesh"));
            }
            if let Some(a) = net.get(&self.attacker) {
                if !a.nts.in_mesh(t, &self.victim) {
                    return bad(format!("victim is not in the attacker's {t} mesh"));
                }
            }
        }
        Ok(())
    }
}

/// Payload id for the `index`-th fresh message of `sender` in `topic` during
/// `round`. Zero padding keeps lexicographic order equal to schedule order.
pub fn fresh_payload(sender: &PeerId, topic: &TopicId, round: u64, index: u64) -> Payload {
    let pid = PayloadId::new(format!("{sender}.{topic}.{round:08}.{index:04}"));
    let content = format!("c.{pid}");
    Payload::new(content, pid, topic.clone(), sender.clone())
}

/// `count` fresh deliveries from `a` to `v` in each of `topics`.
pub fn emit_mesh_msg_deliveries(a: &PeerId, v: &PeerId, topics: &[TopicId], count: u64, round: u64) -> Vec<Event> {
    let mut out = Vec::with_capacity(topics.len() * count as usize);
    for t in topics {
        for i in 0..count {
            out.push(Event::rcv(v, a, Msg::Payload(fresh_payload(a, t, round, i))));
        }
    }
    out
}

/// One round of a gadget schedule: `m` deliveries per attacked topic, `n`
/// per other shared topic, then a victim heartbeat of length `e`.
#[allow(clippy::too_many_arguments)]
pub fn emit_evnts(
    a: &PeerId,
    v: &PeerId,
    ts: &[TopicId],
    ats: &[TopicId],
    n: u64,
    m: u64,
    e: &Rational,
    round: u64,
) -> Vec<Event> {
    let others: Vec<TopicId> = ts.iter().filter(|t| !ats.contains(t)).cloned().collect();
    let mut out = emit_mesh_msg_deliveries(a, v, ats, m, round);
    out.extend(emit_mesh_msg_deliveries(a, v, &others, n, round));
    out.push(Event::heartbeat(v, e.clone()));
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackSchedule {
    pub events: Vec<Event>,
    pub m: u64,
    pub n: u64,
    pub e: Rational,
    pub rounds: u64,
}

pub fn gadget_schedule(g: &AttackGadget, m: u64, n: u64, e: &Rational, rounds: u64) -> AttackSchedule {
    let ts = g.shared_list();
    let ats = g.attacked_list();
    let events = (0..rounds)
        .flat_map(|r| emit_evnts(&g.attacker, &g.victim, &ts, &ats, n, m, e, r))
        .collect();
    AttackSchedule {
        events,
        m,
        n,
        e: e.clone(),
        rounds,
    }
}

/// The victim holds `p` above zero overall while every attacked topic
/// score for `p` is below zero.
pub fn score_prop_violation(ps: &PeerState, p: &PeerId, ats: &[TopicId], cfg: &ScoringConfig) -> Result<bool> {
    let overall = calc_score(p, &ps.tctrs, &ps.gctrs, cfg)?;
    if !overall.is_positive() {
        return Ok(false);
    }
    for t in ats {
        let wp = cfg.require(t)?;
        if !calc_score_topic(&lookup_tctrs(p, t, &ps.tctrs), wp).is_negative() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Puts the network into the gadget's start state.
///
/// The victim subscribes to every shared topic with the attacker in its
/// mesh, and its record of the attacker's mesh time is set to the point
/// past which mesh time no longer affects the score, as if the attacker had
/// long been an honest mesh member. The attacker is then removed from the
/// node set so that it acts only through the scheduled events.
pub fn establish_gadget(mut net: Network, g: &AttackGadget, cfg: &ScoringConfig) -> Result<Network> {
    for t in &g.shared {
        cfg.require(t)?;
    }
    net.remove(&g.attacker);
    let v = net
        .get_mut(&g.victim)
        .ok_or_else(|| Error::InvalidGadget(format!("victim {} is not a node", g.victim)))?;
    for t in &g.shared {
        let tenure = cfg.require(t)?.params.mesh_time_saturation();
        add_unique(v.nts.subs.entry(t.clone()).or_default(), &g.attacker);
        add_unique(v.nts.mesh.entry(t.clone()).or_default(), &g.attacker);
        v.tctrs.entry((g.attacker.clone(), t.clone())).or_default().mesh_time = tenure;
    }
    Ok(net)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub gadget: AttackGadget,
    /// One bit per victim heartbeat.
    pub violations: Vec<bool>,
    pub fixed_point_reached: bool,
    /// First heartbeat from which every later post-heartbeat victim state
    /// equals it.
    pub fixed_point_index: Option<usize>,
    pub first_violation_index: Option<usize>,
    /// Lowest overall score the victim gave the attacker at any heartbeat.
    pub min_attacker_score: Option<Rational>,
}

impl AttackOutcome {
    fn finish(
        gadget: AttackGadget,
        violations: Vec<bool>,
        repeats: &[bool],
        min_attacker_score: Option<Rational>,
    ) -> Self {
        // repeats[i] says whether heartbeat i+1 reproduced heartbeat i.
        let fixed_point_index = match repeats.iter().rposition(|same| !same) {
            _ if repeats.is_empty() => None,
            None => Some(0),
            Some(i) if i + 1 < repeats.len() => Some(i + 1),
            Some(_) => None,
        };
        AttackOutcome {
            first_violation_index: violations.iter().position(|b| *b),
            fixed_point_reached: fixed_point_index.is_some(),
            fixed_point_index,
            violations,
            gadget,
            min_attacker_score,
        }
    }
}

/// Temporal liveness fails when the victim's state provably repeats with
/// the violation holding from the repeating point on.
pub fn induced_liveness_counterexample(outcome: &AttackOutcome) -> bool {
    match (outcome.fixed_point_reached, outcome.fixed_point_index) {
        (true, Some(i)) => i < outcome.violations.len() && outcome.violations[i..].iter().all(|b| *b),
        _ => false,
    }
}

/// The state with every payload id and content replaced by its rank, so
/// that rounds differing only in fresh message names compare equal.
pub fn canonical_state(st: &PeerState) -> PeerState {
    let mut pids: BTreeSet<PayloadId> = BTreeSet::new();
    let mut contents: BTreeSet<String> = BTreeSet::new();
    let keyed = st.mst.recently_seen.keys().chain(st.mst.served.keys()).map(|(k, _)| k);
    let cached = st.mst.pld_cache.iter().map(|(p, _)| p);
    for k in keyed {
        pids.insert(k.pid().clone());
        if let MsgKey::Payload(p) = k {
            contents.insert(p.content.clone());
        }
    }
    for p in cached {
        pids.insert(p.pid.clone());
        contents.insert(p.content.clone());
    }
    pids.extend(st.mst.waiting_for.keys().cloned());
    let pid_map: BTreeMap<PayloadId, PayloadId> = pids
        .into_iter()
        .enumerate()
        .map(|(i, p)| (p, PayloadId::new(format!("m{i}"))))
        .collect();
    let content_map: BTreeMap<String, String> = contents
        .into_iter()
        .enumerate()
        .map(|(i, c)| (c, format!("c{i}")))
        .collect();
    let payload = |p: &Payload| Payload {
        content: content_map[&p.content].clone(),
        pid: pid_map[&p.pid].clone(),
        top: p.top.clone(),
        origin: p.origin.clone(),
    };
    let key = |k: &MsgKey| match k {
        MsgKey::Payload(p) => MsgKey::Payload(payload(p)),
        MsgKey::Id(id) => MsgKey::Id(pid_map[id].clone()),
    };
    let mut out = st.clone();
    out.mst.recently_seen = st
        .mst
        .recently_seen
        .iter()
        .map(|((k, p), v)| ((key(k), p.clone()), v.clone()))
        .collect();
    out.mst.served = st
        .mst
        .served
        .iter()
        .map(|((k, p), v)| ((key(k), p.clone()), v.clone()))
        .collect();
    out.mst.pld_cache = st.mst.pld_cache.iter().map(|(p, q)| (payload(p), q.clone())).collect();
    out.mst.waiting_for = st
        .mst
        .waiting_for
        .iter()
        .map(|(k, v)| (pid_map[k].clone(), v.clone()))
        .collect();
    out
}

/// Options for multi-gadget runs.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RoundOptions {
    /// Heartbeat every node each round, not only the victims.
    pub honest_heartbeats: bool,
    /// Nodes that publish one fresh payload per round in each topic they
    /// subscribe to.
    pub publishers: Vec<PeerId>,
}

/// Everything observed during a multi-gadget run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiOutcome {
    pub outcomes: Vec<AttackOutcome>,
    /// For each payload received anywhere, the nodes that received it.
    pub receipts: BTreeMap<PayloadId, BTreeSet<PeerId>>,
    pub final_network: Network,
    pub events_processed: usize,
}

impl MultiOutcome {
    /// Payloads in `topic` received by `peer`.
    pub fn received_in(&self, peer: &PeerId, topic: &TopicId) -> Vec<&PayloadId> {
        self.receipts
            .iter()
            .filter(|(pid, who)| who.contains(peer) && pid_topic(pid) == Some(topic.as_str()))
            .map(|(pid, _)| pid)
            .collect()
    }
}

/// Sender and topic of a payload id made by [`fresh_payload`].
pub fn pid_origin_topic(pid: &PayloadId) -> Option<(&str, &str)> {
    let mut parts = pid.as_str().rsplitn(4, '.');
    let (_index, _round) = (parts.next()?, parts.next()?);
    let topic = parts.next()?;
    Some((parts.next()?, topic))
}

fn pid_topic(pid: &PayloadId) -> Option<&str> {
    pid_origin_topic(pid).map(|(_, t)| t)
}

/// The scheduled events for all gadgets over `rounds` rounds.
///
/// Within a round, attacker deliveries come first in attacker order, then
/// honest publishes, then heartbeats in node order.
#[allow(clippy::too_many_arguments)]
pub fn multi_schedule(
    net: &Network,
    gadgets: &[AttackGadget],
    m: u64,
    n: u64,
    e: &Rational,
    rounds: u64,
    opts: &RoundOptions,
) -> Vec<Event> {
    let mut ordered: Vec<&AttackGadget> = gadgets.iter().collect();
    ordered.sort_by(|a, b| (&a.attacker, &a.victim).cmp(&(&b.attacker, &b.victim)));
    let victims: BTreeSet<&PeerId> = gadgets.iter().map(|g| &g.victim).collect();
    let mut events = Vec::new();
    for r in 0..rounds {
        for g in &ordered {
            let ts = g.shared_list();
            let ats = g.attacked_list();
            let others: Vec<TopicId> = ts.iter().filter(|t| !ats.contains(t)).cloned().collect();
            events.extend(emit_mesh_msg_deliveries(&g.attacker, &g.victim, &ats, m, r));
            events.extend(emit_mesh_msg_deliveries(&g.attacker, &g.victim, &others, n, r));
        }
        for p in &opts.publishers {
            if let Some(st) = net.get(p) {
                for t in st.nts.subscribed_topics() {
                    events.push(Event::App {
                        peer: p.clone(),
                        payload: fresh_payload(p, t, r, 0),
                    });
                }
            }
        }
        if opts.honest_heartbeats {
            for p in net.peers.keys() {
                events.push(Event::heartbeat(p, e.clone()));
            }
        } else {
            for v in &victims {
                events.push(Event::heartbeat(v, e.clone()));
            }
        }
    }
    events
}

/// Establishes every gadget, runs the interleaved schedule and evaluates
/// each gadget at its victim's heartbeats.
#[allow(clippy::too_many_arguments)]
pub fn run_gadgets(
    net: Network,
    gadgets: &[AttackGadget],
    m: u64,
    n: u64,
    rounds: u64,
    cfg: &ScoringConfig,
    budget: &RunBudget,
    opts: &RoundOptions,
) -> Result<MultiOutcome> {
    for g in gadgets {
        g.validate(&net, cfg)?;
    }
    let mut net = net;
    for g in gadgets {
        net = establish_gadget(net, g, cfg)?;
    }
    let e = cfg.global()?.params.hbm_interval.clone();
    let events = multi_schedule(&net, gadgets, m, n, &e, rounds, opts);

    let mut bits: Vec<Vec<bool>> = vec![Vec::new(); gadgets.len()];
    let mut repeats: Vec<Vec<bool>> = vec![Vec::new(); gadgets.len()];
    let mut lows: Vec<Option<Rational>> = vec![None; gadgets.len()];
    let mut last: BTreeMap<PeerId, PeerState> = BTreeMap::new();
    let mut receipts: BTreeMap<PayloadId, BTreeSet<PeerId>> = BTreeMap::new();
    let mut processed = 0usize;
    let mut err: Option<Error> = None;

    let final_network = drive(net, &events, budget, cfg, |ev, net| {
        processed += 1;
        match ev {
            Event::Msg {
                from,
                verb: crate::event::Verb::Rcv,
                msg: Msg::Payload(p),
                ..
            } if p.is_valid() => {
                receipts.entry(p.pid.clone()).or_default().insert(from.clone());
            }
            Event::Heartbeat { peer, .. } => {
                let st = match net.get(peer) {
                    Some(st) => st,
                    None => return,
                };
                let mut canon = None;
                for (i, g) in gadgets.iter().enumerate() {
                    if &g.victim != peer {
                        continue;
                    }
                    match score_prop_violation(st, &g.attacker, &g.attacked_list(), cfg) {
                        Ok(b) => bits[i].push(b),
                        Err(e) => {
                            err.get_or_insert(e);
                        }
                    }
                    if let Ok(s) = calc_score(&g.attacker, &st.tctrs, &st.gctrs, cfg) {
                        if lows[i].as_ref().is_none_or(|low| s < *low) {
                            lows[i] = Some(s);
                        }
                    }
                    let c = canon.get_or_insert_with(|| canonical_state(st));
                    if let Some(prev) = last.get(peer) {
                        repeats[i].push(prev == &*c);
                    }
                }
                if let Some(c) = canon {
                    last.insert(peer.clone(), c);
                }
            }
            _ => {}
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    let outcomes = gadgets
        .iter()
        .zip(bits)
        .zip(repeats)
        .zip(lows)
        .map(|(((g, b), r), low)| AttackOutcome::finish(g.clone(), b, &r, low))
        .collect();
    Ok(MultiOutcome {
        outcomes,
        receipts,
        final_network,
        events_processed: processed,
    })
}

/// A single gadget with e = hbmInterval, heartbeating only the victim.
pub fn run_gadget_attack(
    net: Network,
    g: &AttackGadget,
    m: u64,
    n: u64,
    rounds: u64,
    cfg: &ScoringConfig,
    budget: &RunBudget,
) -> Result<AttackOutcome> {
    let out = run_gadgets(
        net,
        std::slice::from_ref(g),
        m,
        n,
        rounds,
        cfg,
        budget,
        &RoundOptions::default(),
    )?;
    Ok(out.outcomes.into_iter().next().expect("one gadget"))
}
