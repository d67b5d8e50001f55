use crate::config::ScoringConfig;
use crate::error::{Error, Result};
use crate::event::{Event, Msg};
use crate::ids::{PeerId, TopicId};
use crate::rng;
use crate::types::{add_unique, lookup_score, remove_peer, GctrsMap, NbrTopicState, ScoreMap, TctrsMap};

use super::{is_graylisted, leave_mesh_counters, received_from, RunBudget};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NbrUpdate {
    pub nts: NbrTopicState,
    pub emitted: Vec<Event>,
    pub tctrs: TctrsMap,
    pub gctrs: GctrsMap,
    pub scores: ScoreMap,
}

/// Control-plane transition: subscriptions, mesh membership, fanout and
/// publishing.
#[allow(clippy::too_many_arguments)]
pub fn update_nbr_topic_state(
    me: &PeerId,
    nts: NbrTopicState,
    scores: ScoreMap,
    tctrs: TctrsMap,
    gctrs: GctrsMap,
    ev: &Event,
    cfg: &ScoringConfig,
    budget: &RunBudget,
) -> Result<NbrUpdate> {
    let mut up = NbrUpdate {
        nts,
        emitted: Vec::new(),
        tctrs,
        gctrs,
        scores,
    };
    match ev {
        Event::Msg { .. } => {
            let (q, msg) = match received_from(ev) {
                Some(x) => x,
                None => return Ok(up),
            };
            if is_graylisted(q, &up.scores, cfg)? {
                return Ok(up);
            }
            on_rpc(me, q, msg, &mut up, cfg)?;
        }
        Event::Join { topic, .. } => on_join(me, topic, &mut up, cfg, budget)?,
        Event::Leave { topic, .. } => on_leave(me, topic, &mut up, cfg)?,
        Event::App { payload, .. } => {
            let t = &payload.top;
            let targets: Vec<PeerId> = if up.nts.is_subscribed(t) {
                up.nts.mesh_of(t).to_vec()
            } else {
                refresh_fanout(me, t, &mut up, cfg, budget)?;
                up.nts.last_pub.insert(t.clone(), crate::Rational::zero());
                up.nts.fanout_of(t).to_vec()
            };
            for p in targets.iter().filter(|p| *p != me && **p != payload.origin) {
                up.emitted.push(Event::snd(me, p, Msg::Payload(payload.clone())));
            }
        }
        Event::Heartbeat { .. } => return Err(Error::UnexpectedEvent(ev.to_string())),
    }
    Ok(up)
}

fn on_rpc(me: &PeerId, q: &PeerId, msg: &Msg, up: &mut NbrUpdate, cfg: &ScoringConfig) -> Result<()> {
    let nts = &mut up.nts;
    match msg {
        Msg::Sub(t) => {
            add_unique(nts.subs.entry(t.clone()).or_default(), q);
        }
        Msg::Unsub(t) => {
            if let Some(list) = nts.subs.get_mut(t) {
                remove_peer(list, q);
                if list.is_empty() {
                    nts.subs.remove(t);
                }
            }
            if let Some(list) = nts.fanout.get_mut(t) {
                remove_peer(list, q);
            }
            if let Some(list) = nts.mesh.get_mut(t) {
                if remove_peer(list, q) {
                    leave_mesh_counters(&mut up.tctrs, q, t, cfg.require(t)?, false);
                }
            }
        }
        Msg::Graft(t) => {
            if nts.is_subscribed(t) && !lookup_score(q, &up.scores).is_negative() {
                add_unique(nts.subs.entry(t.clone()).or_default(), q);
                add_unique(nts.mesh.get_mut(t).expect("subscribed"), q);
            } else {
                up.emitted.push(Event::snd(me, q, Msg::Prune(t.clone())));
            }
        }
        Msg::Prune(t) => {
            if let Some(list) = nts.mesh.get_mut(t) {
                if remove_peer(list, q) {
                    leave_mesh_counters(&mut up.tctrs, q, t, cfg.require(t)?, true);
                }
            }
        }
        Msg::Connect1(ts) | Msg::Connect2(ts) => {
            for t in ts {
                add_unique(nts.subs.entry(t.clone()).or_default(), q);
            }
            if matches!(msg, Msg::Connect1(_)) {
                let mine: Vec<TopicId> = nts.subscribed_topics().cloned().collect();
                up.emitted.push(Event::snd(me, q, Msg::Connect2(mine)));
            }
        }
        Msg::IHave(_) | Msg::IWant(_) | Msg::Payload(_) => {}
    }
    Ok(())
}

fn admissible(me: &PeerId, candidates: &[PeerId], scores: &ScoreMap, exclude: &[PeerId]) -> Vec<PeerId> {
    candidates
        .iter()
        .filter(|p| *p != me && !exclude.contains(p) && !lookup_score(p, scores).is_negative())
        .cloned()
        .collect()
}

fn on_join(me: &PeerId, t: &TopicId, up: &mut NbrUpdate, cfg: &ScoringConfig, budget: &RunBudget) -> Result<()> {
    if up.nts.is_subscribed(t) {
        return Ok(());
    }
    let d = cfg.require(t)?.params.d;
    let from_fanout = admissible(me, up.nts.fanout_of(t), &up.scores, &[]);
    let mut chosen = rng::select(budget.seed, me, "join-fanout", Some(t), from_fanout, d);
    let from_subs = admissible(me, up.nts.subs_of(t), &up.scores, &chosen);
    chosen.extend(rng::select(
        budget.seed,
        me,
        "join-subs",
        Some(t),
        from_subs,
        d - chosen.len(),
    ));
    let neighbours = up.nts.neighbours();
    let subs = up.nts.subs.entry(t.clone()).or_default();
    for p in &chosen {
        add_unique(subs, p);
    }
    if subs.is_empty() {
        up.nts.subs.remove(t);
    }
    up.nts.mesh.insert(t.clone(), chosen.clone());
    up.nts.fanout.remove(t);
    up.nts.last_pub.remove(t);
    for p in neighbours.iter().filter(|p| *p != me) {
        up.emitted.push(Event::snd(me, p, Msg::Sub(t.clone())));
    }
    for p in &chosen {
        up.emitted.push(Event::snd(me, p, Msg::Graft(t.clone())));
    }
    Ok(())
}

fn on_leave(me: &PeerId, t: &TopicId, up: &mut NbrUpdate, cfg: &ScoringConfig) -> Result<()> {
    let members = match up.nts.mesh.remove(t) {
        Some(m) => m,
        None => return Ok(()),
    };
    let wp = cfg.require(t)?;
    for p in up.nts.neighbours().iter().filter(|p| *p != me) {
        up.emitted.push(Event::snd(me, p, Msg::Unsub(t.clone())));
    }
    for p in &members {
        up.emitted.push(Event::snd(me, p, Msg::Prune(t.clone())));
        leave_mesh_counters(&mut up.tctrs, p, t, wp, false);
    }
    Ok(())
}

/// Keeps fanout members that still subscribe and tops the list up to `d`.
pub(super) fn refresh_fanout_lists(
    me: &PeerId,
    t: &TopicId,
    nts: &mut NbrTopicState,
    scores: &ScoreMap,
    d: usize,
    seed: u64,
) {
    let subs = nts.subs_of(t).to_vec();
    let mut current: Vec<PeerId> = nts.fanout_of(t).iter().filter(|p| subs.contains(p)).cloned().collect();
    if current.len() < d {
        let extra = admissible(me, &subs, scores, &current);
        current.extend(rng::select(seed, me, "fanout", Some(t), extra, d - current.len()));
    }
    nts.fanout.insert(t.clone(), current);
}

fn refresh_fanout(me: &PeerId, t: &TopicId, up: &mut NbrUpdate, cfg: &ScoringConfig, budget: &RunBudget) -> Result<()> {
    let d = cfg.require(t)?.params.d;
    refresh_fanout_lists(me, t, &mut up.nts, &up.scores, d, budget.seed);
    Ok(())
}
