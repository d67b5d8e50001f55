use crate::config::ScoringConfig;
use crate::error::{Error, Result};
use crate::event::{Event, Msg};
use crate::ids::{PayloadId, PeerId};
use crate::rational::Rational;
use crate::types::{GctrsMap, MsgKey, MsgsState, NbrTopicState, Payload, ScoreMap, TctrsMap};

use super::{bump_capped, gc_mut, is_graylisted, received_from, tc_mut, RunBudget};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MsgsUpdate {
    pub mst: MsgsState,
    pub emitted: Vec<Event>,
    pub tctrs: TctrsMap,
    pub gctrs: GctrsMap,
}

/// Data-plane transition: payload delivery and forwarding, IHAVE/IWANT.
#[allow(clippy::too_many_arguments)]
pub fn update_msgs_state(
    me: &PeerId,
    mst: MsgsState,
    nts: &NbrTopicState,
    scores: &ScoreMap,
    tctrs: TctrsMap,
    gctrs: GctrsMap,
    ev: &Event,
    cfg: &ScoringConfig,
    budget: &RunBudget,
) -> Result<MsgsUpdate> {
    let mut up = MsgsUpdate {
        mst,
        emitted: Vec::new(),
        tctrs,
        gctrs,
    };
    let (q, msg) = match received_from(ev) {
        Some((q, msg)) if msg.is_data() => (q, msg),
        _ => {
            if ev.is_snd() {
                return Ok(up);
            }
            return Err(Error::UnexpectedEvent(ev.to_string()));
        }
    };
    if is_graylisted(q, scores, cfg)? {
        return Ok(up);
    }
    match msg {
        Msg::Payload(pld) => on_payload(me, q, pld, nts, &mut up, cfg)?,
        Msg::IHave(ids) => on_ihave(me, q, ids, &mut up, cfg)?,
        Msg::IWant(ids) => on_iwant(me, q, ids, &mut up, budget),
        _ => unreachable!("filtered to data messages"),
    }
    Ok(up)
}

fn seen_key(pid: &PayloadId, from: &PeerId) -> (MsgKey, PeerId) {
    (MsgKey::Id(pid.clone()), from.clone())
}

/// Caches and marks as seen a payload this peer publishes itself.
pub(super) fn record_publish(me: &PeerId, mst: &mut MsgsState, pld: &Payload) {
    if mst.is_seen(&pld.pid) {
        return;
    }
    mst.recently_seen.insert(seen_key(&pld.pid, me), Rational::zero());
    mst.pld_cache.push((pld.clone(), me.clone()));
    mst.hwindows[0] += 1;
}

fn on_payload(
    me: &PeerId,
    q: &PeerId,
    pld: &Payload,
    nts: &NbrTopicState,
    up: &mut MsgsUpdate,
    cfg: &ScoringConfig,
) -> Result<()> {
    let t = &pld.top;
    let p = &cfg.require(t)?.params;
    if !pld.is_valid() {
        tc_mut(&mut up.tctrs, q, t).imd += Rational::one();
        return Ok(());
    }
    let from_mesh = nts.in_mesh(t, q);
    let mst = &mut up.mst;
    if !mst.is_seen(&pld.pid) {
        let tc = tc_mut(&mut up.tctrs, q, t);
        bump_capped(&mut tc.fmd, &Rational::from_u64(p.p2cap));
        if from_mesh {
            bump_capped(&mut tc.mmd, &p.mesh_message_deliveries_cap);
        }
        mst.recently_seen.insert(seen_key(&pld.pid, q), Rational::zero());
        mst.pld_cache.push((pld.clone(), q.clone()));
        mst.waiting_for.remove(&pld.pid);
        mst.hwindows[0] += 1;
        if nts.is_subscribed(t) {
            for r in nts.mesh_of(t) {
                if r != q && *r != pld.origin && r != me {
                    up.emitted.push(Event::snd(me, r, Msg::Payload(pld.clone())));
                }
            }
        }
    } else if from_mesh {
        let key = seen_key(&pld.pid, q);
        if let std::collections::btree_map::Entry::Vacant(slot) = mst.recently_seen.entry(key) {
            let tc = tc_mut(&mut up.tctrs, q, t);
            bump_capped(&mut tc.mmd, &p.mesh_message_deliveries_cap);
            slot.insert(Rational::zero());
        }
    }
    Ok(())
}

fn on_ihave(me: &PeerId, q: &PeerId, ids: &[PayloadId], up: &mut MsgsUpdate, cfg: &ScoringConfig) -> Result<()> {
    let p = &cfg.global()?.params;
    let mst = &mut up.mst;
    mst.ihaves_received += 1;
    let count = mst.ihave_counts.entry(q.clone()).or_insert(0);
    *count += 1;
    if *count > p.dlazy as u64 {
        gc_mut(&mut up.gctrs, q).bhvo += Rational::one();
    }
    let mut outstanding = mst.waiting_for.values().filter(|x| *x == q).count();
    let mut accepted = Vec::new();
    for pid in ids {
        if outstanding >= p.d {
            break;
        }
        if mst.is_seen(pid) || mst.waiting_for.contains_key(pid) {
            continue;
        }
        mst.waiting_for.insert(pid.clone(), q.clone());
        accepted.push(pid.clone());
        outstanding += 1;
    }
    if !accepted.is_empty() {
        up.emitted.push(Event::snd(me, q, Msg::IWant(accepted)));
    }
    Ok(())
}

fn on_iwant(me: &PeerId, q: &PeerId, ids: &[PayloadId], up: &mut MsgsUpdate, budget: &RunBudget) {
    let limit = Rational::from_u64(budget.limits.max_iwant_serves);
    for pid in ids {
        let pld = match up.mst.cached(pid) {
            Some(p) => p.clone(),
            None => continue,
        };
        let served = up.mst.served.entry(seen_key(pid, q)).or_default();
        if *served >= limit {
            continue;
        }
        *served += Rational::one();
        up.emitted.push(Event::snd(me, q, Msg::Payload(pld)));
    }
}
