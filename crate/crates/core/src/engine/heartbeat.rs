use crate::config::ScoringConfig;
use crate::error::{Error, Result};
use crate::event::{Event, Msg};
use crate::ids::{PayloadId, PeerId, TopicId};
use crate::rational::Rational;
use crate::rng;
use crate::scoring::{calc_nbr_scores_map, decay_global, decay_topic};
use crate::types::{lookup_score, PeerState};

use super::nbr::refresh_fanout_lists;
use super::{gc_mut, leave_mesh_counters, tc_mut, RunBudget, TransitionResult};

/// Periodic maintenance at `me`, in this order: mesh time, scores, broken
/// promises, mesh balancing, fanout, gossip, history shift, decay.
pub fn heartbeat(
    me: &PeerId,
    mut st: PeerState,
    elapsed: &Rational,
    cfg: &ScoringConfig,
    budget: &RunBudget,
) -> Result<TransitionResult> {
    if !elapsed.is_positive() {
        return Err(Error::NonPositiveElapsed(elapsed.clone()));
    }
    let global = cfg.global()?.clone();
    let mut emitted = Vec::new();

    let subscribed: Vec<TopicId> = st.nts.subscribed_topics().cloned().collect();
    for t in &subscribed {
        let sat = cfg.require(t)?.params.mesh_time_saturation();
        for m in st.nts.mesh_of(t).to_vec() {
            let tc = tc_mut(&mut st.tctrs, &m, t);
            let next = &tc.mesh_time + elapsed;
            tc.mesh_time = Rational::min_of(&next, &sat);
        }
    }

    st.scores = calc_nbr_scores_map(&st.tctrs, &st.gctrs, cfg)?;

    for (_, q) in std::mem::take(&mut st.mst.waiting_for) {
        gc_mut(&mut st.gctrs, &q).bhvo += Rational::one();
    }

    for t in &subscribed {
        maintain_mesh(me, t, &mut st, cfg, budget, &mut emitted)?;
    }

    let tracked: Vec<TopicId> = st.nts.last_pub.keys().cloned().collect();
    for t in tracked {
        let wp = cfg.require(&t)?;
        let age = st.nts.last_pub[&t].clone() + elapsed;
        if age > wp.params.fanout_ttl {
            st.nts.last_pub.remove(&t);
            st.nts.fanout.remove(&t);
        } else {
            st.nts.last_pub.insert(t.clone(), age);
            refresh_fanout_lists(me, &t, &mut st.nts, &st.scores, wp.params.d, budget.seed);
        }
    }

    st.mst.ihaves_sent = 0;
    let windows = global.params.mcache_gsp.floor();
    let windows = usize::try_from(windows).unwrap_or(usize::MAX);
    let recent: usize = st.mst.hwindows.iter().take(windows).map(|c| *c as usize).sum();
    let cache_len = st.mst.pld_cache.len();
    let recent = &st.mst.pld_cache[cache_len - recent.min(cache_len)..];
    for t in &subscribed {
        let pids: Vec<PayloadId> = recent
            .iter()
            .filter(|(p, _)| &p.top == t)
            .map(|(p, _)| p.pid.clone())
            .collect();
        if pids.is_empty() {
            continue;
        }
        let mesh = st.nts.mesh_of(t);
        let candidates: Vec<PeerId> = st
            .nts
            .subs_of(t)
            .iter()
            .filter(|p| *p != me && !mesh.contains(p) && !lookup_score(p, &st.scores).is_negative())
            .cloned()
            .collect();
        let dlazy = cfg.require(t)?.params.dlazy;
        for p in rng::select(budget.seed, me, "gossip", Some(t), candidates, dlazy) {
            emitted.push(Event::snd(me, &p, Msg::IHave(pids.clone())));
            st.mst.ihaves_sent += 1;
        }
    }

    shift_history(&mut st, elapsed, cfg)?;

    st.decay_clock += elapsed;
    while st.decay_clock >= global.params.decay_interval {
        st.decay_clock -= &global.params.decay_interval;
        for ((_, t), tc) in st.tctrs.iter_mut() {
            *tc = decay_topic(tc, &cfg.require(t)?.params);
        }
        for g in st.gctrs.values_mut() {
            *g = decay_global(g, &global.params);
        }
    }

    Ok(TransitionResult { state: st, emitted })
}

fn maintain_mesh(
    me: &PeerId,
    t: &TopicId,
    st: &mut PeerState,
    cfg: &ScoringConfig,
    budget: &RunBudget,
    emitted: &mut Vec<Event>,
) -> Result<()> {
    let wp = cfg.require(t)?;
    let p = &wp.params;
    let seed = budget.seed;
    let mut mesh = st.nts.mesh.get(t).cloned().unwrap_or_default();
    let mut pruned = Vec::new();

    mesh.retain(|m| {
        let keep = !lookup_score(m, &st.scores).is_negative();
        if !keep {
            pruned.push(m.clone());
        }
        keep
    });

    let mut grafted = Vec::new();
    if mesh.len() < p.dlow {
        let cands = candidates(me, t, st, &mesh, &pruned, |s| !s.is_negative());
        grafted = rng::select(seed, me, "graft", Some(t), cands, p.d - mesh.len());
    } else if mesh.len() > p.dhigh {
        let keep = rng::select(seed, me, "trim", Some(t), mesh.clone(), p.d);
        for m in &mesh {
            if !keep.contains(m) {
                pruned.push(m.clone());
            }
        }
        mesh.retain(|m| keep.contains(m));
    } else if !mesh.is_empty() {
        let mut ranked: Vec<Rational> = mesh.iter().map(|m| lookup_score(m, &st.scores)).collect();
        ranked.sort();
        let median = ranked[ranked.len() / 2].clone();
        if median < p.opportunistic_graft_threshold {
            let cands = candidates(me, t, st, &mesh, &pruned, |s| *s > median);
            grafted = rng::select(
                seed,
                me,
                "opportunistic",
                Some(t),
                cands,
                budget.limits.opportunistic_graft_peers,
            );
        }
    }

    for g in &grafted {
        mesh.push(g.clone());
        emitted.push(Event::snd(me, g, Msg::Graft(t.clone())));
    }
    for q in &pruned {
        emitted.push(Event::snd(me, q, Msg::Prune(t.clone())));
        leave_mesh_counters(&mut st.tctrs, q, t, wp, true);
    }
    st.nts.mesh.insert(t.clone(), mesh);
    Ok(())
}

/// Known subscribers outside the mesh, not just pruned, whose score passes `pred`.
fn candidates(
    me: &PeerId,
    t: &TopicId,
    st: &PeerState,
    mesh: &[PeerId],
    pruned: &[PeerId],
    pred: impl Fn(&Rational) -> bool,
) -> Vec<PeerId> {
    st.nts
        .subs_of(t)
        .iter()
        .filter(|c| *c != me && !mesh.contains(c) && !pruned.contains(c) && pred(&lookup_score(c, &st.scores)))
        .cloned()
        .collect()
}

fn shift_history(st: &mut PeerState, elapsed: &Rational, cfg: &ScoringConfig) -> Result<()> {
    let p = &cfg.global()?.params;
    let mst = &mut st.mst;
    mst.hwindows.insert(0, 0);
    while mst.hwindows.len() > p.mcache_len {
        let dropped = mst.hwindows.pop().unwrap_or(0) as usize;
        let evicted: Vec<PayloadId> = mst
            .pld_cache
            .drain(..dropped.min(mst.pld_cache.len()))
            .map(|(p, _)| p.pid)
            .collect();
        if !evicted.is_empty() {
            mst.served.retain(|(k, _), _| !evicted.contains(k.pid()));
        }
    }
    let ttl = &p.seen_ttl;
    mst.recently_seen.retain(|_, age| {
        *age += elapsed;
        *age <= *ttl
    });
    mst.ihaves_received = 0;
    mst.ihave_counts.clear();
    Ok(())
}
