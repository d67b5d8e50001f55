//! The peer score function.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::config::{Params, ScoringConfig, TopicParams};
use crate::error::Result;
use crate::ids::PeerId;
use crate::rational::Rational;
use crate::types::{lookup_gctrs, lookup_tctrs, GctrsMap, GlobalCounters, ScoreMap, TctrsMap, TopicCounters};

pub fn calc_p1(mesh_time: &Rational, quantum: u64, cap: u64) -> Rational {
    let ratio = mesh_time / Rational::from_u64(quantum);
    Rational::min_of(&ratio, &Rational::from_u64(cap))
}

pub fn calc_p2(fmd: &Rational, p2cap: u64) -> Rational {
    Rational::min_of(fmd, &Rational::from_u64(p2cap))
}

/// Squared mesh-delivery deficit, active only once the peer has been in the
/// mesh longer than the activation window.
pub fn calc_p3(
    mesh_time: &Rational,
    activation_window: u64,
    mmd: &Rational,
    cap: &Rational,
    threshold: &Rational,
) -> Rational {
    let eff = Rational::min_of(mmd, cap);
    if *mesh_time > Rational::from_u64(activation_window) && eff < *threshold {
        (threshold - eff).square()
    } else {
        Rational::zero()
    }
}

/// The sticky penalty is accumulated at prune time; here it only passes through.
pub fn calc_p3b(
    _mesh_time: &Rational,
    _activation_window: u64,
    mfp: &Rational,
    _mmd: &Rational,
    _cap: &Rational,
    _threshold: &Rational,
) -> Rational {
    mfp.clone()
}

pub fn calc_p4(imd: &Rational) -> Rational {
    imd.square()
}

pub fn calc_p7(bhvo: &Rational) -> Rational {
    bhvo.square()
}

/// P3 for a counter record under the given params.
pub fn deficit_penalty(tc: &TopicCounters, p: &Params) -> Rational {
    calc_p3(
        &tc.mesh_time,
        p.activation_window,
        &tc.mmd,
        &p.mesh_message_deliveries_cap,
        &p.mesh_message_deliveries_threshold,
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicScoreBreakdown {
    pub p1: Rational,
    pub p2: Rational,
    pub p3: Rational,
    pub p3b: Rational,
    pub p4: Rational,
    pub topic_score: Rational,
}

pub fn topic_breakdown(tc: &TopicCounters, wp: &TopicParams) -> TopicScoreBreakdown {
    let (w, p) = (&wp.weights, &wp.params);
    let p1 = calc_p1(&tc.mesh_time, p.mesh_time_quantum, p.time_quanta_in_mesh_cap);
    let p2 = calc_p2(&tc.fmd, p.p2cap);
    let p3 = deficit_penalty(tc, p);
    let p3b = calc_p3b(
        &tc.mesh_time,
        p.activation_window,
        &tc.mfp,
        &tc.mmd,
        &p.mesh_message_deliveries_cap,
        &p.mesh_message_deliveries_threshold,
    );
    let p4 = calc_p4(&tc.imd);
    let sum = &w.w1 * &p1 + &w.w2 * &p2 + &w.w3 * &p3 + &w.w3b * &p3b + &w.w4 * &p4;
    let topic_score = &p.topic_weight * sum;
    TopicScoreBreakdown {
        p1,
        p2,
        p3,
        p3b,
        p4,
        topic_score,
    }
}

pub fn calc_score_topic(tc: &TopicCounters, wp: &TopicParams) -> Rational {
    topic_breakdown(tc, wp).topic_score
}

/// Capped topic sum plus the global terms, from already-looked-up counters.
pub fn score_from_parts(
    topic_scores: impl Iterator<Item = Rational>,
    g: &GlobalCounters,
    global: &TopicParams,
) -> Rational {
    let sum: Rational = topic_scores.sum();
    let capped = Rational::min_of(&global.params.topiccap, &sum);
    let w = &global.weights;
    capped + &w.w5 * &g.apco + &w.w6 * &g.ipco + &w.w7 * calc_p7(&g.bhvo)
}

pub fn calc_score(p: &PeerId, tctrs: &TctrsMap, gctrs: &GctrsMap, cfg: &ScoringConfig) -> Result<Rational> {
    let global = cfg.global()?;
    let topic_scores = cfg
        .iter()
        .map(|(t, wp)| calc_score_topic(&lookup_tctrs(p, t, tctrs), wp));
    Ok(score_from_parts(topic_scores, &lookup_gctrs(p, gctrs), global))
}

/// Scores for every peer present in either counter map.
pub fn calc_nbr_scores_map(tctrs: &TctrsMap, gctrs: &GctrsMap, cfg: &ScoringConfig) -> Result<ScoreMap> {
    cfg.global()?;
    let peers: BTreeSet<&PeerId> = tctrs.keys().map(|(p, _)| p).chain(gctrs.keys()).collect();
    peers
        .into_iter()
        .map(|p| Ok((p.clone(), calc_score(p, tctrs, gctrs, cfg)?)))
        .collect()
}

fn decay_one(x: &Rational, factor: &Rational, to_zero: &Rational) -> Rational {
    let v = x * factor;
    if v < *to_zero {
        Rational::zero()
    } else {
        v
    }
}

pub fn decay_topic(tc: &TopicCounters, p: &Params) -> TopicCounters {
    let z = &p.decay_to_zero;
    TopicCounters {
        imd: decay_one(&tc.imd, &p.invalid_message_deliveries_decay, z),
        mmd: decay_one(&tc.mmd, &p.mesh_message_deliveries_decay, z),
        mesh_time: tc.mesh_time.clone(),
        fmd: decay_one(&tc.fmd, &p.first_message_deliveries_decay, z),
        mfp: decay_one(&tc.mfp, &p.mesh_failure_penalty_decay, z),
    }
}

pub fn decay_global(g: &GlobalCounters, p: &Params) -> GlobalCounters {
    GlobalCounters {
        apco: g.apco.clone(),
        ipco: g.ipco.clone(),
        bhvo: decay_one(&g.bhvo, &p.behaviour_penalty_decay, &p.decay_to_zero),
    }
}

pub fn decay_counters(tc: &TopicCounters, g: &GlobalCounters, p: &Params) -> (TopicCounters, GlobalCounters) {
    (decay_topic(tc, p), decay_global(g, p))
}

/// Upper bound on any topic score: both rewards at their caps, no penalties.
pub fn max_topic_score(wp: &TopicParams) -> Rational {
    let (w, p) = (&wp.weights, &wp.params);
    &p.topic_weight * (&w.w1 * Rational::from_u64(p.time_quanta_in_mesh_cap) + &w.w2 * Rational::from_u64(p.p2cap))
}
