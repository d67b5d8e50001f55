//! Score-function properties, input generators and counterexample search.
//!
//! Each check returns [`Verdict::Pass`] or a [`Verdict::Fail`] carrying the
//! exact scores that demonstrate the violation. Checks whose hypothesis is
//! not met pass vacuously.

pub mod gen;
mod search;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::{ScoringConfig, TopicParams};
use crate::error::Result;
use crate::ids::{PeerId, TopicId};
use crate::rational::Rational;
use crate::scoring::{calc_score, calc_score_topic, max_topic_score};
use crate::types::{lookup_tctrs, GctrsMap, GlobalCounters, TctrsMap, TopicCounters};

pub use search::{
    check_case, format_report, parse_report, replay, search_counterexamples, shrink, Case, Counterexample, ReportHeader,
};

pub type Witness = BTreeMap<String, Rational>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(Witness),
}

impl Verdict {
    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }

    pub fn is_pass(&self) -> bool {
        !self.is_fail()
    }

    fn fail(entries: &[(&str, &Rational)]) -> Self {
        Verdict::Fail(entries.iter().map(|(k, v)| (k.to_string(), (*v).clone())).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Prop1,
    Prop2,
    Prop3,
    Prop4,
    Maxbound,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::Prop1,
        Property::Prop2,
        Property::Prop3,
        Property::Prop4,
        Property::Maxbound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Prop1 => "prop1",
            Property::Prop2 => "prop2",
            Property::Prop3 => "prop3",
            Property::Prop4 => "prop4",
            Property::Maxbound => "maxbound",
        }
    }

    /// Whether the property is expected to hold on every generated input.
    pub fn expected_to_hold(self) -> bool {
        matches!(self, Property::Prop3 | Property::Prop4 | Property::Maxbound)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown property {s:?} (expected prop1, prop2, prop3, prop4 or maxbound)"))
    }
}

/// Counters whose increase should lower the score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BadCounter {
    #[serde(rename = "invalidMessageDeliveries")]
    InvalidMessageDeliveries,
    #[serde(rename = "meshFailurePenalty")]
    MeshFailurePenalty,
    #[serde(rename = "bhvo")]
    Bhvo,
}

impl BadCounter {
    pub const ALL: [BadCounter; 3] = [
        BadCounter::InvalidMessageDeliveries,
        BadCounter::MeshFailurePenalty,
        BadCounter::Bhvo,
    ];
}

/// Counters whose increase should not lower the score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GoodCounter {
    #[serde(rename = "firstMessageDeliveries")]
    FirstMessageDeliveries,
    #[serde(rename = "meshMessageDeliveries")]
    MeshMessageDeliveries,
    #[serde(rename = "meshTime")]
    MeshTime,
}

impl GoodCounter {
    pub const ALL: [GoodCounter; 3] = [
        GoodCounter::FirstMessageDeliveries,
        GoodCounter::MeshMessageDeliveries,
        GoodCounter::MeshTime,
    ];
}

/// If `p` has counters recorded for `top` and a positive overall score, its
/// score in `top` must be positive too.
pub fn check_prop1(ptc: &TctrsMap, pcm: &GctrsMap, p: &PeerId, top: &TopicId, cfg: &ScoringConfig) -> Result<Verdict> {
    let score = calc_score(p, ptc, pcm, cfg)?;
    if !ptc.contains_key(&(p.clone(), top.clone())) || !score.is_positive() {
        return Ok(Verdict::Pass);
    }
    let topic_score = calc_score_topic(&lookup_tctrs(p, top, ptc), cfg.require(top)?);
    if topic_score.is_positive() {
        Ok(Verdict::Pass)
    } else {
        Ok(Verdict::fail(&[("score", &score), ("topicScore", &topic_score)]))
    }
}

/// Raising a bad counter of `p` by `delta` must strictly lower its overall
/// score. Topic counters are raised in `top`; `bhvo` is global.
#[allow(clippy::too_many_arguments)]
pub fn check_prop2(
    ptc: &TctrsMap,
    pcm: &GctrsMap,
    p: &PeerId,
    top: &TopicId,
    delta: &Rational,
    which: BadCounter,
    cfg: &ScoringConfig,
) -> Result<Verdict> {
    cfg.require(top)?;
    let before = calc_score(p, ptc, pcm, cfg)?;
    let mut ptc2 = ptc.clone();
    let mut pcm2 = pcm.clone();
    match which {
        BadCounter::Bhvo => pcm2.entry(p.clone()).or_default().bhvo += delta,
        _ => {
            let tc = ptc2.entry((p.clone(), top.clone())).or_default();
            match which {
                BadCounter::InvalidMessageDeliveries => tc.imd += delta,
                _ => tc.mfp += delta,
            }
        }
    }
    let after = calc_score(p, &ptc2, &pcm2, cfg)?;
    if after < before {
        Ok(Verdict::Pass)
    } else {
        Ok(Verdict::fail(&[("before", &before), ("after", &after)]))
    }
}

/// Once past the activation window, raising a good counter by `delta` must
/// not lower the topic score.
pub fn check_prop3(tc: &TopicCounters, delta: &Rational, which: GoodCounter, wp: &TopicParams) -> Verdict {
    if tc.mesh_time <= Rational::from_u64(wp.params.activation_window) {
        return Verdict::Pass;
    }
    let mut raised = tc.clone();
    match which {
        GoodCounter::FirstMessageDeliveries => raised.fmd += delta,
        GoodCounter::MeshMessageDeliveries => raised.mmd += delta,
        GoodCounter::MeshTime => raised.mesh_time += delta,
    }
    let before = calc_score_topic(tc, wp);
    let after = calc_score_topic(&raised, wp);
    if after >= before {
        Verdict::Pass
    } else {
        Verdict::fail(&[("before", &before), ("after", &after)])
    }
}

/// Overall scores of two peers holding the given per-topic and global
/// counters, evaluated side by side in one counter map.
pub fn prop4_scores(
    tc_a: &BTreeMap<TopicId, TopicCounters>,
    tc_b: &BTreeMap<TopicId, TopicCounters>,
    g_a: &GlobalCounters,
    g_b: &GlobalCounters,
    cfg: &ScoringConfig,
) -> Result<(Rational, Rational)> {
    let (a, b) = (PeerId::new("a"), PeerId::new("b"));
    let mut tctrs = TctrsMap::new();
    for (who, tcs) in [(&a, tc_a), (&b, tc_b)] {
        for (t, tc) in tcs {
            tctrs.insert((who.clone(), t.clone()), tc.clone());
        }
    }
    let gctrs: GctrsMap = [(a.clone(), g_a.clone()), (b.clone(), g_b.clone())].into();
    Ok((
        calc_score(&a, &tctrs, &gctrs, cfg)?,
        calc_score(&b, &tctrs, &gctrs, cfg)?,
    ))
}

/// Equal counters must give equal scores.
pub fn check_prop4(
    tc_a: &BTreeMap<TopicId, TopicCounters>,
    tc_b: &BTreeMap<TopicId, TopicCounters>,
    g_a: &GlobalCounters,
    g_b: &GlobalCounters,
    cfg: &ScoringConfig,
) -> Result<Verdict> {
    let (sa, sb) = prop4_scores(tc_a, tc_b, g_a, g_b, cfg)?;
    if tc_a != tc_b || g_a != g_b || sa == sb {
        Ok(Verdict::Pass)
    } else {
        Ok(Verdict::fail(&[("scoreA", &sa), ("scoreB", &sb)]))
    }
}

/// No topic score exceeds the configured maximum.
pub fn check_maxbound(tc: &TopicCounters, wp: &TopicParams) -> Verdict {
    let s = calc_score_topic(tc, wp);
    let m = max_topic_score(wp);
    if s <= m {
        Verdict::Pass
    } else {
        Verdict::fail(&[("topicScore", &s), ("maxTopicScore", &m)])
    }
}
