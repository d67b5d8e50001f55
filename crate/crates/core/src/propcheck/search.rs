use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gen::{
    gen_counter_maps, gen_counters, gen_topic_counters, gen_topic_in, random_counters, random_global, random_rational,
    random_topic_params,
};
use super::{
    check_maxbound, check_prop1, check_prop2, check_prop3, check_prop4, BadCounter, GoodCounter, Property, Verdict,
    Witness,
};
use crate::config::{ScoringConfig, TopicParams};
use crate::error::{Error, Result};
use crate::ids::{PeerId, TopicId};
use crate::rational::Rational;
use crate::types::{as_pairs, GctrsMap, GlobalCounters, TctrsMap, TopicCounters};

/// Peers populated in generated counter maps.
const PEERS: [&str; 2] = ["p3", "p4"];

fn deltas() -> [Rational; 4] {
    [
        Rational::new(1, 4),
        Rational::new(1, 2),
        Rational::one(),
        Rational::from(2i64),
    ]
}

/// The complete input of one property check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "property", rename_all = "lowercase")]
#[allow(clippy::large_enum_variant)]
pub enum Case {
    Prop1 {
        peer: PeerId,
        topic: TopicId,
        #[serde(with = "as_pairs")]
        tctrs: TctrsMap,
        gctrs: GctrsMap,
    },
    Prop2 {
        peer: PeerId,
        topic: TopicId,
        #[serde(with = "as_pairs")]
        tctrs: TctrsMap,
        gctrs: GctrsMap,
        delta: Rational,
        counter: BadCounter,
    },
    Prop3 {
        topic: TopicId,
        tc: TopicCounters,
        delta: Rational,
        counter: GoodCounter,
    },
    Prop4 {
        a: BTreeMap<TopicId, TopicCounters>,
        b: BTreeMap<TopicId, TopicCounters>,
        ga: GlobalCounters,
        gb: GlobalCounters,
    },
    Maxbound {
        tc: TopicCounters,
        wp: TopicParams,
    },
}

impl Case {
    pub fn property(&self) -> Property {
        match self {
            Case::Prop1 { .. } => Property::Prop1,
            Case::Prop2 { .. } => Property::Prop2,
            Case::Prop3 { .. } => Property::Prop3,
            Case::Prop4 { .. } => Property::Prop4,
            Case::Maxbound { .. } => Property::Maxbound,
        }
    }

    /// Every counter value that shrinking may lower.
    fn counters_mut(&mut self) -> Vec<&mut Rational> {
        fn tc_fields(tc: &mut TopicCounters) -> [&mut Rational; 5] {
            [&mut tc.imd, &mut tc.mmd, &mut tc.mesh_time, &mut tc.fmd, &mut tc.mfp]
        }
        let mut out = Vec::new();
        match self {
            Case::Prop1 { tctrs, gctrs, .. } | Case::Prop2 { tctrs, gctrs, .. } => {
                for tc in tctrs.values_mut() {
                    out.extend(tc_fields(tc));
                }
                for g in gctrs.values_mut() {
                    out.extend([&mut g.apco, &mut g.ipco, &mut g.bhvo]);
                }
            }
            Case::Prop3 { tc, .. } | Case::Maxbound { tc, .. } => out.extend(tc_fields(tc)),
            Case::Prop4 { .. } => {}
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: u64,
    pub case: Case,
    pub witness: Witness,
}

impl Counterexample {
    pub fn property(&self) -> Property {
        self.case.property()
    }
}

pub fn check_case(case: &Case, cfg: &ScoringConfig) -> Result<Verdict> {
    match case {
        Case::Prop1 {
            peer,
            topic,
            tctrs,
            gctrs,
        } => check_prop1(tctrs, gctrs, peer, topic, cfg),
        Case::Prop2 {
            peer,
            topic,
            tctrs,
            gctrs,
            delta,
            counter,
        } => check_prop2(tctrs, gctrs, peer, topic, delta, *counter, cfg),
        Case::Prop3 {
            topic,
            tc,
            delta,
            counter,
        } => Ok(check_prop3(tc, delta, *counter, cfg.require(topic)?)),
        Case::Prop4 { a, b, ga, gb } => check_prop4(a, b, ga, gb, cfg),
        Case::Maxbound { tc, wp } => Ok(check_maxbound(tc, wp)),
    }
}

/// True iff re-running the check fails with exactly the recorded witness.
pub fn replay(cx: &Counterexample, cfg: &ScoringConfig) -> Result<bool> {
    Ok(check_case(&cx.case, cfg)? == Verdict::Fail(cx.witness.clone()))
}

fn pick<T: Clone, R: Rng>(rng: &mut R, xs: &[T]) -> T {
    xs[rng.random_range(0..xs.len())].clone()
}

fn gen_case<R: Rng>(property: Property, rng: &mut R, cfg: &ScoringConfig, topics: &[TopicId]) -> Result<Case> {
    let peers: Vec<PeerId> = PEERS.iter().map(|p| PeerId::new(*p)).collect();
    let n: u64 = rng.random_range(0..1 << 24);
    Ok(match property {
        Property::Prop1 | Property::Prop2 => {
            let (tctrs, gctrs) = gen_counter_maps(n, &peers, topics);
            let peer = pick(rng, &peers);
            let topic = gen_topic_in(rng.random(), topics);
            if property == Property::Prop1 {
                Case::Prop1 {
                    peer,
                    topic,
                    tctrs,
                    gctrs,
                }
            } else {
                Case::Prop2 {
                    peer,
                    topic,
                    tctrs,
                    gctrs,
                    delta: pick(rng, &deltas()),
                    counter: pick(rng, &BadCounter::ALL),
                }
            }
        }
        Property::Prop3 => {
            let topic = gen_topic_in(rng.random(), topics);
            let aw = Rational::from_u64(cfg.require(&topic)?.params.activation_window);
            let mut tc = if rng.random_bool(0.5) {
                gen_counters(n)
            } else {
                random_counters(rng)
            };
            if tc.mesh_time <= aw {
                tc.mesh_time = &aw + Rational::one() + &tc.mesh_time;
            }
            let delta = if rng.random_bool(0.5) {
                pick(rng, &deltas())
            } else {
                random_rational(rng, 40, 4) + Rational::new(1, 8)
            };
            Case::Prop3 {
                topic,
                tc,
                delta,
                counter: pick(rng, &GoodCounter::ALL),
            }
        }
        Property::Prop4 => {
            let ga = random_global(rng);
            let gb = GlobalCounters::new(ga.apco.clone(), ga.ipco.clone(), ga.bhvo.clone());
            Case::Prop4 {
                a: gen_topic_counters(n, topics),
                b: gen_topic_counters(n, topics),
                ga,
                gb,
            }
        }
        Property::Maxbound => {
            let wp = if rng.random_bool(0.5) {
                cfg.require(&gen_topic_in(rng.random(), topics))?.clone()
            } else {
                random_topic_params(rng, cfg.global()?)
            };
            let tc = if rng.random_bool(0.5) {
                gen_counters(n)
            } else {
                random_counters(rng)
            };
            Case::Maxbound { tc, wp }
        }
    })
}

/// Runs `trials` generated checks of `property` and returns every failure,
/// in trial order. Deterministic in `seed`.
pub fn search_counterexamples(
    property: Property,
    cfg: &ScoringConfig,
    trials: u64,
    seed: u64,
) -> Result<Vec<Counterexample>> {
    cfg.global()?;
    let topics: Vec<TopicId> = cfg.topics().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for trial in 0..trials {
        let case = gen_case(property, &mut rng, cfg, &topics)?;
        if let Verdict::Fail(witness) = check_case(&case, cfg)? {
            out.push(Counterexample { trial, case, witness });
        }
    }
    Ok(out)
}

fn still_fails(case: &Case, cfg: &ScoringConfig) -> Result<bool> {
    Ok(check_case(case, cfg)?.is_fail())
}

/// Greedy minimization: drops counter entries the failure does not depend
/// on, then lowers each counter toward zero (first straight to zero, then
/// by repeated halving) while the check keeps failing.
pub fn shrink(cx: &Counterexample, cfg: &ScoringConfig) -> Result<Counterexample> {
    let mut case = cx.case.clone();
    if !still_fails(&case, cfg)? {
        return Ok(cx.clone());
    }
    if let Case::Prop1 { peer, topic, .. } | Case::Prop2 { peer, topic, .. } = &case {
        let (peer, topic) = (peer.clone(), topic.clone());
        let keys: Vec<(PeerId, TopicId)> = match &case {
            Case::Prop1 { tctrs, .. } | Case::Prop2 { tctrs, .. } => tctrs.keys().cloned().collect(),
            _ => unreachable!(),
        };
        for k in keys.into_iter().filter(|k| *k != (peer.clone(), topic.clone())) {
            let mut trial = case.clone();
            if let Case::Prop1 { tctrs, .. } | Case::Prop2 { tctrs, .. } = &mut trial {
                tctrs.remove(&k);
            }
            if still_fails(&trial, cfg)? {
                case = trial;
            }
        }
        let others: Vec<PeerId> = match &case {
            Case::Prop1 { gctrs, .. } | Case::Prop2 { gctrs, .. } => {
                gctrs.keys().filter(|p| **p != peer).cloned().collect()
            }
            _ => unreachable!(),
        };
        for p in others {
            let mut trial = case.clone();
            if let Case::Prop1 { gctrs, .. } | Case::Prop2 { gctrs, .. } = &mut trial {
                gctrs.remove(&p);
            }
            if still_fails(&trial, cfg)? {
                case = trial;
            }
        }
    }
    let slots = case.counters_mut().len();
    loop {
        let mut changed = false;
        for i in 0..slots {
            loop {
                let current = case.counters_mut()[i].clone();
                if current.is_zero() {
                    break;
                }
                let half = Rational::from(num_rational::BigRational::from_integer(
                    (&current / Rational::from(2i64)).floor(),
                ));
                let mut improved = false;
                for cand in [Rational::zero(), half] {
                    if cand >= current {
                        continue;
                    }
                    let mut trial = case.clone();
                    *trial.counters_mut()[i] = cand;
                    if still_fails(&trial, cfg)? {
                        case = trial;
                        improved = true;
                        break;
                    }
                }
                if !improved {
                    break;
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let witness = match check_case(&case, cfg)? {
        Verdict::Fail(w) => w,
        Verdict::Pass => unreachable!("shrinking only keeps failing cases"),
    };
    Ok(Counterexample {
        trial: cx.trial,
        case,
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportHeader {
    pub property: Property,
    pub profile: String,
    pub trials: u64,
    pub seed: u64,
    pub counterexamples: usize,
}

/// `# key value` header lines followed by one JSON counterexample per line.
pub fn format_report(h: &ReportHeader, cxs: &[Counterexample]) -> String {
    let mut s = format!(
        "# property {}\n# profile {}\n# trials {}\n# seed {}\n# counterexamples {}\n",
        h.property, h.profile, h.trials, h.seed, h.counterexamples
    );
    for cx in cxs {
        s.push_str(&serde_json::to_string(cx).expect("counterexamples serialize"));
        s.push('\n');
    }
    s
}

pub fn parse_report(text: &str) -> Result<(ReportHeader, Vec<Counterexample>)> {
    let mut fields: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    let mut cxs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest
                .trim()
                .split_once(' ')
                .ok_or_else(|| Error::parse(ln, "header line needs a key and a value"))?;
            fields.insert(k, (ln, v.trim()));
        } else {
            cxs.push(serde_json::from_str(line).map_err(|e| Error::parse(ln, e.to_string()))?);
        }
    }
    fn get<T: std::str::FromStr>(f: &BTreeMap<&str, (usize, &str)>, k: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let (ln, v) = f.get(k).ok_or_else(|| Error::parse(0, format!("missing header {k}")))?;
        v.parse().map_err(|e: T::Err| Error::parse(*ln, e.to_string()))
    }
    let header = ReportHeader {
        property: get(&fields, "property")?,
        profile: get(&fields, "profile")?,
        trials: get(&fields, "trials")?,
        seed: get(&fields, "seed")?,
        counterexamples: get(&fields, "counterexamples")?,
    };
    Ok((header, cxs))
}
