//! Input generators.
//!
//! The `gen_*` functions are index-driven enumerators over the restricted
//! value ranges: lows in {0, 1}, highs in (300, 400], and counter records
//! that are either well-behaved or throttled. The `random_*` functions draw
//! unrestricted but valid inputs from an rng.

use std::collections::BTreeMap;

use rand::Rng;

use crate::config::{TopicParams, Weights};
use crate::ids::{PeerId, TopicId};
use crate::rational::Rational;
use crate::types::{GctrsMap, GlobalCounters, TctrsMap, TopicCounters};

pub const TOPICS: [&str; 5] = ["AGG", "BLOCKS", "SUB1", "SUB2", "SUB3"];

pub fn gen_topic(n: u64) -> TopicId {
    TopicId::new(TOPICS[(n % TOPICS.len() as u64) as usize])
}

/// The `n mod len` element of `topics`. Panics on an empty list.
pub fn gen_topic_in(n: u64, topics: &[TopicId]) -> TopicId {
    topics[(n % topics.len() as u64) as usize].clone()
}

/// Bit parity, so that lows still vary along the bad indices (multiples of 4).
pub fn gen_low(n: u64) -> u64 {
    u64::from(n.count_ones() % 2)
}

pub fn gen_high(n: u64) -> u64 {
    301 + n % 100
}

pub fn is_bad_index(n: u64) -> bool {
    n.is_multiple_of(4)
}

/// Every fourth index is a throttling peer: in the mesh for a long time but
/// delivering almost nothing. The rest deliver plenty. Invalid deliveries
/// and the sticky penalty stay at zero in both shapes.
pub fn gen_counters(n: u64) -> TopicCounters {
    let r = |v: u64| Rational::from_u64(v);
    if is_bad_index(n) {
        TopicCounters::new(
            Rational::zero(),
            r(gen_low(n)),
            r(gen_high(n.wrapping_add(1))),
            r(gen_low(n.wrapping_add(2))),
            Rational::zero(),
        )
    } else {
        TopicCounters::new(
            Rational::zero(),
            r(gen_high(n)),
            r(gen_high(n.wrapping_add(1))),
            r(gen_high(n.wrapping_add(2))),
            Rational::zero(),
        )
    }
}

/// Counters for every (peer, topic) pair, peers outermost, using indices
/// `n * |peers| * |topics| + i`. Global counters are all zero.
pub fn gen_counter_maps(n: u64, peers: &[PeerId], topics: &[TopicId]) -> (TctrsMap, GctrsMap) {
    let width = (peers.len() * topics.len()) as u64;
    let mut tctrs = TctrsMap::new();
    let mut i = 0;
    for p in peers {
        for t in topics {
            tctrs.insert(
                (p.clone(), t.clone()),
                gen_counters(n.wrapping_mul(width).wrapping_add(i)),
            );
            i += 1;
        }
    }
    let gctrs = peers.iter().map(|p| (p.clone(), GlobalCounters::default())).collect();
    (tctrs, gctrs)
}

/// A non-negative rational `a/b` with `a <= max_num` and `1 <= b <= max_den`.
pub fn random_rational<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Rational {
    Rational::new(rng.random_range(0..=max_num), rng.random_range(1..=max_den))
}

pub fn random_counters<R: Rng>(rng: &mut R) -> TopicCounters {
    TopicCounters::new(
        random_rational(rng, 20, 4),
        random_rational(rng, 60, 4),
        random_rational(rng, 800, 2),
        random_rational(rng, 200, 4),
        random_rational(rng, 100, 4),
    )
}

pub fn random_global<R: Rng>(rng: &mut R) -> GlobalCounters {
    GlobalCounters::new(
        random_rational(rng, 50, 2),
        random_rational(rng, 5, 1),
        random_rational(rng, 10, 4),
    )
}

/// Weights and score-relevant params drawn at random within the validity
/// bounds. Fields that the score function ignores are copied from `base`.
pub fn random_topic_params<R: Rng>(rng: &mut R, base: &TopicParams) -> TopicParams {
    let neg = |rng: &mut R, max: i64| -random_rational(rng, max, 4);
    let weights = Weights {
        w1: random_rational(rng, 8, 4),
        w2: random_rational(rng, 8, 4),
        w3: neg(rng, 8),
        w3b: neg(rng, 8),
        w4: -Rational::new(rng.random_range(1..=40), rng.random_range(1..=4)),
        w5: random_rational(rng, 8, 4),
        w6: -Rational::new(rng.random_range(1..=8), rng.random_range(1..=4)),
        w7: -Rational::new(rng.random_range(1..=8), rng.random_range(1..=4)),
    };
    let mut params = base.params.clone();
    params.activation_window = rng.random_range(0..=120);
    params.mesh_time_quantum = rng.random_range(1..=30);
    params.p2cap = rng.random_range(0..=200);
    params.time_quanta_in_mesh_cap = rng.random_range(0..=600);
    let threshold = Rational::new(rng.random_range(1..=40), rng.random_range(1..=4));
    params.mesh_message_deliveries_cap = &threshold + random_rational(rng, 40, 4);
    params.mesh_message_deliveries_threshold = threshold;
    params.topiccap = random_rational(rng, 200, 2);
    params.topic_weight = random_rational(rng, 12, 4);
    TopicParams { weights, params }
}

/// Per-topic counters from consecutive indices starting at `n`.
pub fn gen_topic_counters(n: u64, topics: &[TopicId]) -> BTreeMap<TopicId, TopicCounters> {
    topics
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), gen_counters(n.wrapping_add(i as u64))))
        .collect()
}
