//! Scoring configuration: per-topic weights and parameters.
//!
//! The on-disk format is TOML. Each `[topics.<NAME>]` table holds a
//! `weights` and a `params` sub-table; an optional `[defaults]` table with
//! the same shape is merged underneath every topic. Rational values are
//! written as integer literals or `"n/d"` strings and parse exactly.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::TopicId;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weights {
    pub w1: Rational,
    pub w2: Rational,
    pub w3: Rational,
    pub w3b: Rational,
    pub w4: Rational,
    pub w5: Rational,
    pub w6: Rational,
    pub w7: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Params {
    pub activation_window: u64,
    pub mesh_time_quantum: u64,
    pub p2cap: u64,
    pub time_quanta_in_mesh_cap: u64,
    pub mesh_message_deliveries_cap: Rational,
    pub mesh_message_deliveries_threshold: Rational,
    pub topiccap: Rational,
    pub gray_list_threshold: Rational,
    pub d: usize,
    pub dlow: usize,
    pub dhigh: usize,
    pub dlazy: usize,
    pub hbm_interval: Rational,
    #[serde(rename = "fanoutTTL")]
    pub fanout_ttl: Rational,
    pub mcache_len: usize,
    pub mcache_gsp: Rational,
    #[serde(rename = "seenTTL")]
    pub seen_ttl: Rational,
    pub opportunistic_graft_threshold: Rational,
    pub topic_weight: Rational,
    pub mesh_message_deliveries_decay: Rational,
    pub first_message_deliveries_decay: Rational,
    pub behaviour_penalty_decay: Rational,
    pub mesh_failure_penalty_decay: Rational,
    pub invalid_message_deliveries_decay: Rational,
    pub decay_to_zero: Rational,
    pub decay_interval: Rational,
}

impl Params {
    /// Mesh time beyond which neither the time-in-mesh reward nor the
    /// delivery-deficit activation can change any further.
    pub fn mesh_time_saturation(&self) -> Rational {
        let p1_cap = Rational::from_u64(self.time_quanta_in_mesh_cap * self.mesh_time_quantum);
        let past_activation = Rational::from_u64(self.activation_window + 1);
        Rational::max_of(&p1_cap, &past_activation)
    }
}

/// Weights and params governing one topic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicParams {
    pub weights: Weights,
    pub params: Params,
}

/// Map from topic to its weights and params: the entire application profile.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScoringConfig {
    topics: BTreeMap<TopicId, TopicParams>,
}

impl ScoringConfig {
    pub fn new(topics: BTreeMap<TopicId, TopicParams>) -> Self {
        ScoringConfig { topics }
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn get(&self, topic: &TopicId) -> Option<&TopicParams> {
        self.topics.get(topic)
    }

    pub fn require(&self, topic: &TopicId) -> Result<&TopicParams> {
        self.topics.get(topic).ok_or_else(|| Error::UnknownTopic(topic.clone()))
    }

    pub fn contains(&self, topic: &TopicId) -> bool {
        self.topics.contains_key(topic)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TopicId, &TopicParams)> {
        self.topics.iter()
    }

    pub fn topics(&self) -> impl Iterator<Item = &TopicId> {
        self.topics.keys()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&TopicId, &mut TopicParams)> {
        self.topics.iter_mut()
    }

    /// The first entry in key order. Topic-independent values (topic cap,
    /// global weights, message-cache and timing params) are read from here.
    pub fn global(&self) -> Result<&TopicParams> {
        self.topics.values().next().ok_or(Error::EmptyConfig)
    }

    pub fn insert(&mut self, topic: TopicId, tp: TopicParams) {
        self.topics.insert(topic, tp);
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::InvalidConfig(e.to_string()))?;
        let defaults = doc.get("defaults").and_then(|v| v.as_table()).cloned();
        for key in doc.keys() {
            if key != "defaults" && key != "topics" {
                return Err(Error::InvalidConfig(format!("unknown section `{key}`")));
            }
        }
        let topics = doc
            .get("topics")
            .and_then(|v| v.as_table())
            .ok_or_else(|| Error::InvalidConfig("missing [topics] table".into()))?;
        let mut out = BTreeMap::new();
        for (name, body) in topics {
            let topic: TopicId = name.parse().map_err(|e| Error::InvalidConfig(format!("{e}")))?;
            let body = body
                .as_table()
                .ok_or_else(|| Error::InvalidConfig(format!("topic {name} is not a table")))?;
            let merged = match &defaults {
                Some(d) => merge_tables(d, body),
                None => body.clone(),
            };
            let tp: TopicParams = toml::Value::Table(merged)
                .try_into()
                .map_err(|e: toml::de::Error| Error::InvalidConfig(format!("topic {name}: {}", e.message())))?;
            out.insert(topic, tp);
        }
        Ok(ScoringConfig::new(out))
    }

    pub fn to_toml_string(&self) -> String {
        let mut topics = toml::Table::new();
        for (t, tp) in &self.topics {
            topics.insert(
                t.to_string(),
                toml::Value::try_from(tp).expect("topic params serialize"),
            );
        }
        let mut doc = toml::Table::new();
        doc.insert("topics".into(), toml::Value::Table(topics));
        toml::to_string(&doc).expect("config serializes")
    }
}

fn merge_tables(base: &toml::Table, over: &toml::Table) -> toml::Table {
    let mut out = base.clone();
    for (k, v) in over {
        match (out.get(k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => {
                let merged = merge_tables(b, o);
                out.insert(k.clone(), toml::Value::Table(merged));
            }
            _ => {
                out.insert(k.clone(), v.clone());
            }
        }
    }
    out
}

/// One violated constraint of a scoring config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigViolation {
    pub topic: Option<TopicId>,
    pub message: String,
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.topic {
            Some(t) => write!(f, "{t}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every violated invariant of the weights, params and config as a whole.
/// Empty iff the config is valid.
pub fn validate_config(cfg: &ScoringConfig) -> Vec<ConfigViolation> {
    let mut out = Vec::new();
    if cfg.is_empty() {
        out.push(ConfigViolation {
            topic: None,
            message: "config has no topics".into(),
        });
        return out;
    }
    for (topic, tp) in cfg.iter() {
        for message in validate_topic_params(tp) {
            out.push(ConfigViolation {
                topic: Some(topic.clone()),
                message,
            });
        }
    }
    let mut caps = cfg.iter().map(|(_, tp)| &tp.params.topiccap);
    let first = caps.next().expect("non-empty");
    if caps.any(|c| c != first) {
        out.push(ConfigViolation {
            topic: None,
            message: "topiccap must be identical across all topics".into(),
        });
    }
    out
}

/// Problems with one topic entry in isolation, as human-readable messages.
pub fn validate_topic_params(tp: &TopicParams) -> Vec<String> {
    let mut v = Vec::new();
    let w = &tp.weights;
    let p = &tp.params;
    let mut need = |ok: bool, msg: &str| {
        if !ok {
            v.push(msg.to_string());
        }
    };
    need(!w.w1.is_negative(), "w1 must be non-negative");
    need(!w.w2.is_negative(), "w2 must be non-negative");
    need(!w.w3.is_positive(), "w3 must be non-positive");
    need(!w.w3b.is_positive(), "w3b must be non-positive");
    need(w.w4.is_negative(), "w4 must be negative");
    need(!w.w5.is_negative(), "w5 must be non-negative");
    need(w.w6.is_negative(), "w6 must be negative");
    need(w.w7.is_negative(), "w7 must be negative");

    need(p.mesh_time_quantum > 0, "meshTimeQuantum must be positive");
    need(p.mcache_len > 0, "mcacheLen must be positive");
    need(
        p.mesh_message_deliveries_cap.is_positive(),
        "meshMessageDeliveriesCap must be positive",
    );
    need(
        p.mesh_message_deliveries_threshold.is_positive(),
        "meshMessageDeliveriesThreshold must be positive",
    );
    need(
        p.mesh_message_deliveries_threshold <= p.mesh_message_deliveries_cap,
        "meshMessageDeliveriesThreshold must not exceed meshMessageDeliveriesCap",
    );
    need(p.dlow <= p.d, "dlow must not exceed d");
    need(p.d <= p.dhigh, "d must not exceed dhigh");
    need(p.hbm_interval.is_positive(), "hbmInterval must be positive");
    need(p.fanout_ttl.is_positive(), "fanoutTTL must be positive");
    need(!p.mcache_gsp.is_negative(), "mcacheGsp must be non-negative");
    need(!p.seen_ttl.is_negative(), "seenTTL must be non-negative");
    need(
        !p.opportunistic_graft_threshold.is_negative(),
        "opportunisticGraftThreshold must be non-negative",
    );
    need(!p.topic_weight.is_negative(), "topicWeight must be non-negative");
    need(p.decay_interval.is_positive(), "decayInterval must be positive");
    for (name, val) in [
        ("meshMessageDeliveriesDecay", &p.mesh_message_deliveries_decay),
        ("firstMessageDeliveriesDecay", &p.first_message_deliveries_decay),
        ("behaviourPenaltyDecay", &p.behaviour_penalty_decay),
        ("meshFailurePenaltyDecay", &p.mesh_failure_penalty_decay),
        ("invalidMessageDeliveriesDecay", &p.invalid_message_deliveries_decay),
        ("decayToZero", &p.decay_to_zero),
    ] {
        need(
            val.is_positive() && *val < Rational::one(),
            &format!("{name} must be strictly between 0 and 1"),
        );
    }
    v
}

/// A named, validated scoring config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub name: String,
    pub cfg: ScoringConfig,
}

const ETH2_PROFILE: &str = include_str!("../profiles/eth2.toml");
const FILECOIN_PROFILE: &str = include_str!("../profiles/filecoin.toml");

/// Names accepted by [`Profile::builtin`].
pub const BUILTIN_PROFILES: &[&str] = &["eth2", "filecoin"];

impl Profile {
    pub fn from_toml(name: impl Into<String>, text: &str) -> Result<Self> {
        let cfg = ScoringConfig::from_toml_str(text)?;
        let violations = validate_config(&cfg);
        if !violations.is_empty() {
            let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
            return Err(Error::InvalidConfig(list.join("; ")));
        }
        Ok(Profile { name: name.into(), cfg })
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let text = match name {
            "eth2" => ETH2_PROFILE,
            "filecoin" => FILECOIN_PROFILE,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown profile `{other}` (known: {})",
                    BUILTIN_PROFILES.join(", ")
                )))
            }
        };
        Profile::from_toml(name, text)
    }

    pub fn eth2() -> Self {
        Profile::builtin("eth2").expect("shipped eth2 profile is valid")
    }

    pub fn filecoin() -> Self {
        Profile::builtin("filecoin").expect("shipped filecoin profile is valid")
    }
}
