//! Attack scenario files and their evaluation.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! topology = "star.topo"      # resolved relative to the scenario file
//! profile = "eth2"            # or: config = "my-profile.toml"
//! kind = "gadget"             # gadget | eclipse | partition
//! m = 0                       # deliveries per round in attacked topics
//! n = 20                      # deliveries per round in other shared topics
//! rounds = 60
//! seed = 1
//! expect = "liveness-counterexample"
//!
//! [[gadgets]]
//! attacker = "A"
//! victim = "V"
//! attacked = ["AGG"]
//! shared = ["AGG", "BLOCKS"]  # optional: every topic whose mesh they share
//! ```
//!
//! Eclipse scenarios replace `[[gadgets]]` with an `[eclipse]` table holding
//! `victim`, `attackers` and `attacked`. Partition scenarios list the cut as
//! gadgets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    build_eclipse, build_partition, induced_liveness_counterexample, mesh_components, pid_origin_topic, run_gadgets,
    AttackGadget, AttackOutcome, RoundOptions,
};
use crate::config::{Profile, ScoringConfig};
use crate::engine::RunBudget;
use crate::error::{Error, Result};
use crate::ids::{PeerId, TopicId};
use crate::rational::Rational;
use crate::topology::{build_network, load_topology, parse_topology, TopologySpec};
use crate::trace::TraceLevel;
use crate::types::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackKind {
    #[default]
    Gadget,
    Eclipse,
    Partition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Every gadget's victim reached a fixed point with the violation holding.
    LivenessCounterexample,
    /// Some violation bit was set, but not every gadget is certified.
    Violation,
    NoViolation,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::LivenessCounterexample => "liveness-counterexample",
            Verdict::Violation => "violation",
            Verdict::NoViolation => "no-violation",
        })
    }
}

impl FromStr for Verdict {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "liveness-counterexample" => Ok(Verdict::LivenessCounterexample),
            "violation" => Ok(Verdict::Violation),
            "no-violation" => Ok(Verdict::NoViolation),
            other => Err(format!("unknown verdict {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GadgetSpec {
    pub attacker: PeerId,
    pub victim: PeerId,
    pub attacked: Vec<TopicId>,
    #[serde(default)]
    pub shared: Option<Vec<TopicId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EclipseSpec {
    pub victim: PeerId,
    pub attackers: Vec<PeerId>,
    pub attacked: Vec<TopicId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    topology: PathBuf,
    profile: Option<String>,
    config: Option<PathBuf>,
    #[serde(default)]
    kind: AttackKind,
    #[serde(default)]
    gadgets: Vec<GadgetSpec>,
    eclipse: Option<EclipseSpec>,
    m: u64,
    n: u64,
    rounds: u64,
    #[serde(default)]
    seed: u64,
    max_events: Option<usize>,
    trace_level: Option<String>,
    #[serde(default)]
    honest_heartbeats: bool,
    #[serde(default)]
    publishers: Vec<PeerId>,
    expect: Option<String>,
}

/// A scenario with its topology and config loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub topology: TopologySpec,
    pub profile: String,
    pub cfg: ScoringConfig,
    pub kind: AttackKind,
    pub gadgets: Vec<GadgetSpec>,
    pub eclipse: Option<EclipseSpec>,
    pub m: u64,
    pub n: u64,
    pub rounds: u64,
    pub seed: u64,
    pub max_events: usize,
    pub trace_level: TraceLevel,
    pub options: RoundOptions,
    pub expect: Option<Verdict>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base)
    }

    /// Relative paths inside the document resolve against `base`.
    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self> {
        let f: ScenarioFile = toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("scenario: {e}")))?;
        let (profile, cfg) = match (&f.profile, &f.config) {
            (Some(name), None) => (name.clone(), Profile::builtin(name)?.cfg),
            (None, Some(p)) => {
                let path = base.join(p);
                let prof = Profile::from_toml(path.display().to_string(), &std::fs::read_to_string(&path)?)?;
                (prof.name, prof.cfg)
            }
            _ => {
                return Err(Error::InvalidConfig(
                    "scenario needs exactly one of `profile` and `config`".into(),
                ))
            }
        };
        let topology = load_topology(&base.join(&f.topology))?;
        Self::assemble(f, topology, profile, cfg)
    }

    /// Like [`Scenario::from_toml_str`] with the topology given inline, for
    /// callers that build topologies in memory.
    pub fn with_topology_text(text: &str, topology: &str) -> Result<Self> {
        let f: ScenarioFile = toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("scenario: {e}")))?;
        let name = f.profile.clone().unwrap_or_else(|| "eth2".into());
        let cfg = Profile::builtin(&name)?.cfg;
        Self::assemble(f, parse_topology(topology)?, name, cfg)
    }

    fn assemble(f: ScenarioFile, topology: TopologySpec, profile: String, cfg: ScoringConfig) -> Result<Self> {
        let trace_level = match &f.trace_level {
            None => TraceLevel::Violations,
            Some(s) => s.parse().map_err(Error::InvalidConfig)?,
        };
        let expect = f
            .expect
            .as_deref()
            .map(str::parse)
            .transpose()
            .map_err(Error::InvalidConfig)?;
        match f.kind {
            AttackKind::Eclipse if f.eclipse.is_none() => {
                return Err(Error::InvalidConfig("eclipse scenarios need an [eclipse] table".into()))
            }
            AttackKind::Gadget | AttackKind::Partition if f.gadgets.is_empty() => {
                return Err(Error::InvalidConfig("scenario lists no gadgets".into()))
            }
            _ => {}
        }
        Ok(Scenario {
            topology,
            profile,
            cfg,
            kind: f.kind,
            gadgets: f.gadgets,
            eclipse: f.eclipse,
            m: f.m,
            n: f.n,
            rounds: f.rounds,
            seed: f.seed,
            max_events: f.max_events.unwrap_or(usize::MAX),
            trace_level,
            options: RoundOptions {
                honest_heartbeats: f.honest_heartbeats,
                publishers: f.publishers,
            },
            expect,
        })
    }

    pub fn start_network(&self) -> Result<Network> {
        build_network(&self.topology, &self.cfg, self.seed)
    }

    /// The validated gadgets for this scenario's kind.
    pub fn resolve_gadgets(&self, net: &Network) -> Result<Vec<AttackGadget>> {
        if let (AttackKind::Eclipse, Some(e)) = (self.kind, &self.eclipse) {
            return build_eclipse(net, &e.victim, &e.attackers, &e.attacked, &self.cfg);
        }
        let mut gadgets = Vec::new();
        for s in &self.gadgets {
            let shared = match &s.shared {
                Some(ts) => ts.clone(),
                None => net
                    .get(&s.victim)
                    .map(|v| {
                        v.nts
                            .subscribed_topics()
                            .filter(|t| v.nts.in_mesh(t, &s.attacker))
                            .cloned()
                            .collect()
                    })
                    .unwrap_or_default(),
            };
            let g = AttackGadget::new(&s.attacker, &s.victim, s.attacked.iter().cloned(), shared);
            g.validate(net, &self.cfg)?;
            gadgets.push(g);
        }
        if self.kind == AttackKind::Partition {
            gadgets = build_partition(net, &gadgets, &self.cfg)?;
        }
        Ok(gadgets)
    }
}

/// Mesh components of one attacked topic once the cut is removed, and how
/// many deliveries crossed between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionReport {
    pub topic: TopicId,
    pub components: Vec<BTreeSet<PeerId>>,
    pub crossings: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub kind: AttackKind,
    pub profile: String,
    pub verdict: Verdict,
    pub expect: Option<Verdict>,
    pub outcomes: Vec<AttackOutcome>,
    pub events_processed: usize,
    /// Eclipse only: attacked-topic payloads the victim received.
    pub victim_attacked_receipts: Option<usize>,
    pub partitions: Vec<PartitionReport>,
}

impl ScenarioReport {
    pub fn matches_expectation(&self) -> bool {
        self.expect.is_none_or(|e| e == self.verdict)
    }

    /// One `key value` line per fact, gadget lines prefixed by their index.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| s.push_str(&format!("{k} {v}\n"));
        line("kind", format!("{:?}", self.kind).to_lowercase());
        line("profile", self.profile.clone());
        line("events", self.events_processed.to_string());
        for (i, o) in self.outcomes.iter().enumerate() {
            let g = &o.gadget;
            let ats: Vec<&str> = g.attacked.iter().map(TopicId::as_str).collect();
            line(
                &format!("gadget.{i}"),
                format!("{} -> {} attacked=[{}]", g.attacker, g.victim, ats.join(",")),
            );
            let set = o.violations.iter().filter(|b| **b).count();
            line(&format!("gadget.{i}.heartbeats"), o.violations.len().to_string());
            line(&format!("gadget.{i}.violations"), set.to_string());
            let idx = |x: Option<usize>| x.map_or("none".to_string(), |i| i.to_string());
            line(&format!("gadget.{i}.first_violation"), idx(o.first_violation_index));
            line(&format!("gadget.{i}.fixed_point"), idx(o.fixed_point_index));
            line(
                &format!("gadget.{i}.min_attacker_score"),
                o.min_attacker_score.as_ref().map_or("none".into(), Rational::to_string),
            );
            line(
                &format!("gadget.{i}.liveness_counterexample"),
                induced_liveness_counterexample(o).to_string(),
            );
        }
        if let Some(n) = self.victim_attacked_receipts {
            line("victim_attacked_receipts", n.to_string());
        }
        for p in &self.partitions {
            line(
                &format!("partition.{}.components", p.topic),
                p.components.len().to_string(),
            );
            line(&format!("partition.{}.crossings", p.topic), p.crossings.to_string());
        }
        line("verdict", self.verdict.to_string());
        if let Some(e) = self.expect {
            line("expect", e.to_string());
        }
        s
    }
}

pub fn verdict_of(outcomes: &[AttackOutcome]) -> Verdict {
    if !outcomes.is_empty() && outcomes.iter().all(induced_liveness_counterexample) {
        Verdict::LivenessCounterexample
    } else if outcomes.iter().any(|o| o.violations.iter().any(|b| *b)) {
        Verdict::Violation
    } else {
        Verdict::NoViolation
    }
}

/// Builds the start network, runs the attack and summarises it.
pub fn run_scenario(sc: &Scenario) -> Result<ScenarioReport> {
    let net = sc.start_network()?;
    let gadgets = sc.resolve_gadgets(&net)?;
    let budget = RunBudget::new(sc.max_events, sc.seed);
    let out = run_gadgets(
        net.clone(),
        &gadgets,
        sc.m,
        sc.n,
        sc.rounds,
        &sc.cfg,
        &budget,
        &sc.options,
    )?;

    let victim_attacked_receipts = match (sc.kind, &sc.eclipse) {
        (AttackKind::Eclipse, Some(e)) => Some(e.attacked.iter().map(|t| out.received_in(&e.victim, t).len()).sum()),
        _ => None,
    };

    let mut partitions = Vec::new();
    if sc.kind == AttackKind::Partition {
        let attackers: BTreeSet<PeerId> = gadgets.iter().map(|g| g.attacker.clone()).collect();
        let topics: BTreeSet<&TopicId> = gadgets.iter().flat_map(|g| g.attacked.iter()).collect();
        for t in topics {
            let removed = gadgets
                .iter()
                .filter(|g| g.attacked.contains(t))
                .map(|g| {
                    if g.attacker < g.victim {
                        (g.attacker.clone(), g.victim.clone())
                    } else {
                        (g.victim.clone(), g.attacker.clone())
                    }
                })
                .collect();
            let components = mesh_components(&net, t, &removed, &attackers);
            let home: BTreeMap<&PeerId, usize> = components
                .iter()
                .enumerate()
                .flat_map(|(i, c)| c.iter().map(move |p| (p, i)))
                .collect();
            let mut crossings = 0;
            for (pid, receivers) in &out.receipts {
                let Some((origin, topic)) = pid_origin_topic(pid) else {
                    continue;
                };
                if topic != t.as_str() {
                    continue;
                }
                let Some(src) = home.get(&PeerId::new(origin)) else {
                    continue;
                };
                crossings += receivers
                    .iter()
                    .filter(|r| home.get(r).is_some_and(|c| c != src))
                    .count();
            }
            partitions.push(PartitionReport {
                topic: t.clone(),
                components,
                crossings,
            });
        }
    }

    Ok(ScenarioReport {
        kind: sc.kind,
        profile: sc.profile.clone(),
        verdict: verdict_of(&out.outcomes),
        expect: sc.expect,
        outcomes: out.outcomes,
        events_processed: out.events_processed,
        victim_attacked_receipts,
        partitions,
    })
}
