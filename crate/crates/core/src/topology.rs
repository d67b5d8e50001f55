//! Topology files, graph statistics and start-state construction.
//!
//! ```text
//! # comment
//! N <id> <topic>...      node and the topics it subscribes to
//! E <id> <id>            undirected edge
//! ```

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use crate::config::ScoringConfig;
use crate::error::{Error, Result};
use crate::ids::{PeerId, TopicId};
use crate::rational::Rational;
use crate::rng;
use crate::types::{add_unique, remove_peer, Network, PeerState};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TopologySpec {
    pub nodes: Vec<PeerId>,
    pub edges: Vec<(PeerId, PeerId)>,
    pub subscriptions: BTreeMap<PeerId, Vec<TopicId>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyStats {
    pub nodes: usize,
    pub edges: usize,
    pub min_degree: usize,
    pub max_degree: usize,
    /// Exactly 2E/N.
    pub avg_degree: Rational,
    /// Longest shortest path within the largest connected component.
    pub diameter: usize,
    pub components: usize,
}

impl TopologyStats {
    pub fn avg_degree_f64(&self) -> f64 {
        self.avg_degree.to_f64()
    }
}

pub fn parse_topology(text: &str) -> Result<TopologySpec> {
    let mut spec = TopologySpec::default();
    let mut node_line: BTreeMap<PeerId, usize> = BTreeMap::new();
    let mut edge_lines: Vec<(usize, PeerId, PeerId)> = Vec::new();
    let mut problems = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let peer = |w: &str| w.parse::<PeerId>().map_err(|e| Error::parse(ln, e.to_string()));
        match words[0] {
            "N" => {
                let id = peer(words.get(1).ok_or_else(|| Error::parse(ln, "N needs a node id"))?)?;
                let topics = words[2..]
                    .iter()
                    .map(|w| w.parse::<TopicId>().map_err(|e| Error::parse(ln, e.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                if let Some(prev) = node_line.insert(id.clone(), ln) {
                    problems.push(format!("line {ln}: node {id} already declared on line {prev}"));
                    continue;
                }
                spec.nodes.push(id.clone());
                spec.subscriptions.insert(id, topics);
            }
            "E" => {
                if words.len() != 3 {
                    return Err(Error::parse(ln, "E needs exactly two node ids"));
                }
                edge_lines.push((ln, peer(words[1])?, peer(words[2])?));
            }
            other => return Err(Error::parse(ln, format!("unknown record type {other:?}"))),
        }
    }
    let mut seen: BTreeSet<(PeerId, PeerId)> = BTreeSet::new();
    for (ln, a, b) in edge_lines {
        for p in [&a, &b] {
            if !node_line.contains_key(p) {
                problems.push(format!("line {ln}: edge endpoint {p} is not a declared node"));
            }
        }
        if a == b {
            problems.push(format!("line {ln}: self-loop at {a}"));
            continue;
        }
        let key = if a < b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        if !seen.insert(key) {
            problems.push(format!("line {ln}: duplicate edge {a} {b}"));
            continue;
        }
        spec.edges.push((a, b));
    }
    if problems.is_empty() {
        Ok(spec)
    } else {
        Err(Error::InvalidTopology(problems.join("; ")))
    }
}

pub fn load_topology(path: &Path) -> Result<TopologySpec> {
    parse_topology(&std::fs::read_to_string(path)?)
}

impl TopologySpec {
    pub fn adjacency(&self) -> BTreeMap<&PeerId, BTreeSet<&PeerId>> {
        let mut adj: BTreeMap<&PeerId, BTreeSet<&PeerId>> = self.nodes.iter().map(|n| (n, BTreeSet::new())).collect();
        for (a, b) in &self.edges {
            adj.entry(a).or_default().insert(b);
            adj.entry(b).or_default().insert(a);
        }
        adj
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for n in &self.nodes {
            s.push_str("N ");
            s.push_str(n.as_str());
            for t in self.subscriptions.get(n).into_iter().flatten() {
                s.push(' ');
                s.push_str(t.as_str());
            }
            s.push('\n');
        }
        for (a, b) in &self.edges {
            s.push_str(&format!("E {a} {b}\n"));
        }
        s
    }

    pub fn stats(&self) -> TopologyStats {
        let adj = self.adjacency();
        let degrees: Vec<usize> = adj.values().map(BTreeSet::len).collect();
        let n = self.nodes.len();
        let avg_degree = if n == 0 {
            Rational::zero()
        } else {
            Rational::from(2 * self.edges.len()) / Rational::from(n)
        };
        let comps = components(&adj);
        let largest = comps.iter().max_by_key(|c| c.len());
        let diameter = largest
            .map(|c| c.iter().map(|s| eccentricity(&adj, s)).max().unwrap_or(0))
            .unwrap_or(0);
        TopologyStats {
            nodes: n,
            edges: self.edges.len(),
            min_degree: degrees.iter().copied().min().unwrap_or(0),
            max_degree: degrees.iter().copied().max().unwrap_or(0),
            avg_degree,
            diameter,
            components: comps.len(),
        }
    }
}

fn components<'a>(adj: &BTreeMap<&'a PeerId, BTreeSet<&'a PeerId>>) -> Vec<Vec<&'a PeerId>> {
    let mut seen: BTreeSet<&PeerId> = BTreeSet::new();
    let mut out = Vec::new();
    for &start in adj.keys() {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(p) = stack.pop() {
            for &q in &adj[p] {
                if seen.insert(q) {
                    comp.push(q);
                    stack.push(q);
                }
            }
        }
        out.push(comp);
    }
    out
}

fn eccentricity(adj: &BTreeMap<&PeerId, BTreeSet<&PeerId>>, src: &PeerId) -> usize {
    let mut dist: BTreeMap<&PeerId, usize> = BTreeMap::new();
    let mut queue = VecDeque::new();
    let (key, _) = adj.get_key_value(src).expect("node in graph");
    dist.insert(key, 0);
    queue.push_back(*key);
    let mut far = 0;
    while let Some(p) = queue.pop_front() {
        let d = dist[p];
        far = far.max(d);
        for &q in &adj[p] {
            if !dist.contains_key(q) {
                dist.insert(q, d + 1);
                queue.push_back(q);
            }
        }
    }
    far
}

/// Start state: each node knows its neighbours' subscriptions and has a
/// symmetric mesh of at most `d` subscribed neighbours per topic. All
/// counters are zero and no messages have been seen.
pub fn build_network(spec: &TopologySpec, cfg: &ScoringConfig, seed: u64) -> Result<Network> {
    cfg.global()?;
    let adj = spec.adjacency();
    for (n, ts) in &spec.subscriptions {
        for t in ts {
            if !cfg.contains(t) {
                return Err(Error::InvalidTopology(format!(
                    "node {n} subscribes to unknown topic {t}"
                )));
            }
        }
    }
    let subscribes = |p: &PeerId, t: &TopicId| spec.subscriptions.get(p).is_some_and(|ts| ts.contains(t));

    let mut net = Network::new();
    for n in &spec.nodes {
        let mut st = PeerState::default();
        for q in &adj[n] {
            for t in spec.subscriptions.get(*q).into_iter().flatten() {
                add_unique(st.nts.subs.entry(t.clone()).or_default(), q);
            }
        }
        for t in spec.subscriptions.get(n).into_iter().flatten() {
            let d = cfg.require(t)?.params.d;
            let cands: Vec<PeerId> = adj[n]
                .iter()
                .filter(|q| subscribes(q, t))
                .map(|q| (*q).clone())
                .collect();
            let chosen = rng::select(seed, n, "init-mesh", Some(t), cands, d);
            st.nts.mesh.insert(t.clone(), chosen);
        }
        net.insert(n.clone(), st);
    }

    let order: Vec<PeerId> = net.peers.keys().cloned().collect();
    for n in &order {
        let meshes: Vec<(TopicId, Vec<PeerId>)> = net.peers[n].nts.mesh.clone().into_iter().collect();
        for (t, members) in meshes {
            for m in members {
                let other = net.get_mut(&m).expect("neighbour is a node");
                add_unique(other.nts.mesh.get_mut(&t).expect("member subscribes"), n);
            }
        }
    }
    for n in &order {
        let meshes: Vec<(TopicId, Vec<PeerId>)> = net.peers[n].nts.mesh.clone().into_iter().collect();
        for (t, members) in meshes {
            let d = cfg.require(&t)?.params.d;
            if members.len() <= d {
                continue;
            }
            let keep = rng::select(seed, n, "init-trim", Some(&t), members.clone(), d);
            for m in members.iter().filter(|m| !keep.contains(m)) {
                let other = net.get_mut(m).expect("neighbour is a node");
                remove_peer(other.nts.mesh.get_mut(&t).expect("member subscribes"), n);
            }
            let mine = net.get_mut(n).expect("node");
            mine.nts
                .mesh
                .get_mut(&t)
                .expect("subscribed")
                .retain(|m| keep.contains(m));
        }
    }
    Ok(net)
}
