use std::collections::{BTreeMap, BTreeSet};

use crate::config::ScoringConfig;
use crate::error::{Error, Result};
use crate::ids::{PeerId, TopicId};
use crate::types::Network;

use super::AttackGadget;

/// Connected components of the `topic` mesh graph after deleting `removed`
/// edges, over all nodes except those in `skip`. Mesh links count in either
/// direction, so one-sided entries still connect.
pub fn mesh_components(
    net: &Network,
    topic: &TopicId,
    removed: &BTreeSet<(PeerId, PeerId)>,
    skip: &BTreeSet<PeerId>,
) -> Vec<BTreeSet<PeerId>> {
    let mut adj: BTreeMap<&PeerId, BTreeSet<&PeerId>> = BTreeMap::new();
    for (p, st) in &net.peers {
        if !st.nts.is_subscribed(topic) {
            continue;
        }
        adj.entry(p).or_default();
        for q in st.nts.mesh_of(topic) {
            let key = if p < q {
                (p.clone(), q.clone())
            } else {
                (q.clone(), p.clone())
            };
            if removed.contains(&key) {
                continue;
            }
            adj.entry(p).or_default().insert(q);
            adj.entry(q).or_default().insert(p);
        }
    }
    let mut seen: BTreeSet<&PeerId> = BTreeSet::new();
    let mut out = Vec::new();
    for start in adj.keys() {
        if skip.contains(*start) || seen.contains(start) {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut stack = vec![*start];
        seen.insert(start);
        while let Some(p) = stack.pop() {
            if !skip.contains(p) {
                comp.insert(p.clone());
            }
            for q in &adj[p] {
                if seen.insert(q) {
                    stack.push(q);
                }
            }
        }
        if !comp.is_empty() {
            out.push(comp);
        }
    }
    out
}

fn edge(a: &PeerId, b: &PeerId) -> (PeerId, PeerId) {
    if a < b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

/// Validates that the gadgets form a cut: in each attacked topic, deleting
/// the attacker-victim edges splits the honest part of the mesh graph into
/// at least two components. Returns the gadgets unchanged on success.
pub fn build_partition(net: &Network, cut: &[AttackGadget], cfg: &ScoringConfig) -> Result<Vec<AttackGadget>> {
    if cut.is_empty() {
        return Err(Error::InvalidGadget("empty cut".into()));
    }
    for g in cut {
        g.validate(net, cfg)?;
    }
    let topics: BTreeSet<&TopicId> = cut.iter().flat_map(|g| g.attacked.iter()).collect();
    let attackers: BTreeSet<PeerId> = cut.iter().map(|g| g.attacker.clone()).collect();
    for t in topics {
        let removed: BTreeSet<(PeerId, PeerId)> = cut
            .iter()
            .filter(|g| g.attacked.contains(t))
            .map(|g| edge(&g.attacker, &g.victim))
            .collect();
        let comps = mesh_components(net, t, &removed, &attackers);
        if comps.len() < 2 {
            return Err(Error::InvalidGadget(format!(
                "removing the gadget edges leaves the {t} mesh connected"
            )));
        }
    }
    Ok(cut.to_vec())
}
