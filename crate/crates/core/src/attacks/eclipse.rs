use std::collections::BTreeSet;

use crate::config::ScoringConfig;
use crate::error::{Error, Result};
use crate::ids::{PeerId, TopicId};
use crate::types::Network;

use super::AttackGadget;

/// One gadget per attacker around `victim`. The attackers must make up the
/// victim's entire mesh in every attacked topic.
pub fn build_eclipse(
    net: &Network,
    victim: &PeerId,
    attackers: &[PeerId],
    ats: &[TopicId],
    cfg: &ScoringConfig,
) -> Result<Vec<AttackGadget>> {
    let v = net
        .get(victim)
        .ok_or_else(|| Error::InvalidGadget(format!("victim {victim} is not a node")))?;
    for t in ats {
        cfg.require(t)?;
        if let Some(honest) = v.nts.mesh_of(t).iter().find(|p| !attackers.contains(p)) {
            return Err(Error::InvalidGadget(format!(
                "{honest} is in {victim}'s {t} mesh but is not an attacker"
            )));
        }
    }
    let mut sorted: Vec<&PeerId> = attackers.iter().collect();
    sorted.sort();
    sorted.dedup();
    let mut gadgets = Vec::new();
    for a in sorted {
        let shared: BTreeSet<TopicId> = v
            .nts
            .subscribed_topics()
            .filter(|t| v.nts.in_mesh(t, a))
            .cloned()
            .collect();
        let attacked: BTreeSet<TopicId> = ats.iter().filter(|t| shared.contains(*t)).cloned().collect();
        if attacked.is_empty() {
            return Err(Error::InvalidGadget(format!(
                "attacker {a} shares no attacked topic mesh with {victim}"
            )));
        }
        let g = AttackGadget {
            attacker: a.clone(),
            victim: victim.clone(),
            attacked,
            shared,
        };
        g.validate(net, cfg)?;
        gadgets.push(g);
    }
    Ok(gadgets)
}
