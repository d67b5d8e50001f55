//! Seeded selection.
//!
//! Every random choice draws from its own ChaCha stream keyed by the run
//! seed, the deciding peer, a purpose tag, the topic and the candidate set.
//! Unrelated decisions therefore never perturb each other, and the same
//! decision in the same state always resolves the same way.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::ids::{PeerId, TopicId};

pub fn stream(seed: u64, peer: &PeerId, purpose: &str, topic: Option<&TopicId>, salt: &[PeerId]) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for part in [peer.as_str(), purpose, topic.map_or("", TopicId::as_str)] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    for p in salt {
        h.update((p.as_str().len() as u64).to_le_bytes());
        h.update(p.as_str().as_bytes());
    }
    let digest: [u8; 32] = h.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

/// Up to `k` distinct peers from `candidates`: sorted, deduplicated,
/// shuffled, then truncated.
pub fn select(
    seed: u64,
    peer: &PeerId,
    purpose: &str,
    topic: Option<&TopicId>,
    mut candidates: Vec<PeerId>,
    k: usize,
) -> Vec<PeerId> {
    candidates.sort();
    candidates.dedup();
    if candidates.len() <= 1 {
        candidates.truncate(k);
        return candidates;
    }
    let mut rng = stream(seed, peer, purpose, topic, &candidates);
    candidates.shuffle(&mut rng);
    candidates.truncate(k);
    candidates
}
