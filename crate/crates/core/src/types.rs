//! Peer and network state, counters, and default-valued lookups.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ids::{PayloadId, PeerId, TopicId};
use crate::rational::Rational;

/// Content prefix that marks a payload as failing validation.
pub const INVALID_MARKER: &str = "INVALID";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Payload {
    pub content: String,
    pub pid: PayloadId,
    pub top: TopicId,
    pub origin: PeerId,
}

impl Payload {
    /// Panics if `content` is not a printable token.
    pub fn new(content: impl Into<String>, pid: PayloadId, top: TopicId, origin: PeerId) -> Self {
        let content = content.into();
        assert!(
            crate::ids::is_valid_token(&content),
            "invalid payload content {content:?}"
        );
        Payload {
            content,
            pid,
            top,
            origin,
        }
    }

    pub fn is_valid(&self) -> bool {
        !self.content.starts_with(INVALID_MARKER)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TopicCounters {
    #[serde(rename = "invalidMessageDeliveries")]
    pub imd: Rational,
    #[serde(rename = "meshMessageDeliveries")]
    pub mmd: Rational,
    pub mesh_time: Rational,
    #[serde(rename = "firstMessageDeliveries")]
    pub fmd: Rational,
    #[serde(rename = "meshFailurePenalty")]
    pub mfp: Rational,
}

impl TopicCounters {
    pub fn new(imd: Rational, mmd: Rational, mesh_time: Rational, fmd: Rational, mfp: Rational) -> Self {
        TopicCounters {
            imd,
            mmd,
            mesh_time,
            fmd,
            mfp,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        [&self.imd, &self.mmd, &self.mesh_time, &self.fmd, &self.mfp]
            .iter()
            .all(|x| !x.is_negative())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct GlobalCounters {
    pub apco: Rational,
    pub ipco: Rational,
    pub bhvo: Rational,
}

impl GlobalCounters {
    pub fn new(apco: Rational, ipco: Rational, bhvo: Rational) -> Self {
        GlobalCounters { apco, ipco, bhvo }
    }
}

pub type TctrsMap = BTreeMap<(PeerId, TopicId), TopicCounters>;
pub type GctrsMap = BTreeMap<PeerId, GlobalCounters>;
pub type ScoreMap = BTreeMap<PeerId, Rational>;

pub fn lookup_score(p: &PeerId, scores: &ScoreMap) -> Rational {
    scores.get(p).cloned().unwrap_or_default()
}

pub fn lookup_tctrs(p: &PeerId, t: &TopicId, m: &TctrsMap) -> TopicCounters {
    m.get(&(p.clone(), t.clone())).cloned().unwrap_or_default()
}

pub fn lookup_gctrs(p: &PeerId, m: &GctrsMap) -> GlobalCounters {
    m.get(p).cloned().unwrap_or_default()
}

/// All per-topic subscriber lists concatenated, duplicates kept.
///
/// Lists are folded from the right over ascending topic order, so the
/// greatest topic's list comes first.
pub fn subscribers(subs: &BTreeMap<TopicId, Vec<PeerId>>) -> Vec<PeerId> {
    subs.values().rev().flatten().cloned().collect()
}

/// Who this peer knows about per topic, and how it relays.
///
/// The peer itself subscribes to `t` iff `mesh` has an entry for `t`
/// (possibly empty).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NbrTopicState {
    pub subs: BTreeMap<TopicId, Vec<PeerId>>,
    pub fanout: BTreeMap<TopicId, Vec<PeerId>>,
    pub last_pub: BTreeMap<TopicId, Rational>,
    pub mesh: BTreeMap<TopicId, Vec<PeerId>>,
}

impl NbrTopicState {
    pub fn is_subscribed(&self, t: &TopicId) -> bool {
        self.mesh.contains_key(t)
    }

    pub fn subscribed_topics(&self) -> impl Iterator<Item = &TopicId> {
        self.mesh.keys()
    }

    pub fn mesh_of(&self, t: &TopicId) -> &[PeerId] {
        self.mesh.get(t).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn subs_of(&self, t: &TopicId) -> &[PeerId] {
        self.subs.get(t).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn fanout_of(&self, t: &TopicId) -> &[PeerId] {
        self.fanout.get(t).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn in_mesh(&self, t: &TopicId, p: &PeerId) -> bool {
        self.mesh_of(t).contains(p)
    }

    /// Every peer this state refers to, deduplicated and sorted.
    pub fn neighbours(&self) -> Vec<PeerId> {
        let mut all: Vec<PeerId> = self
            .subs
            .values()
            .chain(self.mesh.values())
            .chain(self.fanout.values())
            .flatten()
            .cloned()
            .collect();
        all.sort();
        all.dedup();
        all
    }
}

/// Appends `p` unless already present.
pub(crate) fn add_unique(list: &mut Vec<PeerId>, p: &PeerId) -> bool {
    if list.contains(p) {
        false
    } else {
        list.push(p.clone());
        true
    }
}

pub(crate) fn remove_peer(list: &mut Vec<PeerId>, p: &PeerId) -> bool {
    let before = list.len();
    list.retain(|x| x != p);
    list.len() != before
}

/// Key shape for the seen/served maps: a full payload or just its id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MsgKey {
    Payload(Payload),
    Id(PayloadId),
}

impl MsgKey {
    pub fn pid(&self) -> &PayloadId {
        match self {
            MsgKey::Payload(p) => &p.pid,
            MsgKey::Id(id) => id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MsgsState {
    /// Age in seconds of each (message, delivering peer) sighting.
    #[serde(with = "as_pairs")]
    pub recently_seen: BTreeMap<(MsgKey, PeerId), Rational>,
    pub pld_cache: Vec<(Payload, PeerId)>,
    /// Receive counts per heartbeat interval, newest first.
    pub hwindows: Vec<u64>,
    pub waiting_for: BTreeMap<PayloadId, PeerId>,
    #[serde(with = "as_pairs")]
    pub served: BTreeMap<(MsgKey, PeerId), Rational>,
    pub ihaves_received: u64,
    pub ihaves_sent: u64,
    /// IHAVEs received from each peer in the current heartbeat window.
    pub ihave_counts: BTreeMap<PeerId, u64>,
}

impl Default for MsgsState {
    fn default() -> Self {
        MsgsState {
            recently_seen: BTreeMap::new(),
            pld_cache: Vec::new(),
            hwindows: vec![0],
            waiting_for: BTreeMap::new(),
            served: BTreeMap::new(),
            ihaves_received: 0,
            ihaves_sent: 0,
            ihave_counts: BTreeMap::new(),
        }
    }
}

impl MsgsState {
    /// Whether any sighting of `pid` is recorded, under either key shape.
    pub fn is_seen(&self, pid: &PayloadId) -> bool {
        let id_lo = (MsgKey::Id(pid.clone()), PeerId::min_sentinel());
        if self
            .recently_seen
            .range(id_lo..)
            .next()
            .is_some_and(|((k, _), _)| k == &MsgKey::Id(pid.clone()))
        {
            return true;
        }
        self.recently_seen
            .keys()
            .any(|(k, _)| matches!(k, MsgKey::Payload(p) if &p.pid == pid))
    }

    pub fn cached(&self, pid: &PayloadId) -> Option<&Payload> {
        self.pld_cache.iter().find(|(p, _)| &p.pid == pid).map(|(p, _)| p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PeerState {
    pub nts: NbrTopicState,
    pub mst: MsgsState,
    #[serde(with = "as_pairs")]
    pub tctrs: TctrsMap,
    pub gctrs: GctrsMap,
    pub scores: ScoreMap,
    /// Time accumulated toward the next counter decay.
    pub decay_clock: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Network {
    pub peers: BTreeMap<PeerId, PeerState>,
}

impl Network {
    pub fn new() -> Self {
        Network::default()
    }

    pub fn contains(&self, p: &PeerId) -> bool {
        self.peers.contains_key(p)
    }

    pub fn get(&self, p: &PeerId) -> Option<&PeerState> {
        self.peers.get(p)
    }

    pub fn get_mut(&mut self, p: &PeerId) -> Option<&mut PeerState> {
        self.peers.get_mut(p)
    }

    pub fn insert(&mut self, p: PeerId, st: PeerState) {
        self.peers.insert(p, st);
    }

    pub fn remove(&mut self, p: &PeerId) -> Option<PeerState> {
        self.peers.remove(p)
    }

    pub fn len(&self) -> usize {
        self.peers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peers.is_empty()
    }
}

/// Serializes a map as a list of `[key, value]` pairs so that composite
/// keys survive formats (like JSON) that only allow string keys.
pub mod as_pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<K, V, S>(m: &BTreeMap<K, V>, s: S) -> Result<S::Ok, S::Error>
    where
        K: Serialize,
        V: Serialize,
        S: Serializer,
    {
        s.collect_seq(m.iter())
    }

    pub fn deserialize<'de, K, V, D>(d: D) -> Result<BTreeMap<K, V>, D::Error>
    where
        K: Deserialize<'de> + Ord,
        V: Deserialize<'de>,
        D: Deserializer<'de>,
    {
        let pairs: Vec<(K, V)> = Vec::deserialize(d)?;
        Ok(pairs.into_iter().collect())
    }
}
