//! Score-function attacks built from gadgets.
//!
//! A gadget pairs an attacker with a victim that share meshes in several
//! topics. The attacker behaves well in some topics and starves the victim
//! in the attacked ones; when the victim's state repeats exactly from one
//! heartbeat to the next while the violation holds, the violation holds
//! forever.

mod eclipse;
mod gadget;
mod partition;
pub mod scenario;

pub use eclipse::build_eclipse;
pub use gadget::{
    canonical_state, emit_evnts, emit_mesh_msg_deliveries, establish_gadget, fresh_payload, gadget_schedule,
    induced_liveness_counterexample, multi_schedule, pid_origin_topic, run_gadget_attack, run_gadgets,
    score_prop_violation, AttackGadget, AttackOutcome, AttackSchedule, MultiOutcome, RoundOptions,
};
pub use partition::{build_partition, mesh_components};
