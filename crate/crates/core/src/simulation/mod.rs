//! Seeded world generation, the day-by-day engine and the ground-truth
//! oracle it is checked against.

pub mod engine;
pub mod oracle;
pub mod scenario;
pub mod world;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::crypto::hash_with_label;

pub use engine::{
    detection_rate_vs_adoption, run, run_with, AttackPlan, DayCost, DayTranscript, EngineOptions,
    SimulationResult, Transmission,
};
pub use oracle::{ground_truth_oracle, OracleResult};
pub use scenario::{DurationMixture, Scenario, Script, ScriptedEncounter, WorldMode};
pub use world::{generate_world, split_minutes, Encounter, WorldTrace};

/// An independent random stream derived from the master seed and a label,
/// so that adding draws to one component never shifts another.
pub fn sub_rng(seed: u64, label: &str) -> ChaCha8Rng {
    let mut msg = seed.to_be_bytes().to_vec();
    msg.extend_from_slice(label.as_bytes());
    ChaCha8Rng::from_seed(*hash_with_label("pct/rng", &msg).as_bytes())
}

/// Serializes a `(user, day) → value` map as a list of `[user, day, value]`
/// triples (JSON object keys must be strings).
pub(crate) fn serialize_pair_map<S: serde::Serializer>(
    map: &std::collections::BTreeMap<(u32, u32), u64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(map.len()))?;
    for ((a, b), v) in map {
        seq.serialize_element(&(a, b, v))?;
    }
    seq.end()
}
