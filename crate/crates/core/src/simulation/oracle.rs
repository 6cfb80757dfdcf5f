//! Ground-truth exposures computed from the world trace alone.
//!
//! The oracle never touches beacons, stores or reports: it walks the
//! encounter list, applies the distance and duration thresholds, and sums
//! minutes of contact with each patient inside the infectious window.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::world::WorldTrace;
use crate::framework::{ExposureConfig, UserId, MINUTES_PER_DAY};

/// Exposure ground truth.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    /// Minutes of qualifying contact per `(user, report day)`; only
    /// non-zero entries.
    #[serde(serialize_with = "super::serialize_pair_map")]
    pub risk: BTreeMap<(UserId, u32), u64>,
    /// Number of qualifying encounters with a patient inside its window.
    pub exposure_encounters: u64,
}

impl OracleResult {
    /// `(user, day)` pairs whose risk reaches the threshold.
    pub fn exposed(&self, threshold: u64) -> BTreeSet<(UserId, u32)> {
        self.risk
            .iter()
            .filter(|(_, r)| **r >= threshold)
            .map(|(k, _)| *k)
            .collect()
    }

    /// Total risk per user over the whole run.
    pub fn totals(&self) -> BTreeMap<UserId, u64> {
        let mut t = BTreeMap::new();
        for ((u, _), r) in &self.risk {
            *t.entry(*u).or_insert(0) += r;
        }
        t
    }

    /// Sum of all risk minutes.
    pub fn total_minutes(&self) -> u64 {
        self.risk.values().sum()
    }
}

/// Computes who was exposed, and by how much, on each diagnosis day.
///
/// A user `u` receives risk from patient `p` (diagnosed on day `D`) if `u`
/// is never diagnosed or diagnosed strictly after `D`, and the two had a
/// session on a day in `[D - window + 1, D]` that was close and long enough.
pub fn ground_truth_oracle(world: &WorldTrace, cfg: &ExposureConfig) -> OracleResult {
    let diag: BTreeMap<UserId, u32> = world.diagnoses.iter().copied().collect();
    let mut out = OracleResult::default();
    for e in &world.encounters {
        if !(e.distance_m <= cfg.proximity_m && e.minutes >= cfg.min_session_minutes) {
            continue;
        }
        let day = e.start_minute / MINUTES_PER_DAY;
        for (patient, other) in [(e.a, e.b), (e.b, e.a)] {
            let Some(&dp) = diag.get(&patient) else {
                continue;
            };
            let in_window = day <= dp && dp - day < cfg.window_days;
            let eligible = diag.get(&other).is_none_or(|du| *du > dp);
            if in_window && eligible {
                *out.risk.entry((other, dp)).or_insert(0) += u64::from(e.minutes);
                out.exposure_encounters += 1;
            }
        }
    }
    out
}
