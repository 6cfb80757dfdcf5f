//! Tunable detection constants.

use serde::{Deserialize, Serialize};

use super::time::{INFECTIOUS_WINDOW_DAYS, RETENTION_DAYS};

/// Thresholds that decide which receptions become encounters and which
/// encounters amount to an exposure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExposureConfig {
    /// Maximum distance in metres for a reception to count (≈ 6 ft).
    pub proximity_m: f64,
    /// Minimum length in minutes of a continuous session.
    pub min_session_minutes: u32,
    /// Aggregated minutes at which a user counts as exposed.
    pub exposure_threshold_minutes: u64,
    /// Days an encounter record is kept.
    pub retention_days: u32,
    /// Length of the infectious window in days.
    pub window_days: u32,
}

impl Default for ExposureConfig {
    fn default() -> Self {
        ExposureConfig {
            proximity_m: 1.83,
            min_session_minutes: 2,
            exposure_threshold_minutes: 15,
            retention_days: RETENTION_DAYS,
            window_days: INFECTIOUS_WINDOW_DAYS,
        }
    }
}

impl ExposureConfig {
    /// Whether a session with these parameters is an encounter.
    pub fn qualifies(&self, distance_m: f64, session_minutes: u32) -> bool {
        distance_m <= self.proximity_m && session_minutes >= self.min_session_minutes
    }
}
