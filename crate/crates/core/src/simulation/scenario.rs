//! Scenario descriptions (JSON).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adversaries::AdversaryConfig;
use crate::crypto::GroupKind;
use crate::error::{Error, Result};
use crate::framework::{ExposureConfig, RateLimitConfig, UserId};
use crate::protocols::ProtocolId;

/// How the encounter trace is produced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorldMode {
    /// Seeded random contacts within shared cells.
    #[default]
    Random,
    /// Ring lattice: every user meets her `s` nearest neighbours once a
    /// day in single-slot sessions; the `P` patients, evenly spaced, are
    /// all diagnosed on the last day so that every other user takes part
    /// in every round.
    Regular,
    /// Encounters and diagnoses listed in [`Scenario::script`].
    Scripted,
}

/// Session-length mixture of the random world.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DurationMixture {
    /// Share of sessions shorter than the minimum session length.
    pub short: f64,
    /// Share of sessions from the minimum up to 14 minutes.
    pub medium: f64,
    /// Share of sessions of 15 minutes or more.
    pub long: f64,
}

impl Default for DurationMixture {
    fn default() -> Self {
        DurationMixture {
            short: 0.2,
            medium: 0.4,
            long: 0.4,
        }
    }
}

/// One scripted encounter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedEncounter {
    /// First participant.
    pub a: UserId,
    /// Second participant.
    pub b: UserId,
    /// Start, in absolute minutes since day 0.
    pub start_minute: u32,
    /// Length in minutes.
    pub minutes: u32,
    /// Distance in metres.
    #[serde(default = "default_distance")]
    pub distance_m: f64,
    /// Location cell.
    #[serde(default)]
    pub cell: u32,
}

fn default_distance() -> f64 {
    1.0
}

/// Scripted world contents.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Script {
    /// Encounters.
    #[serde(default)]
    pub encounters: Vec<ScriptedEncounter>,
    /// `(user, day)` diagnoses.
    #[serde(default)]
    pub diagnoses: Vec<(UserId, u32)>,
}

/// A complete, reproducible simulation setup.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Free-form label used in outputs.
    #[serde(default = "default_name")]
    pub name: String,
    /// N: number of users.
    pub num_users: u32,
    /// Number of simulated days.
    pub num_days: u32,
    /// P: new patients per day.
    pub new_patients_per_day: u32,
    /// s: mean contacts per user per day.
    pub contacts_per_user_per_day: u32,
    /// p: share of users running the app.
    #[serde(default = "one")]
    pub adoption_rate: f64,
    /// q: per-direction, per-session loss probability.
    #[serde(default)]
    pub loss_prob: f64,
    /// The design under test.
    pub protocol: ProtocolId,
    /// Adversaries present.
    #[serde(default)]
    pub adversaries: Vec<AdversaryConfig>,
    /// Master seed.
    pub rng_seed: u64,
    /// Group instantiation for group-based designs.
    #[serde(default = "strong")]
    pub group_kind: GroupKind,
    /// World generator.
    #[serde(default)]
    pub world: WorldMode,
    /// Session-length mixture (random world).
    #[serde(default)]
    pub durations: DurationMixture,
    /// Number of location cells (random world).
    #[serde(default = "default_cells")]
    pub num_cells: u32,
    /// Share of random-world sessions beyond the proximity threshold.
    #[serde(default = "default_far")]
    pub far_fraction: f64,
    /// Share of random-world sessions that come as an intermittent pair.
    #[serde(default = "default_repeat")]
    pub repeat_fraction: f64,
    /// First day on which random-world diagnoses happen.
    #[serde(default = "one_u32")]
    pub first_diagnosis_day: u32,
    /// Detection thresholds.
    #[serde(default)]
    pub exposure: ExposureConfig,
    /// Rate-limit caps.
    #[serde(default)]
    pub rate_limits: RateLimitConfig,
    /// Whether phones apply the nearby-device cap.
    #[serde(default)]
    pub user_rate_limit: bool,
    /// Scripted world (world = "scripted").
    #[serde(default)]
    pub script: Option<Script>,
}

fn default_name() -> String {
    "scenario".into()
}
fn one() -> f64 {
    1.0
}
fn one_u32() -> u32 {
    1
}
fn strong() -> GroupKind {
    GroupKind::Strong
}
fn default_cells() -> u32 {
    4
}
fn default_far() -> f64 {
    0.1
}
fn default_repeat() -> f64 {
    0.2
}

impl Scenario {
    /// A random-world scenario with defaults for everything optional.
    pub fn new(
        protocol: ProtocolId,
        num_users: u32,
        num_days: u32,
        patients_per_day: u32,
        contacts: u32,
        seed: u64,
    ) -> Self {
        Scenario {
            name: default_name(),
            num_users,
            num_days,
            new_patients_per_day: patients_per_day,
            contacts_per_user_per_day: contacts,
            adoption_rate: 1.0,
            loss_prob: 0.0,
            protocol,
            adversaries: Vec::new(),
            rng_seed: seed,
            group_kind: GroupKind::Strong,
            world: WorldMode::Random,
            durations: DurationMixture::default(),
            num_cells: default_cells(),
            far_fraction: default_far(),
            repeat_fraction: default_repeat(),
            first_diagnosis_day: 1,
            exposure: ExposureConfig::default(),
            rate_limits: RateLimitConfig::default(),
            user_rate_limit: false,
            script: None,
        }
    }

    /// Parses a scenario from JSON text.
    ///
    /// # Errors
    /// Syntax and schema errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        s.validate()?;
        Ok(s)
    }

    /// Reads and parses a scenario file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Serializes to pretty JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Checks ranges and consistency.
    ///
    /// # Errors
    /// Returns [`Error::Config`] describing the first violation.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.num_users == 0 || self.num_days == 0 {
            return bad("num_users and num_days must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.adoption_rate) {
            return bad(format!(
                "adoption_rate {} outside [0, 1]",
                self.adoption_rate
            ));
        }
        if !(0.0..1.0).contains(&self.loss_prob) {
            return bad(format!("loss_prob {} outside [0, 1)", self.loss_prob));
        }
        if self.new_patients_per_day > self.num_users {
            return bad("new_patients_per_day exceeds num_users".into());
        }
        if self.world != WorldMode::Scripted && self.contacts_per_user_per_day >= self.num_users {
            return bad("contacts_per_user_per_day must be below num_users".into());
        }
        for f in [
            self.far_fraction,
            self.repeat_fraction,
            self.durations.short,
            self.durations.medium,
            self.durations.long,
        ] {
            if !(0.0..=1.0).contains(&f) {
                return bad(format!("fraction {f} outside [0, 1]"));
            }
        }
        let mix = self.durations.short + self.durations.medium + self.durations.long;
        if (mix - 1.0).abs() > 1e-9 {
            return bad(format!("duration mixture sums to {mix}, not 1"));
        }
        if self.num_cells == 0 {
            return bad("num_cells must be positive".into());
        }
        if self.world == WorldMode::Scripted && self.script.is_none() {
            return bad("scripted world without a script".into());
        }
        if self.world == WorldMode::Regular && self.contacts_per_user_per_day % 2 == 1 {
            return bad("regular world needs an even contact count".into());
        }
        for a in &self.adversaries {
            a.validate()?;
            if let Some(c) = a.colluders.iter().find(|c| **c >= self.num_users) {
                return bad(format!("colluder {c} is not a user"));
            }
        }
        Ok(())
    }
}
