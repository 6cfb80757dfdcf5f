//! Expected matrices: the reference privacy, resiliency and design-flaw
//! tables plus the cost formulas, shipped as JSON.
//!
//! The file is strict: unknown protocol names, unknown or missing columns
//! and unknown fields are load errors, so a typo cannot silently drop a
//! cell from the comparison.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adversaries::{AttackId, Mark, ResilienceCell, PRIVACY_COLUMNS};
use crate::error::{Error, Result};
use crate::protocols::ProtocolId;

use super::cost::{CostColumn, Formula};

/// The design flaws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flaw {
    /// Non-exposure interactions leak to a server without surveillance.
    Df1,
    /// All users' traces leak to a passive-surveillance server.
    Df2a,
    /// Patients' traces leak to a passive-surveillance server.
    Df2b,
    /// All users' traces leak to an active-surveillance server.
    Df2c,
    /// Users learn when their exposure happened.
    Df3,
    /// A broadcast-style attack works and cannot be rate-limited.
    Df4,
    /// Every user's download grows with the number of new patients.
    Df5a,
    /// Relies on cryptography never deployed at scale.
    Df5b,
}

impl Flaw {
    /// All flaws in table order.
    pub const ALL: [Flaw; 8] = [
        Flaw::Df1,
        Flaw::Df2a,
        Flaw::Df2b,
        Flaw::Df2c,
        Flaw::Df3,
        Flaw::Df4,
        Flaw::Df5a,
        Flaw::Df5b,
    ];

    /// Stable name.
    pub fn name(self) -> &'static str {
        match self {
            Flaw::Df1 => "df1",
            Flaw::Df2a => "df2a",
            Flaw::Df2b => "df2b",
            Flaw::Df2c => "df2c",
            Flaw::Df3 => "df3",
            Flaw::Df4 => "df4",
            Flaw::Df5a => "df5a",
            Flaw::Df5b => "df5b",
        }
    }
}

/// State of one flaw flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlagValue {
    /// The design has the flaw.
    Set,
    /// The design has the flaw under specific conditions.
    Partial,
    /// The design does not have the flaw.
    Clear,
    /// A constituent check is missing; never counts as clear.
    Unknown,
}

impl FlagValue {
    /// Symbol for aligned tables.
    pub fn symbol(self) -> &'static str {
        match self {
            FlagValue::Set => "X",
            FlagValue::Partial => "~",
            FlagValue::Clear => "-",
            FlagValue::Unknown => "?",
        }
    }
}

/// Where the cost formulas are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostPoint {
    /// `N`.
    pub num_users: u32,
    /// `P`.
    pub patients: u32,
    /// `s`.
    pub contacts: u32,
}

impl Default for CostPoint {
    fn default() -> Self {
        CostPoint {
            num_users: 100,
            patients: 2,
            contacts: 20,
        }
    }
}

/// Expected formula per cost column; `None` means the column has no
/// closed form to check.
pub type CostRow = BTreeMap<CostColumn, Option<Formula>>;

/// The whole expected-matrix file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedMatrices {
    /// File format version.
    pub version: u32,
    /// Privacy marks per design and column.
    pub privacy: BTreeMap<ProtocolId, BTreeMap<String, Mark>>,
    /// Resiliency cells per design and attack.
    pub resilience: BTreeMap<ProtocolId, BTreeMap<AttackId, ResilienceCell>>,
    /// Design-flaw flags per design.
    pub flaws: BTreeMap<ProtocolId, BTreeMap<Flaw, FlagValue>>,
    /// Cost formulas per design (optional section).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub cost: BTreeMap<ProtocolId, CostRow>,
    /// Evaluation point of the cost formulas.
    #[serde(default)]
    pub cost_point: CostPoint,
}

/// Current file format version.
pub const EXPECTED_VERSION: u32 = 1;

/// The reference matrices shipped with the crate.
pub const DEFAULT_EXPECTED: &str = include_str!("../../data/expected.json");

impl ExpectedMatrices {
    /// Parses and validates a matrix file.
    ///
    /// # Errors
    /// [`Error::Parse`] for malformed JSON (with line and column), unknown
    /// names, wrong versions or incomplete rows.
    pub fn from_json(text: &str) -> Result<Self> {
        let m: ExpectedMatrices =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    /// Reads and validates a matrix file.
    ///
    /// # Errors
    /// [`Error::Io`] if unreadable; otherwise as [`ExpectedMatrices::from_json`].
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The shipped reference matrices.
    ///
    /// # Panics
    /// Never for the shipped file (checked by tests).
    pub fn shipped() -> Self {
        Self::from_json(DEFAULT_EXPECTED).expect("shipped matrices are valid")
    }

    /// Pretty JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrices serialize")
    }

    /// Checks the version and that every row is complete.
    ///
    /// # Errors
    /// [`Error::Parse`] describing the first problem.
    pub fn validate(&self) -> Result<()> {
        if self.version != EXPECTED_VERSION {
            return Err(Error::Parse(format!(
                "unsupported matrix version {}",
                self.version
            )));
        }
        for (p, row) in &self.privacy {
            if let Some(c) = row.keys().find(|c| !PRIVACY_COLUMNS.contains(&c.as_str())) {
                return Err(Error::Parse(format!(
                    "{}: unknown privacy column `{c}`",
                    p.name()
                )));
            }
            if let Some(c) = PRIVACY_COLUMNS.iter().find(|c| !row.contains_key(**c)) {
                return Err(Error::Parse(format!(
                    "{}: missing privacy column `{c}`",
                    p.name()
                )));
            }
        }
        for (p, row) in &self.resilience {
            if let Some(a) = AttackId::SCORED.iter().find(|a| !row.contains_key(*a)) {
                return Err(Error::Parse(format!(
                    "{}: missing resilience column `{}`",
                    p.name(),
                    a.name()
                )));
            }
            if let Some(a) = row.keys().find(|a| !AttackId::SCORED.contains(a)) {
                return Err(Error::Parse(format!(
                    "{}: `{}` is not a scored attack",
                    p.name(),
                    a.name()
                )));
            }
        }
        for (p, row) in &self.flaws {
            if let Some(f) = Flaw::ALL.iter().find(|f| !row.contains_key(*f)) {
                return Err(Error::Parse(format!(
                    "{}: missing flaw `{}`",
                    p.name(),
                    f.name()
                )));
            }
            if row.values().any(|v| *v == FlagValue::Unknown) {
                return Err(Error::Parse(format!(
                    "{}: expected flags cannot be unknown",
                    p.name()
                )));
            }
        }
        for (p, row) in &self.cost {
            if let Some(c) = CostColumn::ALL.iter().find(|c| !row.contains_key(*c)) {
                return Err(Error::Parse(format!(
                    "{}: missing cost column `{}`",
                    p.name(),
                    c.name()
                )));
            }
        }
        Ok(())
    }
}
