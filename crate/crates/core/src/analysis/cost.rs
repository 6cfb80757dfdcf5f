//! Daily communication and computation cost, counted from an honest run.
//!
//! Counting conventions:
//!
//! * one unit is one beacon, seed, token or group element on the wire;
//! * a user's daily upload is her periodic upload plus the elements she
//!   sends during an interactive round that day;
//! * a user's daily download is everything she receives from the server in
//!   that day's round;
//! * a patient's one-time cost is the size of her report;
//! * comparisons are naive pairwise comparison counts, so only their
//!   scaling in `P` and `s` is meaningful.
//!
//! Costs are read on a steady-state day — one on which every user holds a
//! full retention window — of the regular world, where every user has the
//! same number of contacts, so per-user figures are uniform. The day's `P`
//! patients are its only patients, so the rest of the population takes
//! part in the round.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::UserId;
use crate::protocols::ProtocolId;
use crate::simulation::{run, Scenario, SimulationResult, WorldMode};

/// Per-day cost figures of one run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CostLedger {
    /// Design.
    pub protocol: Option<ProtocolId>,
    /// Day the figures were taken on.
    pub day: u32,
    /// Users (`N`).
    pub num_users: u32,
    /// New patients per day (`P`).
    pub patients_per_day: u32,
    /// Contacts per user and day (`s`).
    pub contacts_per_day: u32,
    /// Units each user uploaded.
    pub upload_units: BTreeMap<UserId, u64>,
    /// Units each user downloaded.
    pub download_units: BTreeMap<UserId, u64>,
    /// Naive comparisons each user performed.
    pub user_comparisons: BTreeMap<UserId, u64>,
    /// Naive comparisons the server performed.
    pub server_comparisons: u64,
    /// Group exponentiations performed by all parties.
    pub exponentiations: u64,
    /// Report size of each patient reporting that day.
    pub report_units: BTreeMap<UserId, u64>,
}

/// The five figures a cost row is made of (maximum over users).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostSummary {
    /// Daily user upload.
    pub user_upload: u64,
    /// Daily user download.
    pub user_download: u64,
    /// Daily user comparisons.
    pub user_comp: u64,
    /// Daily server comparisons.
    pub server_comp: u64,
    /// One-time patient report.
    pub patient_report: u64,
}

impl CostSummary {
    /// Value of a column by name.
    pub fn get(&self, column: CostColumn) -> u64 {
        match column {
            CostColumn::UserUpload => self.user_upload,
            CostColumn::UserDownload => self.user_download,
            CostColumn::UserComp => self.user_comp,
            CostColumn::ServerComp => self.server_comp,
            CostColumn::PatientReport => self.patient_report,
        }
    }
}

/// Columns of the cost table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostColumn {
    /// Daily user upload (exact).
    UserUpload,
    /// Daily user download (exact).
    UserDownload,
    /// Daily user computation (shape only).
    UserComp,
    /// Daily server computation (shape only).
    ServerComp,
    /// One-time patient communication (exact).
    PatientReport,
}

impl CostColumn {
    /// All columns in table order.
    pub const ALL: [CostColumn; 5] = [
        CostColumn::UserUpload,
        CostColumn::UserDownload,
        CostColumn::UserComp,
        CostColumn::ServerComp,
        CostColumn::PatientReport,
    ];

    /// Whether the column is a token count (compared exactly).
    pub fn is_exact(self) -> bool {
        !matches!(self, CostColumn::UserComp | CostColumn::ServerComp)
    }

    /// Stable name.
    pub fn name(self) -> &'static str {
        match self {
            CostColumn::UserUpload => "user-upload",
            CostColumn::UserDownload => "user-download",
            CostColumn::UserComp => "user-comp",
            CostColumn::ServerComp => "server-comp",
            CostColumn::PatientReport => "patient-report",
        }
    }
}

impl CostLedger {
    /// Maximum over users of each figure.
    pub fn summary(&self) -> CostSummary {
        let max = |m: &BTreeMap<UserId, u64>| m.values().copied().max().unwrap_or(0);
        CostSummary {
            user_upload: max(&self.upload_units),
            user_download: max(&self.download_units),
            user_comp: max(&self.user_comparisons),
            server_comp: self.server_comparisons,
            patient_report: max(&self.report_units),
        }
    }
}

/// Reads the cost of `day` from an honest run.
///
/// # Errors
/// * the scenario carries an attack (the ledger measures honest cost);
/// * `day` was not simulated.
pub fn cost_ledger(result: &SimulationResult, scenario: &Scenario, day: u32) -> Result<CostLedger> {
    if scenario.adversaries.iter().any(|a| a.attack.is_some()) {
        return Err(Error::InvalidArgument(
            "cost is measured on honest runs only".into(),
        ));
    }
    let c = result
        .daily_costs
        .iter()
        .find(|c| c.day == day)
        .ok_or_else(|| Error::InvalidArgument(format!("day {day} was not simulated")))?;
    let mut upload = c.upload_units.clone();
    for (u, n) in &c.round.query_upload_units {
        *upload.entry(*u).or_insert(0) += n;
    }
    Ok(CostLedger {
        protocol: Some(scenario.protocol),
        day,
        num_users: scenario.num_users,
        patients_per_day: scenario.new_patients_per_day,
        contacts_per_day: scenario.contacts_per_user_per_day,
        upload_units: upload,
        download_units: c.round.download_units.clone(),
        user_comparisons: c.round.user_comparisons.clone(),
        server_comparisons: c.round.server_comparisons,
        exponentiations: c.round.exponentiations,
        report_units: c.report_units.clone(),
    })
}

/// The steady-state day of [`cost_scenario`]: the first with a full
/// retention window behind it.
pub const STEADY_DAY: u32 = 14;

/// Regular-world scenario for measuring cost with `P` new patients and `s`
/// contacts per day.
pub fn cost_scenario(
    protocol: ProtocolId,
    num_users: u32,
    patients: u32,
    contacts: u32,
    seed: u64,
) -> Scenario {
    let mut s = Scenario::new(
        protocol,
        num_users,
        STEADY_DAY + 1,
        patients,
        contacts,
        seed,
    );
    s.name = format!("cost-{}-P{patients}-s{contacts}", protocol.name());
    s.world = WorldMode::Regular;
    s
}

/// Runs [`cost_scenario`] and reads the steady-state day.
///
/// # Errors
/// Scenario and protocol errors.
pub fn measure_cost(
    protocol: ProtocolId,
    num_users: u32,
    patients: u32,
    contacts: u32,
    seed: u64,
) -> Result<CostLedger> {
    let scenario = cost_scenario(protocol, num_users, patients, contacts, seed);
    let result = run(&scenario)?;
    cost_ledger(&result, &scenario, STEADY_DAY)
}

/// One monomial `coef · P^p · s^s · N^n` of a cost formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    /// Constant factor.
    pub coef: u64,
    /// Exponent of `P`.
    #[serde(default)]
    pub p: u32,
    /// Exponent of `s`.
    #[serde(default)]
    pub s: u32,
    /// Exponent of `N`.
    #[serde(default)]
    pub n: u32,
}

/// A cost formula as a sum of terms; empty means "none" (zero).
pub type Formula = Vec<Term>;

/// Evaluates `f` at `(N, P, s)`.
pub fn evaluate(f: &[Term], num_users: u32, patients: u32, contacts: u32) -> u64 {
    f.iter()
        .map(|t| {
            t.coef
                * u64::from(patients).pow(t.p)
                * u64::from(contacts).pow(t.s)
                * u64::from(num_users).pow(t.n)
        })
        .sum()
}

/// Growth exponents of a formula in `P` and `s` (the largest over its
/// terms).
pub fn growth(f: &[Term]) -> (u32, u32) {
    (
        f.iter().map(|t| t.p).max().unwrap_or(0),
        f.iter().map(|t| t.s).max().unwrap_or(0),
    )
}

/// Relative slack of [`follows_growth`]. The closed forms are leading
/// order in `N ≫ P`: the users diagnosed on the measured day sit out its
/// round, so doubling `P` at `N = 100, P = 2` moves a per-participant total
/// by `96/98` — about 2%.
pub const GROWTH_TOLERANCE: f64 = 0.05;

/// Whether the measured values follow a formula's growth: doubling `P`
/// multiplies the value by `2^p` and doubling `s` by `2^s`, each within
/// [`GROWTH_TOLERANCE`].
pub fn follows_growth(exponents: (u32, u32), base: u64, doubled_p: u64, doubled_s: u64) -> bool {
    let close = |measured: u64, exponent: u32| {
        let want = (base as f64) * f64::from(1u32 << exponent);
        (measured as f64 - want).abs() <= GROWTH_TOLERANCE * want
    };
    base > 0 && close(doubled_p, exponents.0) && close(doubled_s, exponents.1)
}
