//! Scorecard assembly: every privacy, resiliency and cost check of a design
//! in one row, the flaw flags derived from them, and the cell-level diff
//! against expected matrices.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::adversaries::{
    analyze, privacy_run, privacy_scenario, run_attack, server_rate_limit_applicable, AttackId,
    AttackOutcome, LeakageReport, Mark, ResilienceCell, PRIVACY_COLUMNS,
};
use crate::crypto::hash_with_label;
use crate::error::{Error, Result};
use crate::protocols::{instantiate, ProtocolId};

use super::cost::{evaluate, follows_growth, growth, measure_cost, CostColumn, CostSummary};
use super::expected::{CostPoint, CostRow, ExpectedMatrices, FlagValue, Flaw, EXPECTED_VERSION};

/// Outcome of a pass/fail check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    /// The check holds.
    Pass,
    /// The check fails.
    Fail,
    /// Nothing to check.
    NotApplicable,
}

impl CheckStatus {
    /// Stable name.
    pub fn name(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::NotApplicable => "not-applicable",
        }
    }
}

/// Measured cost at the evaluation point and with `P` or `s` doubled.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CostCheck {
    /// Evaluation point.
    pub point: CostPoint,
    /// Figures at the point.
    pub base: CostSummary,
    /// Figures with `P` doubled.
    pub doubled_patients: CostSummary,
    /// Figures with `s` doubled.
    pub doubled_contacts: CostSummary,
    /// Check per column (empty without expected formulas).
    pub checks: BTreeMap<CostColumn, CheckStatus>,
}

/// Everything measured for one design.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ScorecardRow {
    /// Design.
    pub protocol: Option<ProtocolId>,
    /// Privacy marks by column.
    pub privacy: BTreeMap<String, Mark>,
    /// Utility features (informational).
    pub utility: BTreeMap<String, bool>,
    /// Resiliency cells by attack.
    pub resilience: BTreeMap<AttackId, ResilienceCell>,
    /// Whether the server-side rate limit is available.
    pub rate_limit_applicable: bool,
    /// Cost measurement.
    pub cost: Option<CostCheck>,
    /// Derived flaw flags.
    pub flaws: BTreeMap<Flaw, FlagValue>,
    /// Producing run of each section.
    pub sources: BTreeMap<String, String>,
    /// Full leakage analysis.
    #[serde(skip)]
    pub leakage: Option<LeakageReport>,
    /// Full attack outcomes.
    #[serde(skip)]
    pub attacks: BTreeMap<AttackId, AttackOutcome>,
}

/// A check that could not be run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellFailure {
    /// Design.
    pub protocol: ProtocolId,
    /// Section (`privacy`, `resilience:<attack>`, `cost`).
    pub section: String,
    /// Error text.
    pub error: String,
}

/// Rows for all designs of a suite run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Scorecard {
    /// Master seed.
    pub seed: u64,
    /// Rows in table order.
    pub rows: BTreeMap<ProtocolId, ScorecardRow>,
}

/// What to run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    /// Master seed; every cell derives its own seed from it.
    pub seed: u64,
    /// Designs to score.
    pub protocols: Vec<ProtocolId>,
    /// Where cost is measured.
    pub cost_point: CostPoint,
    /// Parallel workers.
    pub workers: usize,
}

impl SuiteConfig {
    /// All designs, default cost point, one worker per available core.
    pub fn new(seed: u64) -> Self {
        SuiteConfig {
            seed,
            protocols: ProtocolId::ALL.to_vec(),
            cost_point: CostPoint::default(),
            workers: std::thread::available_parallelism().map_or(1, usize::from),
        }
    }
}

/// Suite file: which designs to score, with which master seed and where
/// to measure cost. Every field is optional.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteFile {
    /// Master seed.
    pub seed: u64,
    /// Designs to score.
    pub protocols: Vec<ProtocolId>,
    /// Where cost is measured.
    pub cost_point: CostPoint,
}

impl Default for SuiteFile {
    fn default() -> Self {
        SuiteFile {
            seed: DEFAULT_SUITE_SEED,
            protocols: ProtocolId::ALL.to_vec(),
            cost_point: CostPoint::default(),
        }
    }
}

/// Master seed of the built-in suite.
pub const DEFAULT_SUITE_SEED: u64 = 42;

impl SuiteFile {
    /// Parses a suite file.
    ///
    /// # Errors
    /// [`Error::Parse`] with line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Reads a suite file.
    ///
    /// # Errors
    /// [`Error::Io`] if unreadable, otherwise as [`SuiteFile::from_json`].
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    /// The run configuration with one worker per available core.
    pub fn config(&self) -> SuiteConfig {
        SuiteConfig {
            seed: self.seed,
            protocols: self.protocols.clone(),
            cost_point: self.cost_point,
            ..SuiteConfig::new(self.seed)
        }
    }
}

/// Seed of one suite cell, derived from the master seed.
pub fn cell_seed(master: u64, protocol: ProtocolId, section: &str) -> u64 {
    let mut msg = master.to_be_bytes().to_vec();
    msg.extend_from_slice(protocol.name().as_bytes());
    msg.push(0);
    msg.extend_from_slice(section.as_bytes());
    let d = hash_with_label("pct/suite-cell", &msg);
    u64::from_be_bytes(d.as_bytes()[..8].try_into().expect("digest is 32 bytes"))
}

/// Designs that rely on cryptographic machinery without large-scale
/// deployment (private set intersection, blinded re-randomization, or
/// Diffie-Hellman per encounter pushed to every phone).
pub fn relies_on_undeployed_crypto(protocol: ProtocolId) -> bool {
    matches!(
        protocol,
        ProtocolId::SentInteractive | ProtocolId::ReceivedInteractive | ProtocolId::AgreedUser
    )
}

fn flag_from_mark(m: Option<&Mark>) -> FlagValue {
    match m {
        Some(Mark::Leaks) => FlagValue::Set,
        Some(Mark::Partial) => FlagValue::Partial,
        Some(Mark::Protected) => FlagValue::Clear,
        None => FlagValue::Unknown,
    }
}

/// Derives the flaw flags of a row from its constituent checks; a missing
/// check yields [`FlagValue::Unknown`].
pub fn flaw_flags(row: &ScorecardRow) -> BTreeMap<Flaw, FlagValue> {
    let p = |c: &str| flag_from_mark(row.privacy.get(c));
    let broadcast = [AttackId::DriveByEavesdrop, AttackId::HighPowerBroadcast];
    let df4 = if broadcast.iter().any(|a| !row.resilience.contains_key(a)) {
        FlagValue::Unknown
    } else if broadcast
        .iter()
        .any(|a| row.resilience[a] == ResilienceCell::Vulnerable)
        && !row.rate_limit_applicable
    {
        FlagValue::Set
    } else {
        FlagValue::Clear
    };
    let df5a = match &row.cost {
        None => FlagValue::Unknown,
        Some(c) if c.doubled_patients.user_download > c.base.user_download => FlagValue::Set,
        Some(_) => FlagValue::Clear,
    };
    let df5b = match row.protocol {
        Some(id) if relies_on_undeployed_crypto(id) => FlagValue::Set,
        Some(_) => FlagValue::Clear,
        None => FlagValue::Unknown,
    };
    BTreeMap::from([
        (Flaw::Df1, p("user-user-no-exposure")),
        (Flaw::Df2a, p("trace-all-server-psv")),
        (Flaw::Df2b, p("trace-patient-server-psv")),
        (Flaw::Df2c, p("trace-all-server-asv")),
        (Flaw::Df3, p("patient-identity")),
        (Flaw::Df4, df4),
        (Flaw::Df5a, df5a),
        (Flaw::Df5b, df5b),
    ])
}

/// Compares measured cost with expected formulas: token columns exactly at
/// all three points, computation columns by growth in `P` and `s`.
pub fn check_cost(formulas: &CostRow, c: &CostCheck) -> BTreeMap<CostColumn, CheckStatus> {
    let pt = c.point;
    let points = [
        (&c.base, pt.patients, pt.contacts),
        (&c.doubled_patients, 2 * pt.patients, pt.contacts),
        (&c.doubled_contacts, pt.patients, 2 * pt.contacts),
    ];
    let mut out = BTreeMap::new();
    for col in CostColumn::ALL {
        let status = match formulas.get(&col).and_then(Option::as_ref) {
            None => CheckStatus::NotApplicable,
            Some(f) => {
                let ok = if col.is_exact() || f.is_empty() {
                    points
                        .iter()
                        .all(|(m, p, s)| m.get(col) == evaluate(f, pt.num_users, *p, *s))
                } else {
                    follows_growth(
                        growth(f),
                        c.base.get(col),
                        c.doubled_patients.get(col),
                        c.doubled_contacts.get(col),
                    )
                };
                if ok {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                }
            }
        };
        out.insert(col, status);
    }
    out
}

/// Runs every check for one design. Checks that fail to run are reported
/// and leave their cells missing.
pub fn build_row(
    protocol: ProtocolId,
    cfg: &SuiteConfig,
    formulas: Option<&CostRow>,
) -> (ScorecardRow, Vec<CellFailure>) {
    let mut row = ScorecardRow {
        protocol: Some(protocol),
        ..ScorecardRow::default()
    };
    let mut failures = Vec::new();
    let mut fail = |section: &str, e: crate::error::Error| {
        failures.push(CellFailure {
            protocol,
            section: section.to_string(),
            error: e.to_string(),
        });
    };

    let seed = cell_seed(cfg.seed, protocol, "privacy");
    let scenario = privacy_scenario(protocol, seed);
    match privacy_run(&scenario).and_then(|r| analyze(&r)) {
        Ok(rep) => {
            row.privacy = rep.marks.clone();
            row.utility.insert(
                "user-risk-awareness".into(),
                rep.marks.get("exposure-status") == Some(&Mark::Leaks),
            );
            row.leakage = Some(rep);
            row.sources
                .insert("privacy".into(), format!("{} seed={seed}", scenario.name));
        }
        Err(e) => fail("privacy", e),
    }

    let spec = instantiate(protocol);
    row.rate_limit_applicable = server_rate_limit_applicable(&spec);
    row.utility.insert(
        "transmission-amount-awareness".into(),
        row.rate_limit_applicable,
    );
    for attack in AttackId::SCORED {
        let seed = cell_seed(cfg.seed, protocol, attack.name());
        match run_attack(protocol, attack, seed, false) {
            Ok(o) => {
                row.resilience.insert(attack, o.cell);
                row.sources.insert(
                    format!("resilience:{}", attack.name()),
                    format!("attack-{} seed={seed}", attack.name()),
                );
                row.attacks.insert(attack, o);
            }
            Err(e) => fail(&format!("resilience:{}", attack.name()), e),
        }
    }

    let pt = cfg.cost_point;
    let seed = cell_seed(cfg.seed, protocol, "cost");
    let measured = (|| -> Result<CostCheck> {
        Ok(CostCheck {
            point: pt,
            base: measure_cost(protocol, pt.num_users, pt.patients, pt.contacts, seed)?.summary(),
            doubled_patients: measure_cost(
                protocol,
                pt.num_users,
                2 * pt.patients,
                pt.contacts,
                seed,
            )?
            .summary(),
            doubled_contacts: measure_cost(
                protocol,
                pt.num_users,
                pt.patients,
                2 * pt.contacts,
                seed,
            )?
            .summary(),
            checks: BTreeMap::new(),
        })
    })();
    match measured {
        Ok(mut c) => {
            if let Some(f) = formulas {
                c.checks = check_cost(f, &c);
            }
            row.sources.insert(
                "cost".into(),
                format!(
                    "cost N={} P={} s={} (and doubled P, s) seed={seed}",
                    pt.num_users, pt.patients, pt.contacts
                ),
            );
            row.cost = Some(c);
        }
        Err(e) => fail("cost", e),
    }
    row.flaws = flaw_flags(&row);
    (row, failures)
}

/// Runs the whole suite, spreading designs over `cfg.workers` threads.
/// Rows are independent and seeded per cell, so the result does not depend
/// on scheduling.
pub fn build_scorecard(
    cfg: &SuiteConfig,
    expected: Option<&ExpectedMatrices>,
) -> (Scorecard, Vec<CellFailure>) {
    let next = AtomicUsize::new(0);
    let done: Mutex<Vec<(ScorecardRow, Vec<CellFailure>)>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..cfg.workers.clamp(1, cfg.protocols.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&p) = cfg.protocols.get(i) else {
                    break;
                };
                let formulas = expected.and_then(|e| e.cost.get(&p));
                let r = build_row(p, cfg, formulas);
                done.lock().expect("no worker panicked").push(r);
            });
        }
    });
    let mut sc = Scorecard {
        seed: cfg.seed,
        rows: BTreeMap::new(),
    };
    let mut failures = Vec::new();
    for (row, f) in done.into_inner().expect("no worker panicked") {
        failures.extend(f);
        sc.rows
            .insert(row.protocol.expect("rows carry their design"), row);
    }
    failures.sort_by(|a, b| (a.protocol, &a.section).cmp(&(b.protocol, &b.section)));
    (sc, failures)
}

/// One differing cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiffEntry {
    /// Design.
    pub protocol: ProtocolId,
    /// `privacy`, `resilience`, `flaws` or `cost`.
    pub table: String,
    /// Column.
    pub column: String,
    /// Expected value (`missing` if absent).
    pub expected: String,
    /// Computed value (`missing` if absent).
    pub computed: String,
}

fn name_of<T: Serialize>(v: Option<&T>) -> String {
    v.map_or_else(
        || "missing".to_string(),
        |v| {
            serde_json::to_value(v)
                .ok()
                .and_then(|j| j.as_str().map(String::from))
                .unwrap_or_default()
        },
    )
}

/// Cell-by-cell comparison of the scorecard's rows with the expected
/// matrices. Only the scorecard's designs are compared, so a partial
/// scorecard yields a diff restricted to its rows.
pub fn scorecard_diff(computed: &Scorecard, expected: &ExpectedMatrices) -> Vec<DiffEntry> {
    let mut out = Vec::new();
    let mut cmp = |p: ProtocolId, table: &str, column: &str, e: String, c: String| {
        if e != c {
            out.push(DiffEntry {
                protocol: p,
                table: table.into(),
                column: column.into(),
                expected: e,
                computed: c,
            });
        }
    };
    for (p, row) in &computed.rows {
        let ep = expected.privacy.get(p);
        for col in PRIVACY_COLUMNS {
            cmp(
                *p,
                "privacy",
                col,
                name_of(ep.and_then(|r| r.get(col))),
                name_of(row.privacy.get(col)),
            );
        }
        let er = expected.resilience.get(p);
        for a in AttackId::SCORED {
            cmp(
                *p,
                "resilience",
                a.name(),
                name_of(er.and_then(|r| r.get(&a))),
                name_of(row.resilience.get(&a)),
            );
        }
        let ef = expected.flaws.get(p);
        for f in Flaw::ALL {
            cmp(
                *p,
                "flaws",
                f.name(),
                name_of(ef.and_then(|r| r.get(&f))),
                name_of(row.flaws.get(&f)),
            );
        }
        if let Some(formulas) = expected.cost.get(p) {
            for col in CostColumn::ALL {
                let want = if formulas.get(&col).is_some_and(Option::is_some) {
                    CheckStatus::Pass
                } else {
                    CheckStatus::NotApplicable
                };
                let got = row
                    .cost
                    .as_ref()
                    .and_then(|c| c.checks.get(&col))
                    .map_or("missing", |s| s.name());
                cmp(*p, "cost", col.name(), want.name().into(), got.into());
            }
        }
    }
    out
}

impl ExpectedMatrices {
    /// The matrices a scorecard itself would predict (no cost formulas).
    pub fn from_scorecard(sc: &Scorecard) -> Self {
        let mut m = ExpectedMatrices {
            version: EXPECTED_VERSION,
            cost_point: CostPoint::default(),
            ..Default::default()
        };
        for (p, row) in &sc.rows {
            m.privacy.insert(*p, row.privacy.clone());
            m.resilience.insert(*p, row.resilience.clone());
            m.flaws.insert(*p, row.flaws.clone());
        }
        m
    }
}
