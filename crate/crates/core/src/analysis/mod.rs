//! Cost accounting, scorecard assembly, design-flaw flags and diffing
//! against expected matrices.

pub mod cost;
pub mod expected;
pub mod report;
pub mod scorecard;

pub use cost::{
    cost_ledger, cost_scenario, evaluate, follows_growth, growth, measure_cost, CostColumn,
    CostLedger, CostSummary, Formula, Term, GROWTH_TOLERANCE, STEADY_DAY,
};
pub use expected::{
    CostPoint, CostRow, ExpectedMatrices, FlagValue, Flaw, DEFAULT_EXPECTED, EXPECTED_VERSION,
};
pub use report::{
    attacks_csv, diff_csv, diff_text, leakage_csv, ledger_csv, scorecard_csv, scorecard_text,
};
pub use scorecard::{
    build_row, build_scorecard, cell_seed, check_cost, flaw_flags, relies_on_undeployed_crypto,
    scorecard_diff, CellFailure, CheckStatus, CostCheck, DiffEntry, Scorecard, ScorecardRow,
    SuiteConfig, SuiteFile, DEFAULT_SUITE_SEED,
};
