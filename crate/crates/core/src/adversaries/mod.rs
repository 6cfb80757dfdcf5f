//! Executable adversaries: resiliency attacks, rate-limit defenses and
//! privacy-leakage oracles.

pub mod attacks;
pub mod config;
pub mod leakage;
pub mod rate_limit;
pub mod views;

pub use attacks::{
    attack_scenario, exhaustion_cost, false_exposures, plan_attack, resilience_row, run_attack,
    run_attack_in, AttackOutcome, AttackSetup, ExhaustionOutcome, ResilienceCell,
};
pub use config::{AdversaryConfig, AdversaryKind, AttackId};
pub use leakage::{
    analyze, exposure_time_probe, EdgeResult, Holder, LeakageReport, Mark, ProbeOutcome,
    TraceResult, PRIVACY_COLUMNS,
};
pub use rate_limit::{
    server_rate_limit, server_rate_limit_applicable, user_rate_limit, DeviceCap, RateLimitVerdict,
};
pub use views::{
    adversary_view, privacy_run, privacy_scenario, AdversaryView, Direction, Observation,
    PrivacyRun, PublishedView, ServerSnapshot,
};
