//! Resiliency attacks as injected engine behavior.
//!
//! Every attack uses a fixed layout on top of a light random background
//! world (at least 120 users, attack on day 1):
//!
//! * the reporting attacker is user 0 (or the first colluder);
//! * targets are users 10–69 (colluders excluded);
//! * relay regions are users 70–89 (A) and 90–109 (B).
//!
//! An attack succeeds when some user ends up with more detected risk than
//! the ground-truth oracle assigns from real encounters.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::config::{AdversaryConfig, AdversaryKind, AttackId};
use crate::error::{Error, Result};
use crate::framework::{UserId, MINUTES_PER_DAY, SLOT_MINUTES};
use crate::protocols::ProtocolId;
use crate::simulation::{
    generate_world, ground_truth_oracle, run_with, AttackPlan, EngineOptions, OracleResult,
    Scenario, SimulationResult, Transmission, WorldTrace,
};

/// Day on which the attack takes place and the attacker reports.
pub const ATTACK_DAY: u32 = 1;
/// Smallest population the attack layout fits into.
pub const MIN_ATTACK_USERS: u32 = 120;
/// Targets reached by single-device attacks.
pub const TARGETS: std::ops::Range<UserId> = 10..70;
/// Relay region A.
pub const REGION_A: std::ops::Range<UserId> = 70..90;
/// Relay region B.
pub const REGION_B: std::ops::Range<UserId> = 90..110;
/// Junk items per report day in the resource-exhaustion attack.
pub const JUNK_PER_DAY: usize = 200;

const ATTACK_START: u32 = ATTACK_DAY * MINUTES_PER_DAY + 60 * SLOT_MINUTES;
const ATTACK_MINUTES: u32 = 20;
const RELAY_MINUTES: u32 = 8;
const FAR_M: f64 = 8.0;
const SESSION_BASE: u64 = 1 << 32;

/// Outcome class of one (protocol, attack) cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResilienceCell {
    /// No false exposure.
    Resistant,
    /// False exposures, but the server-side rate limit flags the attacker.
    Mitigated,
    /// False exposures that go unnoticed.
    Vulnerable,
}

impl ResilienceCell {
    /// One-letter symbol.
    pub fn symbol(self) -> &'static str {
        match self {
            ResilienceCell::Resistant => "R",
            ResilienceCell::Mitigated => "M",
            ResilienceCell::Vulnerable => "V",
        }
    }
}

/// A fully planned attack run.
#[derive(Clone, Debug)]
pub struct AttackSetup {
    /// The scenario (with the adversary configured).
    pub scenario: Scenario,
    /// The world including the attack's diagnoses.
    pub world: WorldTrace,
    /// Injected behavior.
    pub plan: AttackPlan,
    /// Patients whose reports carry the attack; flagging one of them
    /// counts as catching the attack.
    pub reporters: BTreeSet<UserId>,
}

/// Result of one attack run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AttackOutcome {
    /// Design under attack.
    pub protocol: ProtocolId,
    /// Attack carried out.
    pub attack: AttackId,
    /// Users with more detected risk than real encounters justify.
    pub false_exposures: usize,
    /// Whether the server-side rate limit is available for this design.
    pub rate_limit_applicable: bool,
    /// Whether a reporting attacker was flagged.
    pub attacker_flagged: bool,
    /// Derived cell.
    pub cell: ResilienceCell,
    /// Receptions suppressed by the phone-side device cap.
    pub device_cap_suppressed: u64,
}

/// Extra cost caused by a resource-exhaustion report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExhaustionOutcome {
    /// Design under attack.
    pub protocol: ProtocolId,
    /// Junk items per report day.
    pub junk_per_day: usize,
    /// Largest per-user download on the attack day, honest run.
    pub baseline_download: u64,
    /// Largest per-user download on the attack day, attacked run.
    pub attacked_download: u64,
    /// Server comparisons on the attack day, honest run.
    pub baseline_server_comparisons: u64,
    /// Server comparisons on the attack day, attacked run.
    pub attacked_server_comparisons: u64,
    /// Whether the attacker was flagged by the report-size cap.
    pub attacker_flagged: bool,
}

/// The standard attack scenario: 120 users, three days, a light random
/// background (4 contacts a day) and no organic diagnoses.
pub fn attack_scenario(protocol: ProtocolId, attack: AttackId, seed: u64) -> Scenario {
    let mut s = Scenario::new(protocol, MIN_ATTACK_USERS, 3, 0, 4, seed);
    s.name = format!("attack-{}-{}", attack.name(), protocol.name());
    let colluders = if attack.needs_colluders() {
        (0..10).collect()
    } else {
        BTreeSet::new()
    };
    s.adversaries = vec![AdversaryConfig {
        kind: AdversaryKind::AdvancedUser,
        sniffer_cells: BTreeSet::new(),
        colluders,
        attack: Some(attack),
    }];
    s
}

fn tx(
    k: &mut u64,
    sender: UserId,
    receiver: UserId,
    start: u32,
    minutes: u32,
    distance_m: f64,
) -> Transmission {
    *k += 1;
    Transmission {
        session: SESSION_BASE + *k,
        direction: 0,
        sender,
        receiver,
        start_minute: start,
        minutes,
        distance_m,
        cell: 0,
    }
}

fn set_diagnosis(world: &mut WorldTrace, user: UserId, day: u32) {
    world.diagnoses.retain(|(u, _)| *u != user);
    world.diagnoses.push((user, day));
    world.diagnoses.sort_by_key(|(u, d)| (*d, *u));
}

/// Plans the attack described by `cfg` over `world`.
///
/// # Errors
/// * the adversary must be a participant able to modify its app
///   (advanced user or user with sniffers);
/// * the scenario must have at least 120 users and two days.
pub fn plan_attack(
    scenario: &Scenario,
    cfg: &AdversaryConfig,
    world: &WorldTrace,
) -> Result<AttackSetup> {
    cfg.validate()?;
    let attack = cfg
        .attack
        .ok_or_else(|| Error::Config("adversary has no attack".into()))?;
    if cfg.kind.is_server() || cfg.kind == AdversaryKind::BasicUser {
        return Err(Error::Config(format!(
            "attack {attack} needs a participant running modified software, not {:?}",
            cfg.kind
        )));
    }
    if scenario.num_users < MIN_ATTACK_USERS || scenario.num_days <= ATTACK_DAY {
        return Err(Error::Config(format!(
            "attack layouts need at least {MIN_ATTACK_USERS} users and {} days",
            ATTACK_DAY + 1
        )));
    }
    let mut world = world.clone();
    let mut plan = AttackPlan::default();
    let mut k = 0u64;
    let colluders: Vec<UserId> = if cfg.colluders.is_empty() {
        vec![0]
    } else {
        cfg.colluders.iter().copied().collect()
    };
    let attacker = colluders[0];
    let targets: Vec<UserId> = TARGETS
        .filter(|t| !cfg.colluders.contains(t) && *t != attacker)
        .collect();
    let mut reporters = BTreeSet::from([attacker]);
    let hear = |plan: &mut AttackPlan, k: &mut u64, from: UserId, to: UserId, d: f64| {
        plan.transmissions
            .push(tx(k, from, to, ATTACK_START, ATTACK_MINUTES, d));
    };
    match attack {
        AttackId::DriveByEavesdrop => {
            for t in &targets {
                hear(&mut plan, &mut k, *t, attacker, FAR_M);
            }
            plan.ignore_thresholds.insert(attacker);
        }
        AttackId::HighPowerBroadcast => {
            for t in &targets {
                hear(&mut plan, &mut k, attacker, *t, 1.0);
            }
        }
        AttackId::HighPowerDevice => {
            for t in &targets {
                hear(&mut plan, &mut k, attacker, *t, 1.0);
                hear(&mut plan, &mut k, *t, attacker, FAR_M);
            }
            plan.ignore_thresholds.insert(attacker);
        }
        AttackId::SameBeacon | AttackId::Pooling => {
            let per = targets.len().div_ceil(colluders.len());
            for (i, chunk) in targets.chunks(per).enumerate() {
                let device = colluders[i % colluders.len()];
                for t in chunk {
                    if attack == AttackId::SameBeacon {
                        hear(&mut plan, &mut k, device, *t, 1.0);
                        hear(&mut plan, &mut k, *t, device, 1.0);
                    } else {
                        // The device impersonates every colluder at once.
                        for c in &colluders {
                            hear(&mut plan, &mut k, *c, *t, 1.0);
                            hear(&mut plan, &mut k, *t, *c, 1.0);
                        }
                    }
                }
            }
            if attack == AttackId::SameBeacon {
                for c in &colluders[1..] {
                    plan.seed_alias.insert(*c, attacker);
                }
            }
            plan.collusion_groups
                .push(colluders.iter().copied().collect());
            plan.attackers.extend(colluders.iter().copied());
        }
        AttackId::Forwarding | AttackId::Tunneling => {
            for a in REGION_A {
                for b in REGION_B {
                    plan.transmissions
                        .push(tx(&mut k, a, b, ATTACK_START + 1, RELAY_MINUTES, 1.0));
                    if attack == AttackId::Tunneling {
                        plan.transmissions.push(tx(
                            &mut k,
                            b,
                            a,
                            ATTACK_START + 1,
                            RELAY_MINUTES,
                            1.0,
                        ));
                    }
                }
            }
            reporters = BTreeSet::from([REGION_A.start, REGION_B.start]);
        }
        AttackId::ResourceExhaustion => {
            plan.junk_items.insert(attacker, JUNK_PER_DAY);
        }
    }
    for r in &reporters {
        set_diagnosis(&mut world, *r, ATTACK_DAY);
    }
    if !matches!(attack, AttackId::Forwarding | AttackId::Tunneling) {
        plan.attackers.insert(attacker);
    }
    Ok(AttackSetup {
        scenario: scenario.clone(),
        world,
        plan,
        reporters,
    })
}

/// Users whose total detected risk exceeds the ground truth.
pub fn false_exposures(result: &SimulationResult, oracle: &OracleResult) -> BTreeSet<UserId> {
    let truth = oracle.totals();
    result
        .totals()
        .into_iter()
        .filter(|(u, r)| *r > truth.get(u).copied().unwrap_or(0))
        .map(|(u, _)| u)
        .collect()
}

fn classify(false_exposures: usize, applicable: bool, flagged: bool) -> ResilienceCell {
    if false_exposures == 0 {
        ResilienceCell::Resistant
    } else if applicable && flagged {
        ResilienceCell::Mitigated
    } else {
        ResilienceCell::Vulnerable
    }
}

/// Runs the attack of the scenario's first attacking adversary.
pub fn run_attack_in(scenario: &Scenario) -> Result<(AttackOutcome, SimulationResult)> {
    let cfg = scenario
        .adversaries
        .iter()
        .find(|a| a.attack.is_some())
        .ok_or_else(|| Error::Config("scenario has no attacking adversary".into()))?;
    let world = generate_world(scenario)?;
    let setup = plan_attack(scenario, cfg, &world)?;
    let result = run_with(
        &setup.scenario,
        &setup.world,
        &setup.plan,
        EngineOptions::default(),
    )?;
    let oracle = ground_truth_oracle(&setup.world, &setup.scenario.exposure);
    let fe = false_exposures(&result, &oracle).len();
    let flagged = result
        .rate_limit_flags
        .iter()
        .any(|p| setup.reporters.contains(p));
    let outcome = AttackOutcome {
        protocol: scenario.protocol,
        attack: cfg.attack.expect("found above"),
        false_exposures: fe,
        rate_limit_applicable: result.rate_limit_applicable,
        attacker_flagged: flagged,
        cell: classify(fe, result.rate_limit_applicable, flagged),
        device_cap_suppressed: result.device_cap_suppressed,
    };
    Ok((outcome, result))
}

/// Runs `attack` against `protocol` in the standard attack scenario.
pub fn run_attack(
    protocol: ProtocolId,
    attack: AttackId,
    seed: u64,
    user_rate_limit: bool,
) -> Result<AttackOutcome> {
    let mut s = attack_scenario(protocol, attack, seed);
    s.user_rate_limit = user_rate_limit;
    run_attack_in(&s).map(|(o, _)| o)
}

/// Compares the attack-day cost of a junk-flooding report with an honest
/// run over the same world.
pub fn exhaustion_cost(protocol: ProtocolId, seed: u64) -> Result<ExhaustionOutcome> {
    let s = attack_scenario(protocol, AttackId::ResourceExhaustion, seed);
    let world = generate_world(&s)?;
    let setup = plan_attack(&s, &s.adversaries[0], &world)?;
    let honest_plan = AttackPlan {
        attackers: setup.plan.attackers.clone(),
        ..AttackPlan::default()
    };
    let honest = run_with(&s, &setup.world, &honest_plan, EngineOptions::default())?;
    let attacked = run_with(&s, &setup.world, &setup.plan, EngineOptions::default())?;
    let day_cost = |r: &SimulationResult| {
        let c = &r.daily_costs[ATTACK_DAY as usize].round;
        (
            c.download_units.values().copied().max().unwrap_or(0),
            c.server_comparisons,
        )
    };
    let (bd, bs) = day_cost(&honest);
    let (ad, as_) = day_cost(&attacked);
    Ok(ExhaustionOutcome {
        protocol,
        junk_per_day: JUNK_PER_DAY,
        baseline_download: bd,
        attacked_download: ad,
        baseline_server_comparisons: bs,
        attacked_server_comparisons: as_,
        attacker_flagged: attacked
            .rate_limit_flags
            .iter()
            .any(|p| setup.reporters.contains(p)),
    })
}

/// Outcomes of every scored attack against `protocol`, in column order.
pub fn resilience_row(
    protocol: ProtocolId,
    seed: u64,
) -> Result<BTreeMap<AttackId, AttackOutcome>> {
    AttackId::SCORED
        .iter()
        .map(|a| run_attack(protocol, *a, seed, false).map(|o| (*a, o)))
        .collect()
}
