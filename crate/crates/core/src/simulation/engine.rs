//! The day-by-day simulation engine.
//!
//! Each simulated day runs, in order:
//!
//! 1. **Beacon exchange** — every transmission of the day is delivered
//!    slot by slot, subject to adoption, loss and the optional device cap;
//! 2. **Periodic uploads** for designs that have them;
//! 3. **Patient reports** from the users diagnosed that day;
//! 4. **Exposure discovery** — one match round over the new reports;
//! 5. **Maintenance** — retention pruning on phones and the server.
//!
//! The engine is single-threaded and deterministic: identical inputs give
//! identical results.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::IteratorRandom;
use rand::RngCore;
use serde::Serialize;

use super::oracle::ground_truth_oracle;
use super::scenario::Scenario;
use super::sub_rng;
use super::world::{generate_world, split_minutes, WorldTrace};
use crate::adversaries::DeviceCap;
use crate::crypto::{hash_with_label, Digest, GroupDesc};
use crate::error::{Error, Result};
use crate::framework::{
    issued_seed, match_round, patient_report, record_reception, user_periodic_upload, user_seed,
    Beacon, BeaconCache, DayRange, MatchContext, MatcherKind, QueryStorePolicy, Reception,
    ReceptionOutcome, RegistryEntry, Report, ReportItem, ReportKind, RoundCost, RoundOutcome,
    ServerState, TimeSlot, Upload, UserId, UserState, MINUTES_PER_DAY,
};
use crate::protocols::{instantiate, ProtocolId};

/// One direction of one session: the receiver hears the sender's beacon
/// stream.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Transmission {
    /// Session identifier (loss is drawn per session and direction).
    pub session: u64,
    /// 0 or 1: which direction of the session this is.
    pub direction: u8,
    /// Owner of the broadcast beacon stream.
    pub sender: UserId,
    /// Receiving phone.
    pub receiver: UserId,
    /// Start in absolute minutes.
    pub start_minute: u32,
    /// Length in minutes.
    pub minutes: u32,
    /// Distance as perceived by the receiver.
    pub distance_m: f64,
    /// Location cell of the receiver.
    pub cell: u32,
}

impl Transmission {
    /// Both directions of every world encounter.
    pub fn from_world(world: &WorldTrace) -> Vec<Transmission> {
        let mut v = Vec::with_capacity(world.encounters.len() * 2);
        for (i, e) in world.encounters.iter().enumerate() {
            for (direction, sender, receiver) in [(0u8, e.a, e.b), (1u8, e.b, e.a)] {
                v.push(Transmission {
                    session: i as u64,
                    direction,
                    sender,
                    receiver,
                    start_minute: e.start_minute,
                    minutes: e.minutes,
                    distance_m: e.distance_m,
                    cell: e.cell,
                });
            }
        }
        v
    }
}

/// Malicious behavior injected into a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AttackPlan {
    /// Transmissions that do not correspond to a real encounter.
    pub transmissions: Vec<Transmission>,
    /// Receivers that store every beacon regardless of distance and
    /// duration, and ignore any device cap.
    pub ignore_thresholds: BTreeSet<UserId>,
    /// Users that broadcast another user's beacon stream.
    pub seed_alias: BTreeMap<UserId, UserId>,
    /// Groups that pool their encounter stores when one of them reports.
    pub collusion_groups: Vec<BTreeSet<UserId>>,
    /// Junk items appended to each report section of the given patients.
    pub junk_items: BTreeMap<UserId, usize>,
    /// Malicious participants (always run the app).
    pub attackers: BTreeSet<UserId>,
}

impl AttackPlan {
    /// No attack.
    pub fn none() -> Self {
        AttackPlan::default()
    }
}

/// Knobs that do not change the simulated behavior.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EngineOptions {
    /// Keep every report, upload and round outcome for adversary analysis.
    pub keep_transcripts: bool,
}

/// Work done on one day.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DayCost {
    /// Day index.
    pub day: u32,
    /// Token units uploaded by each user in the periodic upload.
    pub upload_units: BTreeMap<UserId, u64>,
    /// Token units of each report submitted that day.
    pub report_units: BTreeMap<UserId, u64>,
    /// Match-round counters.
    pub round: RoundCost,
    /// Whether any report was submitted that day.
    pub had_reports: bool,
}

/// Everything exchanged on one day (kept with
/// [`EngineOptions::keep_transcripts`]).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DayTranscript {
    /// Day index.
    pub day: u32,
    /// Reports submitted.
    pub reports: Vec<Report>,
    /// Periodic uploads.
    pub uploads: Vec<Upload>,
    /// The match round.
    pub round: RoundOutcome,
}

/// Output of one run.
#[derive(Clone, Debug, Serialize)]
pub struct SimulationResult {
    /// Scenario label.
    pub scenario: String,
    /// Design under test.
    pub protocol: ProtocolId,
    /// Users running the app.
    pub adopters: BTreeSet<UserId>,
    /// Notified risk minutes per `(user, round day)`; only non-zero entries.
    #[serde(serialize_with = "super::serialize_pair_map")]
    pub detected: BTreeMap<(UserId, u32), u64>,
    /// Per-day costs.
    pub daily_costs: Vec<DayCost>,
    /// Patients flagged by the server-side rate limit.
    pub rate_limit_flags: BTreeSet<UserId>,
    /// Whether the server-side rate limit could be evaluated.
    pub rate_limit_applicable: bool,
    /// Phones that raised a too-many-devices alert.
    pub device_cap_alerts: BTreeSet<UserId>,
    /// Receptions suppressed by the device cap.
    pub device_cap_suppressed: u64,
    /// Aborted rounds as `(day, reason)`.
    pub aborted_rounds: Vec<(u32, String)>,
    /// Report items the server rejected as malformed.
    pub rejected_report_items: u64,
    /// The world the run was driven by.
    #[serde(skip)]
    pub world: WorldTrace,
    /// Daily transcripts (empty unless kept).
    #[serde(skip)]
    pub transcripts: Vec<DayTranscript>,
    /// Final phone states.
    #[serde(skip)]
    pub users: Vec<UserState>,
    /// Final server state.
    #[serde(skip)]
    pub server: Option<ServerState>,
}

impl SimulationResult {
    /// `(user, day)` pairs whose risk reaches the threshold.
    pub fn exposed(&self, threshold: u64) -> BTreeSet<(UserId, u32)> {
        self.detected
            .iter()
            .filter(|(_, r)| **r >= threshold)
            .map(|(k, _)| *k)
            .collect()
    }

    /// Total detected risk per user.
    pub fn totals(&self) -> BTreeMap<UserId, u64> {
        let mut t = BTreeMap::new();
        for ((u, _), r) in &self.detected {
            *t.entry(*u).or_insert(0) += r;
        }
        t
    }

    /// Canonical JSON of the serialized fields.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("result serializes")
    }
}

/// Generates the scenario's world and runs it without an attack.
pub fn run(scenario: &Scenario) -> Result<SimulationResult> {
    let world = generate_world(scenario)?;
    run_with(
        scenario,
        &world,
        &AttackPlan::none(),
        EngineOptions::default(),
    )
}

fn loss_draw(seed: u64, session: u64, direction: u8) -> f64 {
    let mut msg = seed.to_be_bytes().to_vec();
    msg.extend_from_slice(&session.to_be_bytes());
    msg.push(direction);
    let d = hash_with_label("pct/loss", &msg);
    let mut b = [0u8; 8];
    b.copy_from_slice(&d.as_bytes()[..8]);
    (u64::from_be_bytes(b) >> 11) as f64 / (1u64 << 53) as f64
}

fn random_junk<R: RngCore>(
    kind: ReportKind,
    opts_daily: bool,
    receipts: bool,
    group: &GroupDesc,
    day: u32,
    rng: &mut R,
) -> ReportItem {
    let mut bytes = [0u8; 32];
    rng.fill_bytes(&mut bytes);
    let digest = Digest::from_bytes(bytes);
    let elem = || group.hash_to_group(&bytes);
    match kind {
        ReportKind::Sent if opts_daily => ReportItem::DailySeed { day, seed: digest },
        ReportKind::Sent => ReportItem::Sent(Beacon::Prf(digest)),
        ReportKind::Received if receipts => {
            let e = elem();
            ReportItem::Receipt {
                u: e,
                v: e,
                minutes: 15,
                slot_hint: TimeSlot::first_of_day(day),
            }
        }
        ReportKind::Received => ReportItem::Received {
            beacon: Beacon::Group(elem()),
            minutes: 15,
        },
        ReportKind::Agreed => ReportItem::Agreed {
            shared: elem(),
            minutes: 15,
        },
    }
}

/// Runs `scenario` over a given world with an attack plan.
///
/// # Errors
/// Invalid scenarios, inconsistent plans and protocol failures other than
/// aborted interactions.
pub fn run_with(
    scenario: &Scenario,
    world: &WorldTrace,
    plan: &AttackPlan,
    opts: EngineOptions,
) -> Result<SimulationResult> {
    scenario.validate()?;
    if world.num_users != scenario.num_users || world.num_days != scenario.num_days {
        return Err(Error::Config(
            "world does not match the scenario dimensions".into(),
        ));
    }
    let n = scenario.num_users;
    for t in &plan.transmissions {
        if t.sender >= n || t.receiver >= n || t.minutes == 0 {
            return Err(Error::Config(
                "attack transmission refers to an unknown user".into(),
            ));
        }
        if t.start_minute / MINUTES_PER_DAY != (t.start_minute + t.minutes - 1) / MINUTES_PER_DAY {
            return Err(Error::Config("attack transmission crosses midnight".into()));
        }
    }
    let spec = instantiate(scenario.protocol);
    let group = GroupDesc::of_kind(scenario.group_kind);
    let cfg = scenario.exposure;
    let mut rng = sub_rng(scenario.rng_seed, "engine");

    // Setup: seeds, blinding secrets, adoption.
    let server_key = hash_with_label("pct/server-key", &scenario.rng_seed.to_be_bytes());
    let mut users: Vec<UserState> = (0..n)
        .map(|u| {
            let seed = if spec.options.beacon_registry {
                issued_seed(server_key.as_bytes(), u)
            } else {
                Ok(user_seed(scenario.rng_seed, u))
            };
            seed.map(|s| UserState::new(u, s))
        })
        .collect::<Result<_>>()?;
    for (u, owner) in &plan.seed_alias {
        let seed = users[*owner as usize].seed().to_vec();
        users[*u as usize].set_seed(seed);
    }
    if spec.id == ProtocolId::ReceivedInteractive {
        let mut srng = sub_rng(scenario.rng_seed, "blinding");
        for u in &mut users {
            u.blinding_secret = Some(group.random_scalar(&mut srng));
        }
    }
    let adopt_count = (scenario.adoption_rate * f64::from(n)).round() as usize;
    let mut adopters: BTreeSet<UserId> = (0..n)
        .choose_multiple(&mut sub_rng(scenario.rng_seed, "adoption"), adopt_count)
        .into_iter()
        .collect();
    adopters.extend(plan.attackers.iter().copied());
    for u in &mut users {
        u.active = adopters.contains(&u.id);
    }
    let diagnoses: BTreeMap<UserId, u32> = world.diagnoses.iter().copied().collect();

    let policy = if spec.options.query_and_discard {
        QueryStorePolicy::Discard
    } else {
        QueryStorePolicy::Store
    };
    let mut server = ServerState::new(scenario.rate_limits, policy);
    let mut cache = BeaconCache::new();

    let mut transmissions = Transmission::from_world(world);
    transmissions.extend(plan.transmissions.iter().copied());
    transmissions.sort_by(|a, b| {
        (a.start_minute, a.session, a.direction, a.sender, a.receiver).cmp(&(
            b.start_minute,
            b.session,
            b.direction,
            b.sender,
            b.receiver,
        ))
    });
    let mut by_day: BTreeMap<u32, Vec<Transmission>> = BTreeMap::new();
    for t in transmissions {
        by_day
            .entry(t.start_minute / MINUTES_PER_DAY)
            .or_default()
            .push(t);
    }
    let mut device_cap = scenario
        .user_rate_limit
        .then(|| DeviceCap::new(scenario.rate_limits.per_user_device_cap));
    let group_of: HashMap<UserId, &BTreeSet<UserId>> = plan
        .collusion_groups
        .iter()
        .flat_map(|g| g.iter().map(move |u| (*u, g)))
        .collect();

    let mut result = SimulationResult {
        scenario: scenario.name.clone(),
        protocol: scenario.protocol,
        adopters: adopters.clone(),
        detected: BTreeMap::new(),
        daily_costs: Vec::new(),
        rate_limit_flags: BTreeSet::new(),
        rate_limit_applicable: false,
        device_cap_alerts: BTreeSet::new(),
        device_cap_suppressed: 0,
        aborted_rounds: Vec::new(),
        rejected_report_items: 0,
        world: world.clone(),
        transcripts: Vec::new(),
        users: Vec::new(),
        server: None,
    };

    for day in 0..scenario.num_days {
        // Registry designs: the server issues the day's beacons.
        if spec.options.beacon_registry {
            for u in &users {
                for (i, b) in cache.day(&spec, &group, u, day)?.iter().enumerate() {
                    let slot = TimeSlot(TimeSlot::first_of_day(day).0 + i as u32);
                    server
                        .beacon_registry
                        .insert(hex(&b.encode()), RegistryEntry { user: u.id, slot });
                }
            }
        }

        // 1. Beacon exchange.
        for t in by_day.get(&day).map(Vec::as_slice).unwrap_or(&[]) {
            if !(users[t.sender as usize].active && users[t.receiver as usize].active) {
                continue;
            }
            if scenario.loss_prob > 0.0
                && loss_draw(scenario.rng_seed, t.session, t.direction) < scenario.loss_prob
            {
                continue;
            }
            let malicious = plan.ignore_thresholds.contains(&t.receiver);
            for (slot, minutes) in split_minutes(t.start_minute, t.minutes) {
                let beacon = cache.beacon(&spec, &group, &users[t.sender as usize], slot)?;
                if let Some(cap) = device_cap.as_mut() {
                    if !malicious
                        && t.distance_m <= cfg.proximity_m
                        && !cap.admit(t.receiver, slot.0, beacon)
                    {
                        continue;
                    }
                }
                let r = Reception {
                    beacon,
                    slot,
                    distance_m: t.distance_m,
                    minutes,
                    session_minutes: t.minutes,
                };
                let outcome = record_reception(
                    &spec,
                    &group,
                    &cfg,
                    &mut users[t.receiver as usize],
                    &r,
                    malicious,
                )?;
                debug_assert!(outcome != ReceptionOutcome::Malformed);
            }
        }
        if let Some(cap) = device_cap.as_mut() {
            cap.prune(TimeSlot::first_of_day(day + 1).0);
        }

        // 2. Periodic uploads.
        let mut cost = DayCost {
            day,
            ..DayCost::default()
        };
        let mut uploads = Vec::new();
        for u in users.iter().filter(|u| u.active) {
            if let Some(up) =
                user_periodic_upload(&spec, &group, u, day, cfg.retention_days, &mut cache)?
            {
                let replace = matches!(
                    (spec.report_kind, spec.matcher),
                    (ReportKind::Sent, MatcherKind::Server)
                        | (ReportKind::Received, MatcherKind::Server)
                );
                server.store_upload(&up, replace);
                cost.upload_units.insert(u.id, up.units() as u64);
                if opts.keep_transcripts {
                    uploads.push(up);
                }
            }
        }

        // 3. Patient reports.
        let mut reports = Vec::new();
        let todays: Vec<UserId> = diagnoses
            .iter()
            .filter(|(_, d)| **d == day)
            .map(|(u, _)| *u)
            .collect();
        for p in todays {
            users[p as usize].diagnosed_on = Some(day);
            if !users[p as usize].active {
                continue;
            }
            let window = DayRange::infectious_window(day);
            let mut reporter = users[p as usize].clone();
            if let Some(g) = group_of.get(&p) {
                for m in g.iter().filter(|m| **m != p) {
                    for rec in users[*m as usize].encounter_store.clone() {
                        reporter.push_record(rec);
                    }
                }
            }
            let mut report =
                patient_report(&spec, &group, &reporter, window, &mut cache, &mut rng)?;
            if let Some(&junk) = plan.junk_items.get(&p) {
                let receipts = spec.options.randomized_receipts;
                for section in &mut report.sections {
                    for _ in 0..junk {
                        let item = random_junk(
                            spec.report_kind,
                            spec.options.daily_seed,
                            receipts,
                            &group,
                            section.day,
                            &mut rng,
                        );
                        section.items.push(item);
                    }
                }
            }
            cost.report_units.insert(p, report.units() as u64);
            reports.push(report);
        }
        cost.had_reports = !reports.is_empty();

        // 4. Exposure discovery.
        let ctx = MatchContext {
            spec: &spec,
            group: &group,
            day,
            retention_days: cfg.retention_days,
            per_report_size_cap: scenario.rate_limits.per_report_size_cap,
            per_patient_exposure_cap: scenario.rate_limits.per_patient_exposure_cap,
        };
        let round = match_round(&ctx, &mut server, &users, &reports, &mut cache, &mut rng)?;
        server.patient_reports.extend(reports.iter().cloned());
        result.rate_limit_applicable |= round.rate_limit.applicable;
        result
            .rate_limit_flags
            .extend(round.rate_limit.flagged.iter().copied());
        if let Some(reason) = &round.aborted {
            result.aborted_rounds.push((day, reason.clone()));
        }
        for (u, output) in &round.outputs {
            let risk = output.risk_minutes();
            if risk > 0 {
                *result.detected.entry((*u, day)).or_insert(0) += risk;
                users[*u as usize].notified_risk += risk;
            }
        }
        cost.round = round.cost.clone();
        result.daily_costs.push(cost);
        if opts.keep_transcripts {
            result.transcripts.push(DayTranscript {
                day,
                reports,
                uploads,
                round,
            });
        }

        // 5. Maintenance.
        for u in &mut users {
            u.maintain(day + 1, cfg.retention_days);
        }
        server.maintain(day + 1, cfg.retention_days);
        let oldest = (day + 1).saturating_sub(cfg.retention_days.saturating_sub(1));
        if !opts.keep_transcripts {
            server.beacon_registry.retain(|_, e| e.slot.day() >= oldest);
        }
        cache.prune(oldest);
    }
    if let Some(cap) = device_cap {
        result.device_cap_alerts = cap.alerts;
        result.device_cap_suppressed = cap.suppressed;
    }
    result.rejected_report_items = server.rejected_report_items;
    result.users = users;
    result.server = Some(server);
    Ok(result)
}

/// Lowercase hex of `bytes`.
pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Empirical detection fraction (detected minutes over ground-truth
/// minutes of the fully-adopted world) for each adoption rate.
///
/// The analytic reference is `p²`: an exposure needs both parties to run
/// the app.
pub fn detection_rate_vs_adoption(scenario: &Scenario, rates: &[f64]) -> Result<Vec<(f64, f64)>> {
    let world = generate_world(scenario)?;
    let oracle = ground_truth_oracle(&world, &scenario.exposure).total_minutes();
    rates
        .iter()
        .map(|p| {
            let mut s = scenario.clone();
            s.adoption_rate = *p;
            let r = run_with(&s, &world, &AttackPlan::none(), EngineOptions::default())?;
            let detected: u64 = r.detected.values().sum();
            Ok((
                *p,
                if oracle == 0 {
                    0.0
                } else {
                    detected as f64 / oracle as f64
                },
            ))
        })
        .collect()
}
