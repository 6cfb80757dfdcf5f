//! What each adversary gets to see in a privacy run.
//!
//! A privacy run is an honest simulation with full transcripts plus, in
//! every sniffed cell, one adversary-owned device that broadcasts a beacon
//! in the first slot of every fourth hour. Sniffers record every beacon
//! broadcast in their cells. Which parts of the run an adversary may use is
//! decided by its [`AdversaryKind`]:
//!
//! * passive sniffers see real users' beacons only and hold no secrets;
//! * active sniffers additionally know their devices' beacons and secrets
//!   and derive the agreed values of every sniffed user beacon with them;
//! * server kinds see everything the server stores or receives;
//! * user kinds see what is published to users and their own outputs.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::crypto::{dh_shared, ordered_token_pair, Digest, GroupDesc, Scalar};
use crate::error::{Error, Result};
use crate::framework::{
    beacon_for_slot, secret_for_slot, Beacon, BeaconKind, RegistryEntry, Report, ReportItem,
    TimeSlot, Upload, UserId, UserState, SLOTS_PER_DAY, SLOT_MINUTES,
};
use crate::protocols::{instantiate, ProtocolId};
use crate::simulation::{
    generate_world, run_with, AttackPlan, Encounter, EngineOptions, Scenario, SimulationResult,
    WorldTrace,
};

use super::config::{AdversaryConfig, AdversaryKind};

/// Devices broadcast in the first slot of every `DEVICE_EVERY_HOURS`-th hour.
pub const DEVICE_EVERY_HOURS: u32 = 4;

/// How an observation was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Heard by a sniffer.
    Sniffed,
    /// Broadcast by an adversary device.
    Broadcast,
    /// Computed from a sniffed beacon and a device secret.
    Derived,
}

/// One located observation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Observation {
    /// Cell.
    pub cell: u32,
    /// Slot.
    pub slot: TimeSlot,
    /// Beacon or token bytes.
    pub key: Vec<u8>,
    /// How it was obtained.
    pub direction: Direction,
}

/// A secret behind an adversary broadcast.
#[derive(Clone, Copy, Debug)]
pub struct DeviceSecret {
    /// Cell of the device.
    pub cell: u32,
    /// Slot of the broadcast.
    pub slot: TimeSlot,
    /// The exponent.
    pub secret: Scalar,
}

/// Everything the server stores or receives over a run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ServerSnapshot {
    /// All patient reports.
    pub reports: Vec<Report>,
    /// All periodic uploads.
    pub uploads: Vec<Upload>,
    /// Issued beacons with owner and slot.
    pub registry: BTreeMap<String, RegistryEntry>,
    /// Interactive query tokens as `(user, day, token)`.
    pub query_tokens: Vec<(UserId, u32, Digest)>,
    /// Risk learned per `(user, day)`.
    #[serde(serialize_with = "crate::simulation::serialize_pair_map")]
    pub learned_risk: BTreeMap<(UserId, u32), u64>,
}

/// What users see.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PublishedView {
    /// Daily seeds published to users, with the publication day.
    pub daily_seeds: Vec<(u32, Digest)>,
    /// Slots each user could attribute a match to.
    pub matched_slots: BTreeMap<UserId, Vec<(u32, TimeSlot)>>,
}

/// The material available to one adversary.
#[derive(Clone, Debug)]
pub struct AdversaryView {
    /// Capability class.
    pub kind: AdversaryKind,
    /// Located observations.
    pub observed: Vec<Observation>,
    /// Server-side data (server kinds only).
    pub server_side: Option<ServerSnapshot>,
    /// Published data (user kinds only).
    pub published: Option<PublishedView>,
    /// Secrets of the adversary's broadcasts (active kinds only).
    pub own_secrets: Vec<DeviceSecret>,
}

/// An honest run instrumented for leakage analysis.
#[derive(Clone, Debug)]
pub struct PrivacyRun {
    /// Design under study.
    pub protocol: ProtocolId,
    /// Scenario as run (includes the device participants).
    pub scenario: Scenario,
    /// The run, with transcripts.
    pub result: SimulationResult,
    /// Users `0..real_users` are people; the rest are devices.
    pub real_users: u32,
    /// Device participants and their cells.
    pub devices: Vec<(UserId, u32)>,
    /// Slots in which devices broadcast.
    pub device_slots: BTreeSet<TimeSlot>,
    /// Cells with sniffers.
    pub sniffer_cells: BTreeSet<u32>,
    /// Where every participant was in every slot.
    pub presence: HashMap<(UserId, u32), u32>,
}

impl PrivacyRun {
    /// Users that were diagnosed.
    pub fn patients(&self) -> BTreeSet<UserId> {
        self.result
            .world
            .diagnoses
            .iter()
            .map(|(u, _)| *u)
            .collect()
    }

    /// Whether `user` is a person (not an adversary device).
    pub fn is_person(&self, user: UserId) -> bool {
        user < self.real_users
    }
}

/// The standard privacy scenario: 24 people, 16 days, 8 contacts a day,
/// one diagnosis a day from day 2, four cells, all sniffed.
pub fn privacy_scenario(protocol: ProtocolId, seed: u64) -> Scenario {
    let mut s = Scenario::new(protocol, 24, 16, 1, 8, seed);
    s.name = format!("privacy-{}", protocol.name());
    s.first_diagnosis_day = 2;
    s.adversaries = vec![AdversaryConfig::observer(
        AdversaryKind::ServerAsv,
        0..s.num_cells,
    )];
    s
}

/// Runs `scenario` with adversary devices placed in the sniffed cells of
/// its surveillance adversaries (all cells if none is configured).
///
/// # Errors
/// Scenario and protocol errors.
pub fn privacy_run(scenario: &Scenario) -> Result<PrivacyRun> {
    let sniffer_cells: BTreeSet<u32> = {
        let c: BTreeSet<u32> = scenario
            .adversaries
            .iter()
            .flat_map(|a| a.sniffer_cells.iter().copied())
            .collect();
        if c.is_empty() {
            (0..scenario.num_cells).collect()
        } else {
            c
        }
    };
    if let Some(c) = sniffer_cells.iter().find(|c| **c >= scenario.num_cells) {
        return Err(Error::Config(format!("sniffer cell {c} does not exist")));
    }
    let people = generate_world(scenario)?;
    let real_users = scenario.num_users;
    let devices: Vec<(UserId, u32)> = sniffer_cells
        .iter()
        .enumerate()
        .map(|(i, c)| (real_users + i as u32, *c))
        .collect();
    let mut world: WorldTrace = people.clone();
    world.num_users += devices.len() as u32;
    let blocks = world.locations.first().map_or(0, Vec::len);
    for (_, cell) in &devices {
        world.locations.push(vec![*cell; blocks]);
    }
    let mut device_slots = BTreeSet::new();
    for block in (0..blocks as u32).step_by(DEVICE_EVERY_HOURS as usize) {
        let start = block * 6 * SLOT_MINUTES;
        device_slots.insert(TimeSlot::containing_minute(start));
        for u in 0..real_users {
            let cell = people.locations[u as usize][block as usize];
            if let Some((d, _)) = devices.iter().find(|(_, c)| *c == cell) {
                world.push_encounter(Encounter {
                    a: *d,
                    b: u,
                    start_minute: start,
                    minutes: 2,
                    distance_m: 1.0,
                    cell,
                });
            }
        }
    }
    let mut run_scenario = scenario.clone();
    run_scenario.num_users = world.num_users;
    run_scenario.adoption_rate = 1.0;
    let result = run_with(
        &run_scenario,
        &world,
        &AttackPlan::none(),
        EngineOptions {
            keep_transcripts: true,
        },
    )?;
    let presence = world.presence();
    Ok(PrivacyRun {
        protocol: scenario.protocol,
        scenario: run_scenario,
        result,
        real_users,
        devices,
        device_slots,
        sniffer_cells,
        presence,
    })
}

fn user_state(run: &PrivacyRun, u: UserId) -> &UserState {
    &run.result.users[u as usize]
}

/// Every beacon of every person, with the slot it was broadcast in.
pub fn person_beacons(run: &PrivacyRun) -> Result<Vec<(UserId, TimeSlot, Beacon)>> {
    let spec = instantiate(run.protocol);
    let group = GroupDesc::of_kind(run.scenario.group_kind);
    let mut v = Vec::new();
    for u in 0..run.real_users {
        for t in 0..run.scenario.num_days * SLOTS_PER_DAY {
            v.push((
                u,
                TimeSlot(t),
                beacon_for_slot(&spec, &group, user_state(run, u), TimeSlot(t))?,
            ));
        }
    }
    Ok(v)
}

fn snapshot(run: &PrivacyRun) -> ServerSnapshot {
    let mut s = ServerSnapshot::default();
    for t in &run.result.transcripts {
        s.reports.extend(t.reports.iter().cloned());
        s.uploads.extend(t.uploads.iter().cloned());
        s.query_tokens.extend(
            t.round
                .server_view
                .query_tokens
                .iter()
                .map(|(u, d)| (*u, t.day, *d)),
        );
        for (u, r) in &t.round.server_view.learned_risk {
            s.learned_risk.insert((*u, t.day), *r);
        }
    }
    if let Some(server) = &run.result.server {
        s.registry = server.beacon_registry.clone();
    }
    s
}

fn published(run: &PrivacyRun) -> PublishedView {
    let mut p = PublishedView::default();
    for t in &run.result.transcripts {
        for r in &t.reports {
            for (_, item) in r.items() {
                if let ReportItem::DailySeed { seed, .. } = item {
                    p.daily_seeds.push((t.day, *seed));
                }
            }
        }
        for (u, out) in &t.round.outputs {
            let slots = out.matched_slots();
            if !slots.is_empty() {
                p.matched_slots
                    .entry(*u)
                    .or_default()
                    .extend(slots.into_iter().map(|s| (t.day, s)));
            }
        }
    }
    p
}

/// Builds the view of adversary `kind` over a privacy run.
///
/// # Errors
/// Crypto failures while deriving beacons.
pub fn adversary_view(run: &PrivacyRun, kind: AdversaryKind) -> Result<AdversaryView> {
    let spec = instantiate(run.protocol);
    let group = GroupDesc::of_kind(run.scenario.group_kind);
    let mut view = AdversaryView {
        kind,
        observed: Vec::new(),
        server_side: None,
        published: None,
        own_secrets: Vec::new(),
    };
    if kind.has_surveillance() {
        let mut sniffed: HashMap<(u32, TimeSlot), Vec<Beacon>> = HashMap::new();
        for (u, slot, b) in person_beacons(run)? {
            let cell = run.presence[&(u, slot.0)];
            if run.sniffer_cells.contains(&cell) {
                view.observed.push(Observation {
                    cell,
                    slot,
                    key: b.encode(),
                    direction: Direction::Sniffed,
                });
                if kind.is_active() && run.device_slots.contains(&slot) {
                    sniffed.entry((cell, slot)).or_default().push(b);
                }
            }
        }
        if kind.is_active() {
            for (d, cell) in &run.devices {
                for slot in &run.device_slots {
                    let b = beacon_for_slot(&spec, &group, user_state(run, *d), *slot)?;
                    view.observed.push(Observation {
                        cell: *cell,
                        slot: *slot,
                        key: b.encode(),
                        direction: Direction::Broadcast,
                    });
                    if spec.beacon_kind != BeaconKind::Group {
                        continue;
                    }
                    let a = secret_for_slot(&group, user_state(run, *d), *slot)?;
                    view.own_secrets.push(DeviceSecret {
                        cell: *cell,
                        slot: *slot,
                        secret: a,
                    });
                    for ub in sniffed.get(&(*cell, *slot)).into_iter().flatten() {
                        let shared = dh_shared(&a, ub.as_group().expect("group beacon"))?;
                        let mut keys = vec![shared.encode()];
                        keys.extend(
                            ordered_token_pair(&shared)
                                .iter()
                                .map(|d| d.as_bytes().to_vec()),
                        );
                        for key in keys {
                            view.observed.push(Observation {
                                cell: *cell,
                                slot: *slot,
                                key,
                                direction: Direction::Derived,
                            });
                        }
                    }
                }
            }
        }
    }
    if kind.is_server() {
        view.server_side = Some(snapshot(run));
    } else {
        view.published = Some(published(run));
    }
    Ok(view)
}
