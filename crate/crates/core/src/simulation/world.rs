//! Ground-truth world traces and their generator.

use std::collections::HashMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::scenario::{Scenario, WorldMode};
use super::sub_rng;
use crate::error::{Error, Result};
use crate::framework::{TimeSlot, UserId, MINUTES_PER_DAY, SLOTS_PER_DAY, SLOT_MINUTES};

/// Slots per location block (one hour).
pub const SLOTS_PER_BLOCK: u32 = 6;
/// Location blocks per day.
pub const BLOCKS_PER_DAY: u32 = SLOTS_PER_DAY / SLOTS_PER_BLOCK;

/// One continuous co-location session between two users.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Encounter {
    /// First participant.
    pub a: UserId,
    /// Second participant.
    pub b: UserId,
    /// Start in absolute minutes.
    pub start_minute: u32,
    /// Length in minutes.
    pub minutes: u32,
    /// Distance in metres.
    pub distance_m: f64,
    /// Location cell.
    pub cell: u32,
}

impl Encounter {
    /// Slot containing the first minute.
    pub fn start_slot(&self) -> TimeSlot {
        TimeSlot::containing_minute(self.start_minute)
    }

    /// Day of the session.
    pub fn day(&self) -> u32 {
        self.start_minute / MINUTES_PER_DAY
    }

    /// Slots overlapped by the session with the minutes in each.
    pub fn fragments(&self) -> Vec<(TimeSlot, u32)> {
        split_minutes(self.start_minute, self.minutes)
    }
}

/// Splits `[start, start + minutes)` into per-slot pieces.
pub fn split_minutes(start: u32, minutes: u32) -> Vec<(TimeSlot, u32)> {
    let mut out = Vec::new();
    let end = start + minutes;
    let mut m = start;
    while m < end {
        let slot = TimeSlot::containing_minute(m);
        let slot_end = (slot.0 + 1) * SLOT_MINUTES;
        let piece = slot_end.min(end) - m;
        out.push((slot, piece));
        m += piece;
    }
    out
}

/// Everything that really happened.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorldTrace {
    /// Number of users.
    pub num_users: u32,
    /// Number of days.
    pub num_days: u32,
    /// Encounters sorted by start.
    pub encounters: Vec<Encounter>,
    /// `(user, day)` diagnoses.
    pub diagnoses: Vec<(UserId, u32)>,
    /// Home cell of each user per location block (`[user][block]`).
    pub locations: Vec<Vec<u32>>,
}

impl WorldTrace {
    /// Diagnosis day of `user`.
    pub fn diagnosis_day(&self, user: UserId) -> Option<u32> {
        self.diagnoses
            .iter()
            .find(|(u, _)| *u == user)
            .map(|(_, d)| *d)
    }

    /// Cell of every user in every slot: the cell of an encounter covering
    /// the slot, else the home cell of the block.
    pub fn presence(&self) -> HashMap<(UserId, u32), u32> {
        let mut map = HashMap::new();
        for (u, blocks) in self.locations.iter().enumerate() {
            for (b, cell) in blocks.iter().enumerate() {
                for k in 0..SLOTS_PER_BLOCK {
                    map.insert((u as UserId, b as u32 * SLOTS_PER_BLOCK + k), *cell);
                }
            }
        }
        for e in &self.encounters {
            for (slot, _) in e.fragments() {
                map.insert((e.a, slot.0), e.cell);
                map.insert((e.b, slot.0), e.cell);
            }
        }
        map
    }

    /// Writes one CSV row per encounter.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record([
            "a",
            "b",
            "start_minute",
            "start_slot",
            "minutes",
            "distance_m",
            "cell",
        ])?;
        for e in &self.encounters {
            wr.write_record([
                e.a.to_string(),
                e.b.to_string(),
                e.start_minute.to_string(),
                e.start_slot().0.to_string(),
                e.minutes.to_string(),
                format!("{:.3}", e.distance_m),
                e.cell.to_string(),
            ])?;
        }
        wr.flush().map_err(Error::from)
    }

    /// Adds an encounter, keeping the order.
    pub fn push_encounter(&mut self, e: Encounter) {
        let pos = self
            .encounters
            .partition_point(|x| (x.start_minute, x.a, x.b) <= (e.start_minute, e.a, e.b));
        self.encounters.insert(pos, e);
    }
}

/// Generates the world of a scenario.
///
/// # Errors
/// Infeasible parameters yield [`Error::Config`].
pub fn generate_world(s: &Scenario) -> Result<WorldTrace> {
    s.validate()?;
    match s.world {
        WorldMode::Random => random_world(s),
        WorldMode::Regular => Ok(regular_world(s)),
        WorldMode::Scripted => scripted_world(s),
    }
}

fn random_locations<R: Rng>(s: &Scenario, rng: &mut R) -> Vec<Vec<u32>> {
    let blocks = s.num_days * BLOCKS_PER_DAY;
    (0..s.num_users)
        .map(|_| {
            let mut v = Vec::with_capacity(blocks as usize);
            let mut cur = rng.gen_range(0..s.num_cells);
            for _ in 0..blocks {
                if rng.gen_bool(0.3) {
                    cur = rng.gen_range(0..s.num_cells);
                }
                v.push(cur);
            }
            v
        })
        .collect()
}

fn random_world(s: &Scenario) -> Result<WorldTrace> {
    let mut rng = sub_rng(s.rng_seed, "world");
    let locations = random_locations(s, &mut rng);
    let mut encounters = Vec::new();
    let per_day = f64::from(s.num_users) * f64::from(s.contacts_per_user_per_day) / 2.0;
    for day in 0..s.num_days {
        let mut target = per_day.floor() as u64;
        if rng.gen_bool(per_day.fract()) {
            target += 1;
        }
        // Members of each cell per block.
        let mut members: HashMap<(u32, u32), Vec<UserId>> = HashMap::new();
        for (u, blocks) in locations.iter().enumerate() {
            for b in day * BLOCKS_PER_DAY..(day + 1) * BLOCKS_PER_DAY {
                members
                    .entry((b, blocks[b as usize]))
                    .or_default()
                    .push(u as UserId);
            }
        }
        let mut made = 0u64;
        let mut attempts = 0u64;
        while made < target {
            attempts += 1;
            if attempts > 1000 * (target + 1) {
                return Err(Error::Config(
                    "cannot place encounters: cells too sparse".into(),
                ));
            }
            let block = day * BLOCKS_PER_DAY + rng.gen_range(0..BLOCKS_PER_DAY);
            let a = rng.gen_range(0..s.num_users);
            let cell = locations[a as usize][block as usize];
            let others: Vec<UserId> = members[&(block, cell)]
                .iter()
                .copied()
                .filter(|u| *u != a)
                .collect();
            let Some(&b) = others.choose(&mut rng) else {
                continue;
            };
            let block_start = block * SLOTS_PER_BLOCK * SLOT_MINUTES;
            let block_len = SLOTS_PER_BLOCK * SLOT_MINUTES;
            let distance_m = if rng.gen_bool(s.far_fraction) {
                rng.gen_range(2.5..10.0)
            } else {
                rng.gen_range(0.2..1.8)
            };
            if target - made >= 2 && rng.gen_bool(s.repeat_fraction) {
                // Two intermittent sessions of the same pair.
                let m1 = rng.gen_range(5..=9);
                let gap = rng.gen_range(3..=10);
                let m2 = rng.gen_range(5..=9);
                let start = block_start + rng.gen_range(0..=block_len - (m1 + gap + m2));
                encounters.push(Encounter {
                    a,
                    b,
                    start_minute: start,
                    minutes: m1,
                    distance_m,
                    cell,
                });
                encounters.push(Encounter {
                    a,
                    b,
                    start_minute: start + m1 + gap,
                    minutes: m2,
                    distance_m,
                    cell,
                });
                made += 2;
            } else {
                let r: f64 = rng.gen();
                let minutes = if r < s.durations.short {
                    1
                } else if r < s.durations.short + s.durations.medium {
                    rng.gen_range(2..=14)
                } else {
                    rng.gen_range(15..=45)
                };
                let start = block_start + rng.gen_range(0..=block_len - minutes);
                encounters.push(Encounter {
                    a,
                    b,
                    start_minute: start,
                    minutes,
                    distance_m,
                    cell,
                });
                made += 1;
            }
        }
    }
    encounters.sort_by_key(|x| (x.start_minute, x.a, x.b));
    let mut diagnoses = Vec::new();
    let mut pool: Vec<UserId> = (0..s.num_users).collect();
    for day in s.first_diagnosis_day..s.num_days {
        pool.shuffle(&mut rng);
        for _ in 0..s.new_patients_per_day {
            if let Some(u) = pool.pop() {
                diagnoses.push((u, day));
            }
        }
    }
    Ok(WorldTrace {
        num_users: s.num_users,
        num_days: s.num_days,
        encounters,
        diagnoses,
        locations,
    })
}

fn regular_world(s: &Scenario) -> WorldTrace {
    let n = s.num_users;
    let half = s.contacts_per_user_per_day / 2;
    let mut encounters = Vec::new();
    for day in 0..s.num_days {
        for i in 0..n {
            for k in 1..=half {
                let j = (i + k) % n;
                let slot = (i * 7 + k * 13 + day) % SLOTS_PER_DAY;
                encounters.push(Encounter {
                    a: i,
                    b: j,
                    start_minute: day * MINUTES_PER_DAY + slot * SLOT_MINUTES + 2,
                    minutes: 5,
                    distance_m: 1.0,
                    cell: 0,
                });
            }
        }
    }
    encounters.sort_by_key(|x| (x.start_minute, x.a, x.b));
    let mut diagnoses = Vec::new();
    if s.new_patients_per_day > 0 && s.num_days > 0 {
        let spacing = n / s.new_patients_per_day;
        let last = s.num_days - 1;
        for j in 0..s.new_patients_per_day {
            diagnoses.push((j * spacing, last));
        }
    }
    let locations = vec![vec![0; (s.num_days * BLOCKS_PER_DAY) as usize]; n as usize];
    WorldTrace {
        num_users: n,
        num_days: s.num_days,
        encounters,
        diagnoses,
        locations,
    }
}

fn scripted_world(s: &Scenario) -> Result<WorldTrace> {
    let script = s
        .script
        .as_ref()
        .ok_or_else(|| Error::Config("scripted world without a script".into()))?;
    let horizon = s.num_days * MINUTES_PER_DAY;
    let mut encounters = Vec::new();
    for e in &script.encounters {
        if e.a == e.b || e.a >= s.num_users || e.b >= s.num_users {
            return Err(Error::Config(format!(
                "invalid scripted encounter between {} and {}",
                e.a, e.b
            )));
        }
        if e.minutes == 0 || e.start_minute + e.minutes > horizon {
            return Err(Error::Config(
                "scripted encounter outside the horizon or empty".into(),
            ));
        }
        if e.start_minute / MINUTES_PER_DAY != (e.start_minute + e.minutes - 1) / MINUTES_PER_DAY {
            return Err(Error::Config("scripted encounter crosses midnight".into()));
        }
        encounters.push(Encounter {
            a: e.a,
            b: e.b,
            start_minute: e.start_minute,
            minutes: e.minutes,
            distance_m: e.distance_m,
            cell: e.cell,
        });
    }
    encounters.sort_by_key(|x| (x.start_minute, x.a, x.b));
    let mut seen = std::collections::BTreeSet::new();
    for (u, d) in &script.diagnoses {
        if *u >= s.num_users || *d >= s.num_days || !seen.insert(*u) {
            return Err(Error::Config(format!(
                "invalid scripted diagnosis of user {u} on day {d}"
            )));
        }
    }
    let locations = vec![vec![0; (s.num_days * BLOCKS_PER_DAY) as usize]; s.num_users as usize];
    Ok(WorldTrace {
        num_users: s.num_users,
        num_days: s.num_days,
        encounters,
        diagnoses: script.diagnoses.clone(),
        locations,
    })
}
