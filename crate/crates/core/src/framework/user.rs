//! Phone-side state: the encounter store and reception handling.

use serde::Serialize;

use super::beacon::{beacon_from_seed, slot_secret, Beacon, UserId};
use super::config::ExposureConfig;
use super::spec::{BeaconKind, ProtocolSpec, ReportKind};
use super::time::TimeSlot;
use crate::crypto::{dh_shared, GroupDesc, GroupElement, Scalar};
use crate::error::Result;

/// One stored encounter fragment: a peer beacon heard in one slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EncounterRecord {
    /// Slot in which the peer beacon was heard.
    pub slot: TimeSlot,
    /// The peer's beacon.
    pub peer: Beacon,
    /// The agreed value `g^{xx'}` (Agreed designs only).
    pub shared: Option<GroupElement>,
    /// The holder's own beacon in that slot (Agreed designs only).
    pub mine: Option<GroupElement>,
    /// Minutes of contact attributed to this fragment.
    pub minutes: u32,
}

/// A beacon arriving at a phone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reception {
    /// The beacon as received.
    pub beacon: Beacon,
    /// Slot the beacon was heard in.
    pub slot: TimeSlot,
    /// Estimated distance in metres.
    pub distance_m: f64,
    /// Minutes of this session that fall in `slot`.
    pub minutes: u32,
    /// Length of the whole continuous session.
    pub session_minutes: u32,
}

/// What [`record_reception`] did with a beacon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReceptionOutcome {
    /// A new record was stored.
    Recorded,
    /// An existing record for the same beacon and slot was extended.
    Extended,
    /// Too far away or too short.
    Filtered,
    /// The beacon belongs to a household member.
    Household,
    /// The beacon is not a valid value for this protocol.
    Malformed,
    /// The peer beacon equals the holder's own beacon.
    Degenerate,
}

/// State held by one phone.
#[derive(Clone, Debug, Serialize)]
pub struct UserState {
    /// Participant identifier.
    pub id: UserId,
    #[serde(skip)]
    seed: Vec<u8>,
    /// Seeds exchanged with household members.
    #[serde(skip)]
    pub household_seeds: Vec<Vec<u8>>,
    /// Stored encounter fragments.
    pub encounter_store: Vec<EncounterRecord>,
    /// Aggregated risk notified so far, in minutes.
    pub notified_risk: u64,
    /// Day of diagnosis, if diagnosed.
    pub diagnosed_on: Option<u32>,
    /// Receptions dropped because the beacon was malformed.
    pub dropped_malformed: u64,
    /// Receptions dropped because they came from a household member.
    pub dropped_household: u64,
    /// Whether the user runs the app at all (adoption).
    pub active: bool,
    /// Long-term secret used to blind uploaded sent beacons (interactive
    /// Received designs).
    #[serde(skip)]
    pub blinding_secret: Option<Scalar>,
}

impl UserState {
    /// A fresh phone with the given beacon seed.
    pub fn new(id: UserId, seed: Vec<u8>) -> Self {
        UserState {
            id,
            seed,
            household_seeds: Vec::new(),
            encounter_store: Vec::new(),
            notified_risk: 0,
            diagnosed_on: None,
            dropped_malformed: 0,
            dropped_household: 0,
            active: true,
            blinding_secret: None,
        }
    }

    /// The beacon seed `s`.
    pub fn seed(&self) -> &[u8] {
        &self.seed
    }

    /// Replaces the beacon seed (colluders that share one beacon stream).
    pub fn set_seed(&mut self, seed: Vec<u8>) {
        self.seed = seed;
    }

    /// Whether the user had been diagnosed on or before `day`.
    pub fn is_patient_by(&self, day: u32) -> bool {
        self.diagnosed_on.is_some_and(|d| d <= day)
    }

    /// Stores a record, merging it with an existing record for the same
    /// slot and peer beacon.
    pub fn push_record(&mut self, rec: EncounterRecord) -> ReceptionOutcome {
        if let Some(existing) = self
            .encounter_store
            .iter_mut()
            .rev()
            .find(|r| r.slot == rec.slot && r.peer == rec.peer && r.shared == rec.shared)
        {
            existing.minutes += rec.minutes;
            return ReceptionOutcome::Extended;
        }
        self.encounter_store.push(rec);
        ReceptionOutcome::Recorded
    }

    /// Drops records older than the retention window ending on `today`.
    pub fn maintain(&mut self, today: u32, retention_days: u32) {
        let oldest = today.saturating_sub(retention_days.saturating_sub(1));
        self.encounter_store.retain(|r| r.slot.day() >= oldest);
    }
}

/// The beacon `user` broadcasts in `slot`.
pub fn beacon_for_slot(
    spec: &ProtocolSpec,
    group: &GroupDesc,
    user: &UserState,
    slot: TimeSlot,
) -> Result<Beacon> {
    beacon_from_seed(spec, group, user.seed(), slot)
}

/// The secret exponent behind `user`'s group beacon in `slot`.
pub fn secret_for_slot(group: &GroupDesc, user: &UserState, slot: TimeSlot) -> Result<Scalar> {
    slot_secret(group, user.seed(), slot)
}

/// Handles one reception.
///
/// The beacon is stored only if it is well formed, not from a household
/// member, and the session is close and long enough (unless
/// `ignore_thresholds`, which models a malicious recorder). Agreed designs
/// also compute and store `g^{xx'}`.
pub fn record_reception(
    spec: &ProtocolSpec,
    group: &GroupDesc,
    cfg: &ExposureConfig,
    user: &mut UserState,
    r: &Reception,
    ignore_thresholds: bool,
) -> Result<ReceptionOutcome> {
    let well_formed = match (spec.beacon_kind, &r.beacon) {
        (BeaconKind::Prf, Beacon::Prf(_)) => true,
        (BeaconKind::Group, Beacon::Group(e)) => group.contains(e) && !e.is_identity(),
        _ => false,
    };
    if !well_formed {
        user.dropped_malformed += 1;
        return Ok(ReceptionOutcome::Malformed);
    }
    if !ignore_thresholds && !cfg.qualifies(r.distance_m, r.session_minutes) {
        return Ok(ReceptionOutcome::Filtered);
    }
    for hs in &user.household_seeds {
        if beacon_from_seed(spec, group, hs, r.slot)? == r.beacon {
            user.dropped_household += 1;
            return Ok(ReceptionOutcome::Household);
        }
    }
    let (shared, mine) = if spec.report_kind == ReportKind::Agreed {
        let x = secret_for_slot(group, user, r.slot)?;
        let mine = group.generator_exp(&x)?;
        let theirs = r.beacon.as_group().expect("checked above");
        if mine == *theirs {
            return Ok(ReceptionOutcome::Degenerate);
        }
        (Some(dh_shared(&x, theirs)?), Some(mine))
    } else {
        (None, None)
    };
    Ok(user.push_record(EncounterRecord {
        slot: r.slot,
        peer: r.beacon,
        shared,
        mine,
        minutes: r.minutes,
    }))
}
