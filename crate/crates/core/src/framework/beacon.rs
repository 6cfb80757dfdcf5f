//! Beacons and the per-slot secrets they derive from.

use std::fmt;

use serde::Serialize;

use super::spec::{BeaconKind, ProtocolSpec};
use super::time::TimeSlot;
use crate::crypto::{derive_scalar, hash_with_label, prf, Digest, GroupDesc, GroupElement, Scalar};
use crate::error::{Error, Result};

/// Identifier of a simulated participant.
pub type UserId = u32;

/// A broadcast beacon: a PRF digest or a group element.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Beacon {
    /// `H(s, t)`.
    Prf(Digest),
    /// `g^x`.
    Group(GroupElement),
}

impl Beacon {
    /// Canonical wire encoding.
    pub fn encode(&self) -> Vec<u8> {
        match self {
            Beacon::Prf(d) => d.as_bytes().to_vec(),
            Beacon::Group(e) => e.encode(),
        }
    }

    /// The group element, if any.
    pub fn as_group(&self) -> Option<&GroupElement> {
        match self {
            Beacon::Group(e) => Some(e),
            Beacon::Prf(_) => None,
        }
    }

    /// The digest, if any.
    pub fn as_digest(&self) -> Option<&Digest> {
        match self {
            Beacon::Prf(d) => Some(d),
            Beacon::Group(_) => None,
        }
    }
}

impl fmt::Debug for Beacon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beacon::Prf(d) => write!(f, "{d:?}"),
            Beacon::Group(e) => write!(f, "{e:?}"),
        }
    }
}

/// `s_d = H(s, d)`.
pub fn daily_seed(seed: &[u8], day: u32) -> Result<Digest> {
    let mut msg = b"day".to_vec();
    msg.extend_from_slice(&day.to_be_bytes());
    prf(seed, &msg)
}

/// The PRF beacon `H(key, t)` for a slot.
pub fn prf_beacon(key: &[u8], slot: TimeSlot) -> Result<Digest> {
    prf(key, &crate::crypto::encode_slot(slot.0))
}

/// The secret exponent `x = H(s, t)` behind a group beacon.
pub fn slot_secret(group: &GroupDesc, seed: &[u8], slot: TimeSlot) -> Result<Scalar> {
    derive_scalar(seed, slot.0, group)
}

/// The beacon a holder of `seed` broadcasts in `slot` under `spec`.
pub fn beacon_from_seed(
    spec: &ProtocolSpec,
    group: &GroupDesc,
    seed: &[u8],
    slot: TimeSlot,
) -> Result<Beacon> {
    match spec.beacon_kind {
        BeaconKind::Prf if spec.options.daily_seed => {
            let sd = daily_seed(seed, slot.day())?;
            Ok(Beacon::Prf(prf_beacon(sd.as_bytes(), slot)?))
        }
        BeaconKind::Prf => Ok(Beacon::Prf(prf_beacon(seed, slot)?)),
        BeaconKind::Group => {
            let x = slot_secret(group, seed, slot)?;
            Ok(Beacon::Group(group.generator_exp(&x)?))
        }
    }
}

/// The seed a registry server issues to `user` (beacons are then
/// `H(issued_seed, t)`, so the server knows every beacon in advance).
pub fn issued_seed(server_key: &[u8], user: UserId) -> Result<Vec<u8>> {
    if server_key.is_empty() {
        return Err(Error::InvalidArgument(
            "server key must be non-empty".into(),
        ));
    }
    let mut msg = b"issue".to_vec();
    msg.extend_from_slice(&user.to_be_bytes());
    Ok(prf(server_key, &msg)?.as_bytes().to_vec())
}

/// Deterministic per-user seed derived from a master seed.
pub fn user_seed(master: u64, user: UserId) -> Vec<u8> {
    let mut msg = master.to_be_bytes().to_vec();
    msg.extend_from_slice(&user.to_be_bytes());
    hash_with_label("pct/user-seed", &msg).as_bytes().to_vec()
}
