//! Memoized per-day beacon streams.

use std::collections::HashMap;

use super::beacon::{beacon_from_seed, Beacon, UserId};
use super::spec::ProtocolSpec;
use super::time::{TimeSlot, SLOTS_PER_DAY};
use super::user::UserState;
use crate::crypto::GroupDesc;
use crate::error::Result;

/// Caches the 144 beacons of each (user, day) so that broadcasting and
/// self-matching do not recompute them.
#[derive(Clone, Debug, Default)]
pub struct BeaconCache {
    days: HashMap<(UserId, u32), Vec<Beacon>>,
    computed: u64,
}

impl BeaconCache {
    /// An empty cache.
    pub fn new() -> Self {
        BeaconCache::default()
    }

    /// All beacons `user` broadcasts on `day`.
    pub fn day(
        &mut self,
        spec: &ProtocolSpec,
        group: &GroupDesc,
        user: &UserState,
        day: u32,
    ) -> Result<&[Beacon]> {
        if !self.days.contains_key(&(user.id, day)) {
            let v = TimeSlot::of_day(day)
                .map(|t| beacon_from_seed(spec, group, user.seed(), t))
                .collect::<Result<Vec<_>>>()?;
            self.computed += u64::from(SLOTS_PER_DAY);
            self.days.insert((user.id, day), v);
        }
        Ok(&self.days[&(user.id, day)])
    }

    /// The beacon `user` broadcasts in `slot`.
    pub fn beacon(
        &mut self,
        spec: &ProtocolSpec,
        group: &GroupDesc,
        user: &UserState,
        slot: TimeSlot,
    ) -> Result<Beacon> {
        let first = TimeSlot::first_of_day(slot.day()).0;
        Ok(self.day(spec, group, user, slot.day())?[(slot.0 - first) as usize])
    }

    /// Forgets days before `oldest`.
    pub fn prune(&mut self, oldest: u32) {
        self.days.retain(|(_, d), _| *d >= oldest);
    }

    /// Number of beacons derived so far.
    pub fn computed(&self) -> u64 {
        self.computed
    }
}
