//! Time model: 10-minute beacon slots, 144 per day.

use serde::{Deserialize, Serialize};

/// Beacon rotations per day.
pub const SLOTS_PER_DAY: u32 = 144;
/// Minutes covered by one slot.
pub const SLOT_MINUTES: u32 = 10;
/// Minutes per day.
pub const MINUTES_PER_DAY: u32 = SLOTS_PER_DAY * SLOT_MINUTES;
/// Days before (and including) diagnosis whose encounters count.
pub const INFECTIOUS_WINDOW_DAYS: u32 = 14;
/// Days an encounter record is retained on the phone and at the server.
pub const RETENTION_DAYS: u32 = 14;

/// A beacon slot index counted from the start of the simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TimeSlot(pub u32);

impl TimeSlot {
    /// The slot containing an absolute minute.
    pub fn containing_minute(minute: u32) -> Self {
        TimeSlot(minute / SLOT_MINUTES)
    }

    /// First slot of a day.
    pub fn first_of_day(day: u32) -> Self {
        TimeSlot(day * SLOTS_PER_DAY)
    }

    /// The day this slot falls in.
    pub fn day(self) -> u32 {
        self.0 / SLOTS_PER_DAY
    }

    /// First absolute minute of the slot.
    pub fn start_minute(self) -> u32 {
        self.0 * SLOT_MINUTES
    }

    /// All slots of a day.
    pub fn of_day(day: u32) -> impl Iterator<Item = TimeSlot> {
        (day * SLOTS_PER_DAY..(day + 1) * SLOTS_PER_DAY).map(TimeSlot)
    }
}

/// An inclusive range of days.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayRange {
    /// First day in the range.
    pub first: u32,
    /// Last day in the range (inclusive).
    pub last: u32,
}

impl DayRange {
    /// The infectious window for a diagnosis on `day`: the window's last day
    /// is the diagnosis day and it spans [`INFECTIOUS_WINDOW_DAYS`] days,
    /// truncated at day 0.
    pub fn infectious_window(day: u32) -> Self {
        DayRange {
            first: day.saturating_sub(INFECTIOUS_WINDOW_DAYS - 1),
            last: day,
        }
    }

    /// Whether `day` lies in the range.
    pub fn contains(&self, day: u32) -> bool {
        (self.first..=self.last).contains(&day)
    }

    /// Number of days covered.
    pub fn len(&self) -> u32 {
        self.last + 1 - self.first
    }

    /// Whether the range is empty (never true for a constructed range).
    pub fn is_empty(&self) -> bool {
        self.last < self.first
    }

    /// Iterates the days.
    pub fn days(&self) -> impl Iterator<Item = u32> {
        self.first..=self.last
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_arithmetic() {
        assert_eq!(TimeSlot(143).day(), 0);
        assert_eq!(TimeSlot(144).day(), 1);
        assert_eq!(TimeSlot::containing_minute(25), TimeSlot(2));
        assert_eq!(TimeSlot::of_day(2).count(), 144);
    }

    #[test]
    fn window_spans_fourteen_days() {
        let w = DayRange::infectious_window(20);
        assert_eq!((w.first, w.last, w.len()), (7, 20, 14));
        assert!(!w.contains(6));
        assert_eq!(DayRange::infectious_window(3).first, 0);
    }
}
