//! Patient reports and user uploads with their canonical encodings.
//!
//! Both are encoded as length-prefixed token lists: a big-endian `u32`
//! count followed by items, each a one-byte tag, a `u32` length and the
//! token bytes, then a `u32` minutes field where the item carries one.
//! Cost accounting counts *token units* (items) and bytes of this encoding.

use serde::Serialize;

use super::beacon::{Beacon, UserId};
use super::time::TimeSlot;
use crate::crypto::{Digest, GroupElement};

/// One token in a patient report.
// Items are small, `Copy` and stored in flat vectors; boxing the receipt
// variant would cost more than the padding it saves.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ReportItem {
    /// A beacon the patient broadcast.
    Sent(Beacon),
    /// A daily seed `s_d` covering all beacons of `day`.
    DailySeed {
        /// Day the seed expands to.
        day: u32,
        /// The seed.
        seed: Digest,
    },
    /// A beacon the patient heard, with the minutes of contact.
    Received {
        /// The heard beacon.
        beacon: Beacon,
        /// Minutes of contact.
        minutes: u32,
    },
    /// A randomized receipt `(g^y, b^y)` for a heard group beacon `b`.
    Receipt {
        /// `g^y`.
        u: GroupElement,
        /// `b^y`.
        v: GroupElement,
        /// Minutes of contact.
        minutes: u32,
        /// Slot the beacon was heard in. Simulator-internal: not part of
        /// the wire encoding, used only to shortcut the sender's check.
        #[serde(skip)]
        slot_hint: TimeSlot,
    },
    /// An agreed value `g^{xx'}`.
    Agreed {
        /// The shared value.
        shared: GroupElement,
        /// Minutes of contact.
        minutes: u32,
    },
}

impl ReportItem {
    fn encode_into(&self, out: &mut Vec<u8>) {
        let (tag, bytes, minutes): (u8, Vec<u8>, Option<u32>) = match self {
            ReportItem::Sent(b) => (1, b.encode(), None),
            ReportItem::DailySeed { day, seed } => {
                let mut v = day.to_be_bytes().to_vec();
                v.extend_from_slice(seed.as_bytes());
                (2, v, None)
            }
            ReportItem::Received { beacon, minutes } => (3, beacon.encode(), Some(*minutes)),
            ReportItem::Receipt { u, v, minutes, .. } => {
                let mut b = u.encode();
                b.extend(v.encode());
                (4, b, Some(*minutes))
            }
            ReportItem::Agreed { shared, minutes } => (5, shared.encode(), Some(*minutes)),
        };
        out.push(tag);
        out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
        out.extend_from_slice(&bytes);
        if let Some(m) = minutes {
            out.extend_from_slice(&m.to_be_bytes());
        }
    }

    /// Minutes carried by the item (zero for sent material).
    pub fn minutes(&self) -> u32 {
        match self {
            ReportItem::Sent(_) | ReportItem::DailySeed { .. } => 0,
            ReportItem::Received { minutes, .. }
            | ReportItem::Receipt { minutes, .. }
            | ReportItem::Agreed { minutes, .. } => *minutes,
        }
    }
}

/// The tokens a patient reports for one day of the infectious window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportSection {
    /// Day the tokens belong to.
    pub day: u32,
    /// The tokens.
    pub items: Vec<ReportItem>,
}

/// A patient's report on diagnosis day.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    /// The reporting patient.
    pub patient: UserId,
    /// Diagnosis day.
    pub diagnosis_day: u32,
    /// One section per window day.
    pub sections: Vec<ReportSection>,
}

impl Report {
    /// Number of token units.
    pub fn units(&self) -> usize {
        self.sections.iter().map(|s| s.items.len()).sum()
    }

    /// Iterates all items with their day.
    pub fn items(&self) -> impl Iterator<Item = (u32, &ReportItem)> {
        self.sections
            .iter()
            .flat_map(|s| s.items.iter().map(move |i| (s.day, i)))
    }

    /// Canonical length-prefixed encoding.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.patient.to_be_bytes());
        out.extend_from_slice(&self.diagnosis_day.to_be_bytes());
        out.extend_from_slice(&(self.sections.len() as u32).to_be_bytes());
        for s in &self.sections {
            out.extend_from_slice(&s.day.to_be_bytes());
            out.extend_from_slice(&(s.items.len() as u32).to_be_bytes());
            for i in &s.items {
                i.encode_into(&mut out);
            }
        }
        out
    }
}

/// One token in a user upload.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum UploadItem {
    /// A beacon the user heard (Sent-Server).
    Received {
        /// The heard beacon.
        beacon: Beacon,
        /// Minutes of contact.
        minutes: u32,
    },
    /// A beacon the user broadcast (registry status query).
    Sent(Beacon),
    /// `H(g^{xx'} ‖ indicator)` for one encounter fragment.
    OrderedToken {
        /// The ordered digest.
        token: Digest,
        /// Minutes of contact.
        minutes: u32,
    },
    /// A sent group beacon blinded by the user's long-term secret.
    BlindedSent(GroupElement),
}

impl UploadItem {
    fn encode_into(&self, out: &mut Vec<u8>) {
        let (tag, bytes, minutes): (u8, Vec<u8>, Option<u32>) = match self {
            UploadItem::Received { beacon, minutes } => (1, beacon.encode(), Some(*minutes)),
            UploadItem::Sent(b) => (2, b.encode(), None),
            UploadItem::OrderedToken { token, minutes } => {
                (3, token.as_bytes().to_vec(), Some(*minutes))
            }
            UploadItem::BlindedSent(e) => (4, e.encode(), None),
        };
        out.push(tag);
        out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
        out.extend_from_slice(&bytes);
        if let Some(m) = minutes {
            out.extend_from_slice(&m.to_be_bytes());
        }
    }

    /// The token bytes the server can join on.
    pub fn key(&self) -> Vec<u8> {
        match self {
            UploadItem::Received { beacon, .. } | UploadItem::Sent(beacon) => beacon.encode(),
            UploadItem::OrderedToken { token, .. } => token.as_bytes().to_vec(),
            UploadItem::BlindedSent(e) => e.encode(),
        }
    }

    /// Minutes carried by the item.
    pub fn minutes(&self) -> u32 {
        match self {
            UploadItem::Received { minutes, .. } | UploadItem::OrderedToken { minutes, .. } => {
                *minutes
            }
            UploadItem::Sent(_) | UploadItem::BlindedSent(_) => 0,
        }
    }
}

/// A user's periodic upload.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Upload {
    /// Uploading user.
    pub user: UserId,
    /// Day of the upload.
    pub day: u32,
    /// The tokens.
    pub items: Vec<UploadItem>,
}

impl Upload {
    /// Number of token units.
    pub fn units(&self) -> usize {
        self.items.len()
    }

    /// Canonical length-prefixed encoding.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.user.to_be_bytes());
        out.extend_from_slice(&self.day.to_be_bytes());
        out.extend_from_slice(&(self.items.len() as u32).to_be_bytes());
        for i in &self.items {
            i.encode_into(&mut out);
        }
        out
    }
}
