//! Rate-limit defenses: the server-side cap on what one patient can cause
//! and the phone-side cap on concurrently nearby devices.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::Serialize;

use crate::framework::{
    Beacon, MatcherKind, ProtocolSpec, RateLimitConfig, ReportItem, ReportKind, ServerState,
    UploadItem, UserId,
};

/// Result of the server-side check.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RateLimitVerdict {
    /// Whether the server can observe per-patient counts for this design.
    pub applicable: bool,
    /// Patients exceeding a cap.
    pub flagged: BTreeSet<UserId>,
}

/// Whether the server can evaluate a per-patient cap at all: it must see
/// either how many users one patient exposes (server matching) or how many
/// encounters one patient reports (Received and Agreed reports).
pub fn server_rate_limit_applicable(spec: &ProtocolSpec) -> bool {
    spec.matcher == MatcherKind::Server
        || matches!(spec.report_kind, ReportKind::Received | ReportKind::Agreed)
}

/// Evaluates the caps over everything the server currently stores.
///
/// * Received/Agreed reports: any day with more than
///   `per_report_size_cap` items flags the patient.
/// * Sent-Server: a reported beacon found in the uploads of more than
///   `per_patient_exposure_cap` users flags the patient.
/// * Sent-User and Sent-Interactive: not applicable.
pub fn server_rate_limit(
    spec: &ProtocolSpec,
    server: &ServerState,
    caps: &RateLimitConfig,
) -> RateLimitVerdict {
    let mut v = RateLimitVerdict {
        applicable: server_rate_limit_applicable(spec),
        flagged: BTreeSet::new(),
    };
    if !v.applicable {
        return v;
    }
    match spec.report_kind {
        ReportKind::Received | ReportKind::Agreed => {
            for r in &server.patient_reports {
                if r.sections
                    .iter()
                    .any(|s| s.items.len() > caps.per_report_size_cap as usize)
                {
                    v.flagged.insert(r.patient);
                }
            }
        }
        ReportKind::Sent => {
            let mut holders: HashMap<Beacon, HashSet<UserId>> = HashMap::new();
            for (u, items) in &server.uploaded_user_tokens {
                for s in items {
                    if let UploadItem::Received { beacon, .. } = s.item {
                        holders.entry(beacon).or_default().insert(*u);
                    }
                }
            }
            for r in &server.patient_reports {
                for (_, item) in r.items() {
                    if let ReportItem::Sent(b) = item {
                        if holders
                            .get(b)
                            .is_some_and(|h| h.len() > caps.per_patient_exposure_cap as usize)
                        {
                            v.flagged.insert(r.patient);
                        }
                    }
                }
            }
        }
    }
    v
}

/// Phone-side defense: a phone refuses new beacon streams in a slot once
/// it already hears `cap` distinct nearby streams, and raises an alert.
#[derive(Clone, Debug, Default)]
pub struct DeviceCap {
    cap: usize,
    streams: HashMap<(UserId, u32), HashSet<Beacon>>,
    /// Phones that raised an alert.
    pub alerts: BTreeSet<UserId>,
    /// Receptions suppressed.
    pub suppressed: u64,
}

impl DeviceCap {
    /// A cap of `cap` concurrent streams per phone and slot.
    pub fn new(cap: u32) -> Self {
        DeviceCap {
            cap: cap as usize,
            ..DeviceCap::default()
        }
    }

    /// Whether `receiver` may record `beacon` in `slot`.
    pub fn admit(&mut self, receiver: UserId, slot: u32, beacon: Beacon) -> bool {
        let seen = self.streams.entry((receiver, slot)).or_default();
        if seen.contains(&beacon) {
            return true;
        }
        if seen.len() >= self.cap {
            self.alerts.insert(receiver);
            self.suppressed += 1;
            return false;
        }
        seen.insert(beacon);
        true
    }

    /// Forgets slots before `oldest_slot`.
    pub fn prune(&mut self, oldest_slot: u32) {
        self.streams.retain(|(_, s), _| *s >= oldest_slot);
    }
}

/// Runs the phone-side cap over a sequence of `(receiver, slot, beacon)`
/// receptions and returns the indices that were suppressed.
pub fn user_rate_limit(receptions: &[(UserId, u32, Beacon)], device_cap: u32) -> Vec<usize> {
    let mut cap = DeviceCap::new(device_cap);
    receptions
        .iter()
        .enumerate()
        .filter(|(_, (u, s, b))| !cap.admit(*u, *s, *b))
        .map(|(i, _)| i)
        .collect()
}
