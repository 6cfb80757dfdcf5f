//! Protocol specifications: which material is reported and who matches.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocols::ProtocolId;

/// What a patient reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    /// The beacons the patient broadcast.
    Sent,
    /// The beacons the patient heard.
    Received,
    /// Values both parties of an encounter can compute.
    Agreed,
}

/// Which party decides whether an encounter is an exposure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MatcherKind {
    /// Users download patient data and match locally.
    User,
    /// Users and the server run a cryptographic protocol.
    Interactive,
    /// The server matches and returns only a risk score.
    Server,
}

/// Shape of the broadcast beacon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BeaconKind {
    /// `b = H(s, t)`.
    Prf,
    /// `g^x` with `x = H(s, t)`.
    Group,
}

/// Variant switches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct ProtocolOptions {
    /// Beacons derive from per-day seeds `s_d = H(s, d)`.
    pub daily_seed: bool,
    /// Patient data is distributed as a Cuckoo filter.
    pub cuckoo: bool,
    /// The server erases query material after answering.
    pub query_and_discard: bool,
    /// Patients report randomized receipts instead of raw received beacons.
    pub randomized_receipts: bool,
    /// The server issues beacons and keeps a beacon → user registry.
    pub beacon_registry: bool,
}

/// A (report-kind × matcher-kind) instantiation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ProtocolSpec {
    /// Which of the eleven designs this is.
    pub id: ProtocolId,
    /// What patients report.
    pub report_kind: ReportKind,
    /// Who matches.
    pub matcher: MatcherKind,
    /// Beacon shape.
    pub beacon_kind: BeaconKind,
    /// Variant switches.
    pub options: ProtocolOptions,
}

impl ProtocolSpec {
    /// Builds a spec, enforcing the option constraints.
    ///
    /// # Errors
    /// * `daily_seed` requires (Sent, User) and PRF beacons.
    /// * `cuckoo` requires `daily_seed`.
    /// * `query_and_discard` requires an interactive matcher.
    /// * `randomized_receipts` requires (Received, User) and group beacons.
    /// * `beacon_registry` requires (Received, Server).
    pub fn new(
        id: ProtocolId,
        report_kind: ReportKind,
        matcher: MatcherKind,
        beacon_kind: BeaconKind,
        options: ProtocolOptions,
    ) -> Result<Self> {
        let bad = |m: &str| Err(Error::Config(format!("{}: {m}", id.name())));
        if options.daily_seed && !(report_kind == ReportKind::Sent && matcher == MatcherKind::User)
        {
            return bad("daily seeds only apply to Sent-User designs");
        }
        if options.daily_seed && beacon_kind != BeaconKind::Prf {
            return bad("daily seeds require PRF beacons");
        }
        if options.cuckoo && !options.daily_seed {
            return bad("the Cuckoo filter variant requires daily seeds");
        }
        if options.query_and_discard && matcher != MatcherKind::Interactive {
            return bad("query-and-discard only applies to interactive matching");
        }
        if options.randomized_receipts
            && !(report_kind == ReportKind::Received
                && matcher == MatcherKind::User
                && beacon_kind == BeaconKind::Group)
        {
            return bad("randomized receipts only apply to Received-User with group beacons");
        }
        if options.beacon_registry
            && !(report_kind == ReportKind::Received && matcher == MatcherKind::Server)
        {
            return bad("a beacon registry only applies to Received-Server");
        }
        if report_kind == ReportKind::Agreed && beacon_kind != BeaconKind::Group {
            return bad("agreed tokens need group beacons");
        }
        Ok(ProtocolSpec {
            id,
            report_kind,
            matcher,
            beacon_kind,
            options,
        })
    }
}
