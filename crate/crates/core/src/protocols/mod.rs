//! The eleven concrete designs and their interactive sub-protocols.

pub mod desire;
pub mod psi_ca;
pub mod ri_psi;
pub mod sdh;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::framework::{BeaconKind, MatcherKind, ProtocolOptions, ProtocolSpec, ReportKind};

/// The eleven designs, one per row of the design-space summary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolId {
    /// Patients report every beacon they sent; users match locally.
    SentUserBasic,
    /// As above with per-day seeds (DP-3T / GAEN style).
    SentUserDaily,
    /// Sent beacons matched by private set-intersection cardinality (Epione).
    SentInteractive,
    /// Users upload heard beacons; the server matches.
    SentServer,
    /// Patients report heard beacons; users match locally.
    ReceivedUserBasic,
    /// Patients report randomized receipts (CleverParrot, simplified).
    ReceivedUserCleverParrot,
    /// Blinded matching of received beacons (RI-PSI).
    ReceivedInteractive,
    /// Server-issued beacons and server matching (ROBERT).
    ReceivedServer,
    /// Agreed Diffie-Hellman values matched by users (Pronto-C2).
    AgreedUser,
    /// Agreed values matched on query, queries discarded (DESIRE).
    AgreedInteractive,
    /// Agreed values matched against stored ordered tokens (S-DH).
    AgreedServer,
}

impl ProtocolId {
    /// All designs in table order.
    pub const ALL: [ProtocolId; 11] = [
        ProtocolId::SentUserBasic,
        ProtocolId::SentUserDaily,
        ProtocolId::SentInteractive,
        ProtocolId::SentServer,
        ProtocolId::ReceivedUserBasic,
        ProtocolId::ReceivedUserCleverParrot,
        ProtocolId::ReceivedInteractive,
        ProtocolId::ReceivedServer,
        ProtocolId::AgreedUser,
        ProtocolId::AgreedInteractive,
        ProtocolId::AgreedServer,
    ];

    /// Stable name used in scenario files and report rows.
    pub fn name(self) -> &'static str {
        match self {
            ProtocolId::SentUserBasic => "sent-user-basic",
            ProtocolId::SentUserDaily => "sent-user-daily",
            ProtocolId::SentInteractive => "sent-interactive-epione",
            ProtocolId::SentServer => "sent-server",
            ProtocolId::ReceivedUserBasic => "received-user-basic",
            ProtocolId::ReceivedUserCleverParrot => "received-user-cleverparrot",
            ProtocolId::ReceivedInteractive => "received-interactive-ripsi",
            ProtocolId::ReceivedServer => "received-server-robert",
            ProtocolId::AgreedUser => "agreed-user-pronto",
            ProtocolId::AgreedInteractive => "agreed-interactive-desire",
            ProtocolId::AgreedServer => "agreed-server-sdh",
        }
    }

    /// Human-readable row label.
    pub fn label(self) -> &'static str {
        match self {
            ProtocolId::SentUserBasic => "Sent-User Basic",
            ProtocolId::SentUserDaily => "Sent-User Daily Seed",
            ProtocolId::SentInteractive => "Sent-Interactive (Epione)",
            ProtocolId::SentServer => "Sent-Server",
            ProtocolId::ReceivedUserBasic => "Received-User Basic",
            ProtocolId::ReceivedUserCleverParrot => "Received-User (CleverParrot)",
            ProtocolId::ReceivedInteractive => "Received-Interactive (RI-PSI)",
            ProtocolId::ReceivedServer => "Received-Server (ROBERT)",
            ProtocolId::AgreedUser => "Agreed-User (Pronto-C2)",
            ProtocolId::AgreedInteractive => "Agreed-Interactive (DESIRE)",
            ProtocolId::AgreedServer => "Agreed-Server (S-DH)",
        }
    }

    /// Parses a stable name.
    ///
    /// # Errors
    /// Unknown names yield [`Error::Parse`].
    pub fn parse(name: &str) -> Result<Self> {
        ProtocolId::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::Parse(format!("unknown protocol name `{name}`")))
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ProtocolId::parse(s)
    }
}

impl Serialize for ProtocolId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ProtocolId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        ProtocolId::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// The spec of one design.
pub fn instantiate(id: ProtocolId) -> ProtocolSpec {
    use BeaconKind::{Group, Prf};
    use MatcherKind::{Interactive, Server, User};
    use ReportKind::{Agreed, Received, Sent};
    let none = ProtocolOptions::default();
    let (report, matcher, beacon, options) = match id {
        ProtocolId::SentUserBasic => (Sent, User, Prf, none),
        ProtocolId::SentUserDaily => (
            Sent,
            User,
            Prf,
            ProtocolOptions {
                daily_seed: true,
                ..none
            },
        ),
        ProtocolId::SentInteractive => (Sent, Interactive, Prf, none),
        ProtocolId::SentServer => (Sent, Server, Prf, none),
        ProtocolId::ReceivedUserBasic => (Received, User, Prf, none),
        ProtocolId::ReceivedUserCleverParrot => (
            Received,
            User,
            Group,
            ProtocolOptions {
                randomized_receipts: true,
                ..none
            },
        ),
        ProtocolId::ReceivedInteractive => (Received, Interactive, Group, none),
        ProtocolId::ReceivedServer => (
            Received,
            Server,
            Prf,
            ProtocolOptions {
                beacon_registry: true,
                ..none
            },
        ),
        ProtocolId::AgreedUser => (Agreed, User, Group, none),
        ProtocolId::AgreedInteractive => (
            Agreed,
            Interactive,
            Group,
            ProtocolOptions {
                query_and_discard: true,
                ..none
            },
        ),
        ProtocolId::AgreedServer => (Agreed, Server, Group, none),
    };
    ProtocolSpec::new(id, report, matcher, beacon, options)
        .expect("built-in specs satisfy the option constraints")
}

/// The Sent-User daily-seed variant that distributes patient beacons as a
/// Cuckoo filter.
pub fn instantiate_cuckoo_variant() -> ProtocolSpec {
    ProtocolSpec::new(
        ProtocolId::SentUserDaily,
        ReportKind::Sent,
        MatcherKind::User,
        BeaconKind::Prf,
        ProtocolOptions {
            daily_seed: true,
            cuckoo: true,
            ..ProtocolOptions::default()
        },
    )
    .expect("valid options")
}
