//! Adversary and attack descriptors.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::UserId;

/// The seven adversaries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdversaryKind {
    /// A user who only sees what the app shows.
    BasicUser,
    /// A user who can run modified software and inspect all app data.
    AdvancedUser,
    /// A user with passive sniffers.
    UserPsv,
    /// A user with sniffers that also broadcast.
    UserAsv,
    /// The server on its own.
    ServerAlone,
    /// The server with passive sniffers.
    ServerPsv,
    /// The server with sniffers that also broadcast.
    ServerAsv,
}

impl AdversaryKind {
    /// All kinds.
    pub const ALL: [AdversaryKind; 7] = [
        AdversaryKind::BasicUser,
        AdversaryKind::AdvancedUser,
        AdversaryKind::UserPsv,
        AdversaryKind::UserAsv,
        AdversaryKind::ServerAlone,
        AdversaryKind::ServerPsv,
        AdversaryKind::ServerAsv,
    ];

    /// Whether the adversary operates sniffers.
    pub fn has_surveillance(self) -> bool {
        matches!(
            self,
            AdversaryKind::UserPsv
                | AdversaryKind::UserAsv
                | AdversaryKind::ServerPsv
                | AdversaryKind::ServerAsv
        )
    }

    /// Whether the sniffers also broadcast.
    pub fn is_active(self) -> bool {
        matches!(self, AdversaryKind::UserAsv | AdversaryKind::ServerAsv)
    }

    /// Whether the adversary sees server-side data.
    pub fn is_server(self) -> bool {
        matches!(
            self,
            AdversaryKind::ServerAlone | AdversaryKind::ServerPsv | AdversaryKind::ServerAsv
        )
    }
}

/// The resiliency attacks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackId {
    /// Record far-away beacons ignoring distance and duration, then report.
    DriveByEavesdrop,
    /// Broadcast with high power to reach a wide area, then report.
    HighPowerBroadcast,
    /// Both of the above with one device.
    HighPowerDevice,
    /// Colluders broadcast one beacon stream and pool what they hear.
    SameBeacon,
    /// Colluders share everything; each device broadcasts every stream.
    Pooling,
    /// Relays beacons both ways between distant regions.
    Tunneling,
    /// Relays beacons one way from one region to another.
    Forwarding,
    /// A patient reports a flood of junk tokens.
    ResourceExhaustion,
}

impl AttackId {
    /// The seven attacks scored against false exposures, in column order.
    pub const SCORED: [AttackId; 7] = [
        AttackId::DriveByEavesdrop,
        AttackId::HighPowerBroadcast,
        AttackId::HighPowerDevice,
        AttackId::SameBeacon,
        AttackId::Pooling,
        AttackId::Forwarding,
        AttackId::Tunneling,
    ];

    /// Stable name.
    pub fn name(self) -> &'static str {
        match self {
            AttackId::DriveByEavesdrop => "drive-by-eavesdrop",
            AttackId::HighPowerBroadcast => "high-power-broadcast",
            AttackId::HighPowerDevice => "high-power-device",
            AttackId::SameBeacon => "same-beacon",
            AttackId::Pooling => "pooling",
            AttackId::Tunneling => "tunneling",
            AttackId::Forwarding => "forwarding",
            AttackId::ResourceExhaustion => "resource-exhaustion",
        }
    }

    /// Parses a stable name.
    pub fn parse(s: &str) -> Result<Self> {
        [
            AttackId::DriveByEavesdrop,
            AttackId::HighPowerBroadcast,
            AttackId::HighPowerDevice,
            AttackId::SameBeacon,
            AttackId::Pooling,
            AttackId::Tunneling,
            AttackId::Forwarding,
            AttackId::ResourceExhaustion,
        ]
        .into_iter()
        .find(|a| a.name() == s)
        .ok_or_else(|| Error::Parse(format!("unknown attack `{s}`")))
    }

    /// Whether the attack needs a group of colluding participants.
    pub fn needs_colluders(self) -> bool {
        matches!(self, AttackId::SameBeacon | AttackId::Pooling)
    }
}

impl fmt::Display for AttackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One adversary in a scenario.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryConfig {
    /// Capability class.
    pub kind: AdversaryKind,
    /// Cells with sniffers (surveillance kinds only).
    #[serde(default)]
    pub sniffer_cells: BTreeSet<u32>,
    /// Colluding participants.
    #[serde(default)]
    pub colluders: BTreeSet<UserId>,
    /// Attack carried out, if any.
    #[serde(default)]
    pub attack: Option<AttackId>,
}

impl AdversaryConfig {
    /// A privacy adversary without an attack.
    pub fn observer(kind: AdversaryKind, sniffer_cells: impl IntoIterator<Item = u32>) -> Self {
        AdversaryConfig {
            kind,
            sniffer_cells: sniffer_cells.into_iter().collect(),
            colluders: BTreeSet::new(),
            attack: None,
        }
    }

    /// Checks the structural constraints.
    ///
    /// # Errors
    /// * sniffer cells must be present exactly for surveillance kinds;
    /// * attacks are carried out by participants (user kinds);
    /// * collusion attacks need at least two colluders.
    pub fn validate(&self) -> Result<()> {
        if self.kind.has_surveillance() == self.sniffer_cells.is_empty() {
            return Err(Error::Config(format!(
                "{:?}: sniffer cells must be given exactly for surveillance adversaries",
                self.kind
            )));
        }
        if let Some(a) = self.attack {
            if self.kind.is_server() {
                return Err(Error::Config(format!(
                    "attack {a} must be carried out by a user adversary"
                )));
            }
            if a.needs_colluders() && self.colluders.len() < 2 {
                return Err(Error::Config(format!(
                    "attack {a} needs at least two colluders"
                )));
            }
        }
        Ok(())
    }
}
