//! Server-side state.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::beacon::UserId;
use super::message::{Report, UploadItem};
use super::time::TimeSlot;
use crate::crypto::Digest;

/// Caps used by the rate-limit defenses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RateLimitConfig {
    /// Maximum distinct users one patient may expose within one slot.
    pub per_patient_exposure_cap: u32,
    /// Maximum encounter tokens a patient may report for one day.
    pub per_report_size_cap: u32,
    /// Maximum distinct nearby beacon streams a phone accepts in one slot.
    pub per_user_device_cap: u32,
}

impl Default for RateLimitConfig {
    fn default() -> Self {
        RateLimitConfig {
            per_patient_exposure_cap: 50,
            per_report_size_cap: 50,
            per_user_device_cap: 30,
        }
    }
}

/// Whether the server keeps query material after answering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryStorePolicy {
    /// Keep queries.
    Store,
    /// Erase queries after answering.
    Discard,
}

/// One stored upload item.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StoredUpload {
    /// Day the item was uploaded.
    pub day: u32,
    /// The item.
    pub item: UploadItem,
}

/// Owner of a registry-issued beacon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RegistryEntry {
    /// The user the beacon was issued to.
    pub user: UserId,
    /// The slot it is valid for.
    pub slot: TimeSlot,
}

/// A stored interactive query (only kept under [`QueryStorePolicy::Store`]).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StoredQuery {
    /// Querying user.
    pub user: UserId,
    /// Day of the query.
    pub day: u32,
    /// Uploaded tokens.
    pub tokens: Vec<Digest>,
}

/// Everything the server stores between rounds.
#[derive(Clone, Debug, Serialize)]
pub struct ServerState {
    /// Stored user uploads (Server-matching designs).
    pub uploaded_user_tokens: BTreeMap<UserId, Vec<StoredUpload>>,
    /// Patient reports still within retention.
    pub patient_reports: Vec<Report>,
    /// Beacon → user map (registry designs only), keyed by the hex beacon
    /// encoding.
    pub beacon_registry: BTreeMap<String, RegistryEntry>,
    /// Rate-limit caps.
    pub rate_limit_config: RateLimitConfig,
    /// Query retention policy.
    pub query_store_policy: QueryStorePolicy,
    /// Stored queries.
    pub stored_queries: Vec<StoredQuery>,
    /// Report items rejected as malformed.
    pub rejected_report_items: u64,
}

impl ServerState {
    /// An empty server.
    pub fn new(rate_limit_config: RateLimitConfig, query_store_policy: QueryStorePolicy) -> Self {
        ServerState {
            uploaded_user_tokens: BTreeMap::new(),
            patient_reports: Vec::new(),
            beacon_registry: BTreeMap::new(),
            rate_limit_config,
            query_store_policy,
            stored_queries: Vec::new(),
            rejected_report_items: 0,
        }
    }

    /// Canonical serialization used to check that queries leave no trace.
    pub fn snapshot(&self) -> String {
        serde_json::to_string(self).expect("server state serializes")
    }

    /// Drops uploads and reports older than the retention window.
    pub fn maintain(&mut self, today: u32, retention_days: u32) {
        let oldest = today.saturating_sub(retention_days.saturating_sub(1));
        for items in self.uploaded_user_tokens.values_mut() {
            items.retain(|u| u.day >= oldest);
        }
        self.patient_reports.retain(|r| r.diagnosis_day >= oldest);
        self.stored_queries.retain(|q| q.day >= oldest);
    }
}

impl ServerState {
    /// Stores an upload. With `replace` the user's previous uploads are
    /// dropped first (designs where every upload re-sends the full window).
    pub fn store_upload(&mut self, upload: &super::message::Upload, replace: bool) {
        let slot = self.uploaded_user_tokens.entry(upload.user).or_default();
        if replace {
            slot.clear();
        }
        slot.extend(upload.items.iter().map(|item| StoredUpload {
            day: upload.day,
            item: *item,
        }));
    }
}
