//! The abstract six-phase protocol: setup, beacon exchange, encounter
//! detection, optional periodic upload, patient reporting and exposure
//! discovery. Concrete designs plug into these types through
//! [`ProtocolSpec`].

pub mod beacon;
pub mod beacon_cache;
pub mod config;
pub mod exposure;
pub mod matching;
pub mod message;
pub mod phases;
pub mod server;
pub mod spec;
pub mod time;
pub mod user;

pub use beacon::{
    beacon_from_seed, daily_seed, issued_seed, prf_beacon, slot_secret, user_seed, Beacon, UserId,
};
pub use beacon_cache::BeaconCache;
pub use config::ExposureConfig;
pub use exposure::{aggregate_exposure, Exposure};
pub use matching::{
    match_round, query_tokens, receipt_exhaustive, LocalMatch, MatchContext, RateLimitOutcome,
    RoundCost, RoundOutcome, ServerResponse, ServerRoundView, UserOutput,
};
pub use message::{Report, ReportItem, ReportSection, Upload, UploadItem};
pub use phases::{patient_report, user_periodic_upload};
pub use server::{
    QueryStorePolicy, RateLimitConfig, RegistryEntry, ServerState, StoredQuery, StoredUpload,
};
pub use spec::{BeaconKind, MatcherKind, ProtocolOptions, ProtocolSpec, ReportKind};
pub use time::{
    DayRange, TimeSlot, INFECTIOUS_WINDOW_DAYS, MINUTES_PER_DAY, RETENTION_DAYS, SLOTS_PER_DAY,
    SLOT_MINUTES,
};
pub use user::{
    beacon_for_slot, record_reception, secret_for_slot, EncounterRecord, Reception,
    ReceptionOutcome, UserState,
};
