//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by the protocol library and the simulator.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Both parties of an encounter presented the same beacon.
    #[error("degenerate encounter: both parties hold the same beacon")]
    DegenerateEncounter,

    /// A beacon equal to the group identity was received and dropped.
    #[error("identity element rejected")]
    IdentityElement,

    /// A wire value could not be decoded into the expected type.
    #[error("malformed encoding: {0}")]
    Malformed(String),

    /// The Cuckoo filter could not place an item within the eviction bound.
    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),

    /// A scenario or configuration value is out of range or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// An interactive protocol round was aborted; server state is unchanged.
    #[error("protocol round aborted: {0}")]
    Aborted(String),

    /// An input file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Reading or writing a file failed.
    #[error("i/o error: {0}")]
    Io(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
