//! Deterministic simulator and protocol library for proximity-based contact
//! tracing designs.
//!
//! * [`crypto`] — PRF, prime-order groups (strong and toy), token
//!   constructions and a Cuckoo filter.
//! * [`framework`] — the abstract protocol: beacons, encounter stores,
//!   reports, uploads and match rounds.
//! * [`protocols`] — the eleven concrete designs and their interactive
//!   sub-protocols.
//! * [`simulation`] — seeded world generation, the engine and the
//!   ground-truth oracle.
//! * [`adversaries`] — attacks, rate limits and leakage oracles.
//! * [`analysis`] — cost ledger, scorecard, design-flaw flags and diffing
//!   against expected matrices.

pub mod adversaries;
pub mod analysis;
pub mod crypto;
pub mod error;
pub mod framework;
pub mod protocols;
pub mod simulation;

pub use error::{Error, Result};
