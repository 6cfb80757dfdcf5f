//! Keyed pseudo-random function with a fixed 32-byte output.
//!
//! The PRF is HMAC-SHA256. Every beacon, daily seed and hashed token in the
//! library is a [`Digest`] produced here, so the byte values are reproducible
//! by any independent HMAC-SHA256 implementation.

use std::fmt;

use hmac::{Hmac, Mac};
use serde::{Serialize, Serializer};
use sha2::Sha256;

use crate::error::{Error, Result};

/// Length in bytes of every PRF output.
pub const DIGEST_LEN: usize = 32;

/// A 32-byte PRF output.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest([u8; DIGEST_LEN]);

impl Digest {
    /// Wraps raw bytes.
    pub const fn from_bytes(bytes: [u8; DIGEST_LEN]) -> Self {
        Digest(bytes)
    }

    /// Builds a digest from a slice, which must be exactly 32 bytes long.
    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        let arr: [u8; DIGEST_LEN] = bytes.try_into().map_err(|_| {
            Error::Malformed(format!("digest must be 32 bytes, got {}", bytes.len()))
        })?;
        Ok(Digest(arr))
    }

    /// The raw bytes.
    pub fn as_bytes(&self) -> &[u8; DIGEST_LEN] {
        &self.0
    }

    /// Lower-case hexadecimal rendering.
    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", &self.to_hex()[..16])
    }
}

impl Serialize for Digest {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

/// HMAC-SHA256 of `message` under `key`.
///
/// # Errors
/// An empty key is rejected with [`Error::InvalidArgument`].
pub fn prf(key: &[u8], message: &[u8]) -> Result<Digest> {
    if key.is_empty() {
        return Err(Error::InvalidArgument("prf key must be non-empty".into()));
    }
    Ok(prf_nonempty(key, message))
}

/// PRF evaluation for call sites whose key is a compile-time constant or a
/// value already known to be non-empty.
pub(crate) fn prf_nonempty(key: &[u8], message: &[u8]) -> Digest {
    let mut mac = <Hmac<Sha256> as Mac>::new_from_slice(key).expect("HMAC accepts any key length");
    mac.update(message);
    Digest(mac.finalize().into_bytes().into())
}

/// Domain-separated public hash used for tokens; the key is a fixed label.
pub fn hash_with_label(label: &str, message: &[u8]) -> Digest {
    prf_nonempty(label.as_bytes(), message)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_key_is_rejected() {
        assert!(matches!(prf(b"", b"m"), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn deterministic_and_input_sensitive() {
        let a = prf(b"k", b"m").unwrap();
        assert_eq!(a, prf(b"k", b"m").unwrap());
        assert_ne!(a, prf(b"k", b"m\x00").unwrap());
        assert_ne!(a, prf(b"k2", b"m").unwrap());
    }

    #[test]
    fn matches_rfc4231_test_case_2() {
        // HMAC-SHA256 test vector: key "Jefe", data "what do ya want for nothing?".
        let d = prf(b"Jefe", b"what do ya want for nothing?").unwrap();
        assert_eq!(
            d.to_hex(),
            "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843"
        );
    }
}
