//! Cuckoo filter over [`Digest`] items.
//!
//! Buckets hold four fingerprints; the alternate bucket of a fingerprint is
//! `i ⊕ hash(fp)` (partial-key cuckoo hashing) and insertion gives up after
//! 500 evictions. The fingerprint width is derived from the requested
//! false-positive target as `⌈log2(2·b / ε)⌉` with `b = 4`, so a target of
//! 2^-13 yields the customary 16-bit fingerprints.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::prf::{hash_with_label, Digest};
use crate::error::{Error, Result};

/// Fingerprint slots per bucket.
pub const BUCKET_SIZE: usize = 4;
/// Maximum number of evictions before an insertion fails.
pub const MAX_KICKS: usize = 500;
/// Maximum fraction of slots filled at build time.
pub const MAX_LOAD: f64 = 0.95;
/// False-positive target that produces 16-bit fingerprints.
pub const DEFAULT_FP_TARGET: f64 = 1.0 / 8192.0;

/// Approximate-membership filter with no false negatives.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CuckooFilter {
    buckets: Vec<[u32; BUCKET_SIZE]>,
    fingerprint_bits: u32,
    capacity: usize,
    len: usize,
}

fn fingerprint_bits_for(fp_target: f64) -> Result<u32> {
    if !(fp_target > 0.0 && fp_target < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fp_target {fp_target} must lie in (0, 1)"
        )));
    }
    let bits = (2.0 * BUCKET_SIZE as f64 / fp_target).log2().ceil() as u32;
    Ok(bits.clamp(4, 32))
}

impl CuckooFilter {
    /// An empty filter able to hold `capacity` items at ≤ 95% load.
    pub fn with_capacity(capacity: usize, fp_target: f64) -> Result<Self> {
        let fingerprint_bits = fingerprint_bits_for(fp_target)?;
        let min_slots = ((capacity.max(1) as f64) / MAX_LOAD).ceil() as usize;
        let nbuckets = min_slots.div_ceil(BUCKET_SIZE).next_power_of_two().max(1);
        Ok(CuckooFilter {
            buckets: vec![[0; BUCKET_SIZE]; nbuckets],
            fingerprint_bits,
            capacity: ((nbuckets * BUCKET_SIZE) as f64 * MAX_LOAD).floor() as usize,
            len: 0,
        })
    }

    /// Number of stored fingerprints.
    pub fn len(&self) -> usize {
        self.len
    }

    /// Whether no item has been inserted.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Maximum number of items the filter accepts.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Fingerprint width in bits.
    pub fn fingerprint_bits(&self) -> u32 {
        self.fingerprint_bits
    }

    /// Size of the packed wire representation in bytes (8-byte header plus
    /// `fingerprint_bits` per slot).
    pub fn serialized_size(&self) -> usize {
        8 + (self.buckets.len() * BUCKET_SIZE * self.fingerprint_bits as usize).div_ceil(8)
    }

    fn mask(&self) -> usize {
        self.buckets.len() - 1
    }

    fn locate(&self, item: &Digest) -> (u32, usize) {
        let b = item.as_bytes();
        let h = u64::from_be_bytes(b[0..8].try_into().expect("8 bytes"));
        let raw = u32::from_be_bytes(b[8..12].try_into().expect("4 bytes"));
        let fp_mask = if self.fingerprint_bits == 32 {
            u32::MAX
        } else {
            (1u32 << self.fingerprint_bits) - 1
        };
        // Zero marks an empty slot, so fingerprints live in [1, 2^f - 1].
        let fp = (raw & fp_mask).max(1);
        (fp, (h as usize) & self.mask())
    }

    fn alt_index(&self, index: usize, fp: u32) -> usize {
        let h = hash_with_label("pct/cuckoo-alt", &fp.to_be_bytes());
        let hv = u64::from_be_bytes(h.as_bytes()[0..8].try_into().expect("8 bytes")) as usize;
        (index ^ hv) & self.mask()
    }

    fn try_place(&mut self, index: usize, fp: u32) -> bool {
        if let Some(slot) = self.buckets[index].iter_mut().find(|s| **s == 0) {
            *slot = fp;
            true
        } else {
            false
        }
    }

    /// Inserts one item.
    ///
    /// # Errors
    /// [`Error::CapacityExceeded`] when the load bound is reached or no free
    /// slot is found within [`MAX_KICKS`] evictions. The filter may then
    /// have lost one fingerprint and should be discarded.
    pub fn insert<R: Rng>(&mut self, item: &Digest, rng: &mut R) -> Result<()> {
        if self.len >= self.capacity {
            return Err(Error::CapacityExceeded(format!(
                "filter holds {} items",
                self.len
            )));
        }
        let (mut fp, i1) = self.locate(item);
        let i2 = self.alt_index(i1, fp);
        if self.try_place(i1, fp) || self.try_place(i2, fp) {
            self.len += 1;
            return Ok(());
        }
        let mut index = if rng.gen_bool(0.5) { i1 } else { i2 };
        for _ in 0..MAX_KICKS {
            let victim = rng.gen_range(0..BUCKET_SIZE);
            std::mem::swap(&mut fp, &mut self.buckets[index][victim]);
            index = self.alt_index(index, fp);
            if self.try_place(index, fp) {
                self.len += 1;
                return Ok(());
            }
        }
        Err(Error::CapacityExceeded(format!(
            "no slot after {MAX_KICKS} evictions"
        )))
    }

    /// Approximate membership test: never false for an inserted item.
    pub fn contains(&self, item: &Digest) -> bool {
        let (fp, i1) = self.locate(item);
        let i2 = self.alt_index(i1, fp);
        self.buckets[i1].contains(&fp) || self.buckets[i2].contains(&fp)
    }
}

/// Builds a filter holding every item.
///
/// Evictions draw from a fixed-seed generator, so the resulting filter is a
/// deterministic function of the item sequence.
pub fn cuckoo_build<'a, I>(items: I, fp_target: f64) -> Result<CuckooFilter>
where
    I: IntoIterator<Item = &'a Digest>,
    I::IntoIter: ExactSizeIterator,
{
    let iter = items.into_iter();
    let mut filter = CuckooFilter::with_capacity(iter.len(), fp_target)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x0c0c_4f11);
    for item in iter {
        filter.insert(item, &mut rng)?;
    }
    Ok(filter)
}

/// Membership query.
pub fn cuckoo_query(filter: &CuckooFilter, item: &Digest) -> bool {
    filter.contains(item)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::prf::prf;

    fn items(n: u32, tag: &[u8]) -> Vec<Digest> {
        (0..n)
            .map(|i| prf(tag, &i.to_be_bytes()).unwrap())
            .collect()
    }

    #[test]
    fn empty_filter_rejects_everything() {
        let f = cuckoo_build(&Vec::new(), DEFAULT_FP_TARGET).unwrap();
        assert!(f.is_empty());
        assert!(items(1000, b"probe").iter().all(|d| !f.contains(d)));
    }

    #[test]
    fn default_target_gives_16_bit_fingerprints() {
        let f = CuckooFilter::with_capacity(10, DEFAULT_FP_TARGET).unwrap();
        assert_eq!(f.fingerprint_bits(), 16);
    }

    #[test]
    fn no_false_negatives_and_compact() {
        let set = items(4000, b"member");
        let f = cuckoo_build(&set, DEFAULT_FP_TARGET).unwrap();
        assert!(set.iter().all(|d| f.contains(d)));
        assert!(f.serialized_size() < set.len() * 32);
    }

    #[test]
    fn overload_fails_cleanly() {
        let mut f = CuckooFilter::with_capacity(8, DEFAULT_FP_TARGET).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut failed = false;
        for d in items(100, b"over") {
            if f.insert(&d, &mut rng).is_err() {
                failed = true;
                break;
            }
        }
        assert!(failed);
    }

    #[test]
    fn invalid_target_is_rejected() {
        assert!(CuckooFilter::with_capacity(10, 0.0).is_err());
        assert!(CuckooFilter::with_capacity(10, 1.5).is_err());
    }
}
