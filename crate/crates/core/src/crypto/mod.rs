//! Cryptographic building blocks: the PRF, the prime-order group with its
//! token constructions, and the Cuckoo filter used for compressed matching.

pub mod cuckoo;
pub mod group;
pub mod prf;

pub use cuckoo::{cuckoo_build, cuckoo_query, CuckooFilter, DEFAULT_FP_TARGET};
pub use group::{
    blind_pow, derive_scalar, dh_shared, encode_slot, group_exp, ordered_token, ordered_token_pair,
    ordered_token_with_indicator, randomized_receipt, receipt_matches, scalar_from_digest,
    unblind_pow, GroupDesc, GroupElement, GroupKind, Scalar,
};
pub use prf::{hash_with_label, prf, Digest, DIGEST_LEN};
