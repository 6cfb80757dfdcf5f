//! Prime-order group abstraction with a strong and a toy instantiation.
//!
//! * The **strong** group is ristretto255 (prime order ℓ ≈ 2^252), backed by
//!   `curve25519-dalek`.
//! * The **toy** group is the order-`q` subgroup of `Z_p^*` for a safe prime
//!   `p = 2q + 1` with `q < 2^20`, small enough that every discrete logarithm
//!   can be recovered by exhaustive search. The default toy group uses
//!   `q = 1048571`; [`GroupDesc::toy_custom`] admits others such as the
//!   textbook `p = 23, q = 11, g = 2`.
//!
//! Element encoding is fixed-width big-endian for the toy group (width of
//! `p`) and the 32-byte compressed ristretto encoding for the strong group.
//! Elements are totally ordered by lexicographic comparison of encodings.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use curve25519_dalek::constants::{RISTRETTO_BASEPOINT_POINT, RISTRETTO_BASEPOINT_TABLE};
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar as DalekScalar;
use curve25519_dalek::traits::Identity;
use num_bigint::BigUint;
use rand::RngCore;
use serde::{Deserialize, Serialize, Serializer};

use super::prf::{hash_with_label, Digest};
use crate::error::{Error, Result};

/// Which instantiation a [`GroupDesc`] describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    /// ristretto255, order ≥ 2^250.
    Strong,
    /// Safe-prime subgroup with order below 2^20.
    Toy,
}

/// Exclusive upper bound on the order of a toy group.
pub const TOY_ORDER_BOUND: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct ToyParams {
    p: u64,
    q: u64,
    g: u64,
    width: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum DescRepr {
    Toy(ToyParams),
    Strong,
}

/// Description of a prime-order group: its order, generator and kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupDesc(DescRepr);

#[derive(Clone, Copy)]
enum ElemRepr {
    Toy {
        p: u64,
        v: u64,
        width: usize,
    },
    Strong {
        point: RistrettoPoint,
        enc: [u8; 32],
    },
}

/// An element of the subgroup generated by the group's generator.
#[derive(Clone, Copy)]
pub struct GroupElement(ElemRepr);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ScalarRepr {
    Toy { q: u64, v: u64 },
    Strong(DalekScalar),
}

/// An exponent in `[1, q-1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Scalar(ScalarRepr);

fn strong_order() -> BigUint {
    // ℓ = 2^252 + 27742317777372353535851937790883648493
    (BigUint::from(1u8) << 252usize)
        + "27742317777372353535851937790883648493"
            .parse::<BigUint>()
            .expect("constant parses")
}

pub(crate) fn toy_pow(base: u64, mut e: u64, p: u64) -> u64 {
    let mut result: u64 = 1 % p;
    let mut b = base % p;
    while e > 0 {
        if e & 1 == 1 {
            result = ((result as u128 * b as u128) % p as u128) as u64;
        }
        b = ((b as u128 * b as u128) % p as u128) as u64;
        e >>= 1;
    }
    result
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut i = 2u64;
    while i * i <= n {
        if n.is_multiple_of(i) {
            return false;
        }
        i += 1;
    }
    true
}

fn width_for(p: u64) -> usize {
    let bits = 64 - (p - 1).leading_zeros() as usize;
    bits.div_ceil(8).max(1)
}

fn biguint_to_dalek(n: &BigUint) -> Option<DalekScalar> {
    let mut le = n.to_bytes_le();
    if le.len() > 32 {
        return None;
    }
    le.resize(32, 0);
    let arr: [u8; 32] = le.try_into().ok()?;
    Option::from(DalekScalar::from_canonical_bytes(arr))
}

impl GroupDesc {
    /// The strong ristretto255 group.
    pub fn strong() -> Self {
        GroupDesc(DescRepr::Strong)
    }

    /// The default toy group: `p = 2097143`, `q = 1048571`, `g = 4`.
    pub fn toy() -> Self {
        GroupDesc::toy_custom(2_097_143, 1_048_571, 4).expect("default toy parameters are valid")
    }

    /// The group for a [`GroupKind`], using the default toy parameters.
    pub fn of_kind(kind: GroupKind) -> Self {
        match kind {
            GroupKind::Strong => GroupDesc::strong(),
            GroupKind::Toy => GroupDesc::toy(),
        }
    }

    /// A toy group with explicit parameters.
    ///
    /// # Errors
    /// Rejects parameters unless `q` is a prime below 2^20, `p` is a prime
    /// with `q | p - 1`, and `g ≠ 1` has order exactly `q` modulo `p`.
    pub fn toy_custom(p: u64, q: u64, g: u64) -> Result<Self> {
        if q >= TOY_ORDER_BOUND || !is_prime_u64(q) {
            return Err(Error::InvalidArgument(format!(
                "toy order {q} must be a prime below 2^20"
            )));
        }
        if !is_prime_u64(p) || !(p - 1).is_multiple_of(q) {
            return Err(Error::InvalidArgument(format!(
                "modulus {p} must be a prime with {q} | p-1"
            )));
        }
        if g <= 1 || g >= p || toy_pow(g, q, p) != 1 {
            return Err(Error::InvalidArgument(format!(
                "generator {g} must have order {q}"
            )));
        }
        Ok(GroupDesc(DescRepr::Toy(ToyParams {
            p,
            q,
            g,
            width: width_for(p),
        })))
    }

    /// The instantiation kind.
    pub fn kind(&self) -> GroupKind {
        match self.0 {
            DescRepr::Toy(_) => GroupKind::Toy,
            DescRepr::Strong => GroupKind::Strong,
        }
    }

    /// The prime group order `q`.
    pub fn order(&self) -> BigUint {
        match self.0 {
            DescRepr::Toy(t) => BigUint::from(t.q),
            DescRepr::Strong => strong_order(),
        }
    }

    /// `(p, q, g)` for a toy group.
    pub fn toy_params(&self) -> Option<(u64, u64, u64)> {
        match self.0 {
            DescRepr::Toy(t) => Some((t.p, t.q, t.g)),
            DescRepr::Strong => None,
        }
    }

    /// Byte length of an encoded element.
    pub fn element_len(&self) -> usize {
        match self.0 {
            DescRepr::Toy(t) => t.width,
            DescRepr::Strong => 32,
        }
    }

    /// The generator `g`.
    pub fn generator(&self) -> GroupElement {
        match self.0 {
            DescRepr::Toy(t) => GroupElement::toy(t, t.g),
            DescRepr::Strong => GroupElement::strong(RISTRETTO_BASEPOINT_POINT),
        }
    }

    /// `g^e` using a precomputed table for the strong group.
    ///
    /// # Errors
    /// Fails if `e` belongs to a different group.
    pub fn generator_exp(&self, e: &Scalar) -> Result<GroupElement> {
        match (self.0, e.0) {
            (DescRepr::Strong, ScalarRepr::Strong(s)) => {
                Ok(GroupElement::strong(RISTRETTO_BASEPOINT_TABLE * &s))
            }
            _ => group_exp(&self.generator(), e),
        }
    }

    /// The identity element.
    pub fn identity(&self) -> GroupElement {
        match self.0 {
            DescRepr::Toy(t) => GroupElement::toy(t, 1),
            DescRepr::Strong => GroupElement::strong(RistrettoPoint::identity()),
        }
    }

    /// Whether `e` belongs to this group's order-`q` subgroup.
    pub fn contains(&self, e: &GroupElement) -> bool {
        match (self.0, e.0) {
            (DescRepr::Toy(t), ElemRepr::Toy { p, v, .. }) => {
                p == t.p && v != 0 && v < p && toy_pow(v, t.q, p) == 1
            }
            (DescRepr::Strong, ElemRepr::Strong { .. }) => true,
            _ => false,
        }
    }

    /// The toy element with integer representative `v`, checked for membership.
    pub fn toy_element(&self, v: u64) -> Result<GroupElement> {
        match self.0 {
            DescRepr::Toy(t) => {
                let e = GroupElement::toy(t, v);
                if self.contains(&e) {
                    Ok(e)
                } else {
                    Err(Error::InvalidArgument(format!(
                        "{v} is not in the order-{} subgroup",
                        t.q
                    )))
                }
            }
            DescRepr::Strong => Err(Error::InvalidArgument("not a toy group".into())),
        }
    }

    /// Decodes and validates an element from its canonical encoding.
    pub fn decode_element(&self, bytes: &[u8]) -> Result<GroupElement> {
        match self.0 {
            DescRepr::Toy(t) => {
                if bytes.len() != t.width {
                    return Err(Error::Malformed(format!(
                        "toy element must be {} bytes",
                        t.width
                    )));
                }
                let v = bytes.iter().fold(0u64, |acc, b| (acc << 8) | u64::from(*b));
                self.toy_element(v)
                    .map_err(|e| Error::Malformed(e.to_string()))
            }
            DescRepr::Strong => {
                let c = CompressedRistretto::from_slice(bytes)
                    .map_err(|_| Error::Malformed("ristretto element must be 32 bytes".into()))?;
                let point = c
                    .decompress()
                    .ok_or_else(|| Error::Malformed("not a canonical ristretto encoding".into()))?;
                Ok(GroupElement::strong(point))
            }
        }
    }

    /// The scalar with integer value `v`.
    ///
    /// # Errors
    /// `v` must lie in `[1, q-1]`; zero in particular is rejected.
    pub fn scalar(&self, v: u64) -> Result<Scalar> {
        self.scalar_from_biguint(&BigUint::from(v))
    }

    /// The scalar with integer value `n ∈ [1, q-1]`.
    pub fn scalar_from_biguint(&self, n: &BigUint) -> Result<Scalar> {
        let zero = BigUint::from(0u8);
        if *n == zero || *n >= self.order() {
            return Err(Error::InvalidArgument("scalar must lie in [1, q-1]".into()));
        }
        match self.0 {
            DescRepr::Toy(t) => {
                let v = n.to_u64_digits().first().copied().unwrap_or(0);
                Ok(Scalar(ScalarRepr::Toy { q: t.q, v }))
            }
            DescRepr::Strong => biguint_to_dalek(n)
                .map(|s| Scalar(ScalarRepr::Strong(s)))
                .ok_or_else(|| Error::InvalidArgument("scalar out of range".into())),
        }
    }

    /// A uniformly random non-zero scalar.
    pub fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Scalar {
        match self.0 {
            DescRepr::Toy(t) => {
                let v = 1 + rng.next_u64() % (t.q - 1);
                Scalar(ScalarRepr::Toy { q: t.q, v })
            }
            DescRepr::Strong => loop {
                let mut wide = [0u8; 64];
                rng.fill_bytes(&mut wide);
                let s = DalekScalar::from_bytes_mod_order_wide(&wide);
                if s != DalekScalar::ZERO {
                    return Scalar(ScalarRepr::Strong(s));
                }
            },
        }
    }

    /// Hashes arbitrary bytes onto a non-identity subgroup element whose
    /// discrete logarithm is unknown to everyone.
    pub fn hash_to_group(&self, data: &[u8]) -> GroupElement {
        match self.0 {
            DescRepr::Toy(t) => {
                let cofactor = (t.p - 1) / t.q;
                let mut ctr: u32 = 0;
                loop {
                    let mut msg = ctr.to_be_bytes().to_vec();
                    msg.extend_from_slice(data);
                    let d = hash_with_label("pct/hash-to-group", &msg);
                    let n = BigUint::from_bytes_be(d.as_bytes()) % BigUint::from(t.p);
                    let v = n.to_u64_digits().first().copied().unwrap_or(0);
                    let e = toy_pow(v, cofactor, t.p);
                    if e > 1 {
                        return GroupElement::toy(t, e);
                    }
                    ctr += 1;
                }
            }
            DescRepr::Strong => {
                let mut wide = [0u8; 64];
                let mut lo = b"\x00".to_vec();
                lo.extend_from_slice(data);
                let mut hi = b"\x01".to_vec();
                hi.extend_from_slice(data);
                wide[..32].copy_from_slice(hash_with_label("pct/hash-to-group", &lo).as_bytes());
                wide[32..].copy_from_slice(hash_with_label("pct/hash-to-group", &hi).as_bytes());
                GroupElement::strong(RistrettoPoint::from_uniform_bytes(&wide))
            }
        }
    }

    /// `base^n` for an arbitrary non-negative integer exponent (including 0
    /// and multiples of `q`), used by membership checks and oracles.
    pub fn exp_uint(&self, base: &GroupElement, n: &BigUint) -> Result<GroupElement> {
        if !self.contains(base) {
            return Err(Error::InvalidArgument(
                "base is not an element of this group".into(),
            ));
        }
        let reduced = n % self.order();
        match (self.0, base.0) {
            (DescRepr::Toy(t), ElemRepr::Toy { v, .. }) => {
                let e = reduced.to_u64_digits().first().copied().unwrap_or(0);
                Ok(GroupElement::toy(t, toy_pow(v, e, t.p)))
            }
            (DescRepr::Strong, ElemRepr::Strong { point, .. }) => {
                let s = biguint_to_dalek(&reduced).expect("reduced below the order");
                Ok(GroupElement::strong(point * s))
            }
            _ => unreachable!("membership checked above"),
        }
    }

    /// Exhaustive discrete logarithm of `e` to base `g` (toy groups only).
    pub fn toy_discrete_log(&self, e: &GroupElement) -> Option<u64> {
        let DescRepr::Toy(t) = self.0 else {
            return None;
        };
        let target = e.toy_value()?;
        let mut acc = 1u64;
        for k in 0..t.q {
            if acc == target {
                return Some(k);
            }
            acc = ((acc as u128 * t.g as u128) % t.p as u128) as u64;
        }
        None
    }
}

impl GroupElement {
    fn toy(t: ToyParams, v: u64) -> Self {
        GroupElement(ElemRepr::Toy {
            p: t.p,
            v,
            width: t.width,
        })
    }

    fn strong(point: RistrettoPoint) -> Self {
        GroupElement(ElemRepr::Strong {
            point,
            enc: point.compress().to_bytes(),
        })
    }

    /// Canonical fixed-width encoding.
    pub fn encode(&self) -> Vec<u8> {
        match self.0 {
            ElemRepr::Toy { v, width, .. } => v.to_be_bytes()[8 - width..].to_vec(),
            ElemRepr::Strong { enc, .. } => enc.to_vec(),
        }
    }

    /// Integer representative of a toy-group element.
    pub fn toy_value(&self) -> Option<u64> {
        match self.0 {
            ElemRepr::Toy { v, .. } => Some(v),
            ElemRepr::Strong { .. } => None,
        }
    }

    /// Whether this is the group identity.
    pub fn is_identity(&self) -> bool {
        match self.0 {
            ElemRepr::Toy { v, .. } => v == 1,
            ElemRepr::Strong { point, .. } => point == RistrettoPoint::identity(),
        }
    }

    fn tag(&self) -> u64 {
        match self.0 {
            ElemRepr::Toy { p, .. } => p,
            ElemRepr::Strong { .. } => 0,
        }
    }
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.tag() == other.tag() && self.encode() == other.encode()
    }
}

impl Eq for GroupElement {}

impl Hash for GroupElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.tag().hash(state);
        match self.0 {
            ElemRepr::Toy { v, .. } => v.hash(state),
            ElemRepr::Strong { enc, .. } => enc.hash(state),
        }
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.tag()
            .cmp(&other.tag())
            .then_with(|| self.encode().cmp(&other.encode()))
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            ElemRepr::Toy { v, p, .. } => write!(f, "Toy({v} mod {p})"),
            ElemRepr::Strong { enc, .. } => {
                let hex: String = enc[..8].iter().map(|b| format!("{b:02x}")).collect();
                write!(f, "Strong({hex}…)")
            }
        }
    }
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let hex: String = self.encode().iter().map(|b| format!("{b:02x}")).collect();
        s.serialize_str(&hex)
    }
}

impl Scalar {
    /// Integer value of the scalar.
    pub fn to_biguint(&self) -> BigUint {
        match self.0 {
            ScalarRepr::Toy { v, .. } => BigUint::from(v),
            ScalarRepr::Strong(s) => BigUint::from_bytes_le(s.as_bytes()),
        }
    }

    /// Multiplicative inverse modulo `q`.
    pub fn invert(&self) -> Scalar {
        match self.0 {
            ScalarRepr::Toy { q, v } => Scalar(ScalarRepr::Toy {
                q,
                v: toy_pow(v, q - 2, q),
            }),
            ScalarRepr::Strong(s) => Scalar(ScalarRepr::Strong(s.invert())),
        }
    }

    /// Product modulo `q`.
    pub fn mul(&self, other: &Scalar) -> Result<Scalar> {
        match (self.0, other.0) {
            (ScalarRepr::Toy { q, v }, ScalarRepr::Toy { q: q2, v: w }) if q == q2 => {
                Ok(Scalar(ScalarRepr::Toy {
                    q,
                    v: ((v as u128 * w as u128) % q as u128) as u64,
                }))
            }
            (ScalarRepr::Strong(a), ScalarRepr::Strong(b)) => Ok(Scalar(ScalarRepr::Strong(a * b))),
            _ => Err(Error::InvalidArgument(
                "scalars from different groups".into(),
            )),
        }
    }

    fn is_zero(&self) -> bool {
        match self.0 {
            ScalarRepr::Toy { v, .. } => v == 0,
            ScalarRepr::Strong(s) => s == DalekScalar::ZERO,
        }
    }
}

/// Encoding of a slot index used as PRF input.
pub fn encode_slot(slot: u32) -> [u8; 4] {
    slot.to_be_bytes()
}

/// `x = (prf(seed, encode(slot)) mod (q-1)) + 1`.
pub fn derive_scalar(seed: &[u8], slot: u32, group: &GroupDesc) -> Result<Scalar> {
    let d = super::prf::prf(seed, &encode_slot(slot))?;
    scalar_from_digest(&d, group)
}

/// Maps a digest into `[1, q-1]` by reduction modulo `q-1` plus one.
pub fn scalar_from_digest(d: &Digest, group: &GroupDesc) -> Result<Scalar> {
    let n = BigUint::from_bytes_be(d.as_bytes());
    let q_minus_1 = group.order() - BigUint::from(1u8);
    let v = (n % q_minus_1) + BigUint::from(1u8);
    group.scalar_from_biguint(&v)
}

/// `base^e`.
///
/// # Errors
/// Fails with [`Error::InvalidArgument`] if `base` and `e` come from
/// different groups.
pub fn group_exp(base: &GroupElement, e: &Scalar) -> Result<GroupElement> {
    match (base.0, e.0) {
        (ElemRepr::Toy { p, v, width }, ScalarRepr::Toy { q, v: k }) if (p - 1) % q == 0 => {
            Ok(GroupElement(ElemRepr::Toy {
                p,
                v: toy_pow(v, k, p),
                width,
            }))
        }
        (ElemRepr::Strong { point, .. }, ScalarRepr::Strong(s)) => {
            Ok(GroupElement::strong(point * s))
        }
        _ => Err(Error::InvalidArgument(
            "element and scalar belong to different groups".into(),
        )),
    }
}

/// The Diffie-Hellman value `their_beacon^my_secret`.
///
/// # Errors
/// An identity beacon is rejected with [`Error::IdentityElement`].
pub fn dh_shared(my_secret: &Scalar, their_beacon: &GroupElement) -> Result<GroupElement> {
    if their_beacon.is_identity() {
        return Err(Error::IdentityElement);
    }
    group_exp(their_beacon, my_secret)
}

/// `H(enc(shared) ‖ b)` where `b = 0` if `enc(mine) < enc(theirs)` and `1`
/// otherwise.
pub fn ordered_token(
    shared: &GroupElement,
    mine: &GroupElement,
    theirs: &GroupElement,
) -> Result<Digest> {
    let mine_enc = mine.encode();
    let theirs_enc = theirs.encode();
    if mine_enc == theirs_enc {
        return Err(Error::DegenerateEncounter);
    }
    let indicator = if mine_enc < theirs_enc { 0u8 } else { 1u8 };
    Ok(ordered_token_with_indicator(shared, indicator))
}

/// `H(enc(shared) ‖ indicator)`; the server evaluates both indicators.
pub fn ordered_token_with_indicator(shared: &GroupElement, indicator: u8) -> Digest {
    let mut msg = shared.encode();
    msg.push(indicator);
    hash_with_label("pct/ordered-token", &msg)
}

/// Both candidate ordered tokens recomputable from a shared value.
pub fn ordered_token_pair(shared: &GroupElement) -> [Digest; 2] {
    [
        ordered_token_with_indicator(shared, 0),
        ordered_token_with_indicator(shared, 1),
    ]
}

/// A randomized receipt `(g^y, beacon^y)` for fresh random `y`.
pub fn randomized_receipt<R: RngCore + ?Sized>(
    group: &GroupDesc,
    received_beacon: &GroupElement,
    rng: &mut R,
) -> Result<(GroupElement, GroupElement)> {
    if !group.contains(received_beacon) {
        return Err(Error::InvalidArgument(
            "beacon is not an element of this group".into(),
        ));
    }
    if received_beacon.is_identity() {
        return Err(Error::IdentityElement);
    }
    let y = group.random_scalar(rng);
    Ok((group.generator_exp(&y)?, group_exp(received_beacon, &y)?))
}

/// Whether the holder of secret `x` produced the beacon a receipt refers to.
pub fn receipt_matches(receipt: &(GroupElement, GroupElement), x: &Scalar) -> Result<bool> {
    Ok(group_exp(&receipt.0, x)? == receipt.1)
}

/// `elem^secret`, rejecting a zero secret.
pub fn blind_pow(elem: &GroupElement, secret: &Scalar) -> Result<GroupElement> {
    if secret.is_zero() {
        return Err(Error::InvalidArgument(
            "blinding secret must be non-zero".into(),
        ));
    }
    group_exp(elem, secret)
}

/// `elem^(secret^{-1})`, undoing [`blind_pow`].
pub fn unblind_pow(elem: &GroupElement, secret: &Scalar) -> Result<GroupElement> {
    if secret.is_zero() {
        return Err(Error::InvalidArgument(
            "blinding secret must be non-zero".into(),
        ));
    }
    group_exp(elem, &secret.invert())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> GroupDesc {
        GroupDesc::toy_custom(23, 11, 2).unwrap()
    }

    #[test]
    fn textbook_toy_group_values() {
        let g = tiny();
        let gen = g.generator();
        assert_eq!(
            group_exp(&gen, &g.scalar(3).unwrap()).unwrap().toy_value(),
            Some(8)
        );
        assert_eq!(
            group_exp(&gen, &g.scalar(5).unwrap()).unwrap().toy_value(),
            Some(9)
        );
        let nine = g.toy_element(9).unwrap();
        let eight = g.toy_element(8).unwrap();
        assert_eq!(
            dh_shared(&g.scalar(3).unwrap(), &nine).unwrap().toy_value(),
            Some(16)
        );
        assert_eq!(
            dh_shared(&g.scalar(5).unwrap(), &eight)
                .unwrap()
                .toy_value(),
            Some(16)
        );
        let five = g.scalar(5).unwrap();
        assert_eq!(five.invert().to_biguint(), BigUint::from(9u8));
        let blinded = blind_pow(&eight, &five).unwrap();
        assert_eq!(unblind_pow(&blinded, &five).unwrap(), eight);
    }

    #[test]
    fn scalar_range_is_enforced() {
        let g = tiny();
        assert!(g.scalar(0).is_err());
        assert!(g.scalar(11).is_err());
        assert!(g.scalar(10).is_ok());
    }

    #[test]
    fn invalid_toy_parameters_are_rejected() {
        assert!(GroupDesc::toy_custom(23, 11, 1).is_err());
        assert!(GroupDesc::toy_custom(23, 12, 2).is_err());
        assert!(GroupDesc::toy_custom(23, 11, 5).is_err()); // 5 has order 22
    }

    #[test]
    fn mismatched_groups_are_rejected() {
        let a = tiny();
        let b = GroupDesc::toy();
        assert!(group_exp(&a.generator(), &b.scalar(3).unwrap()).is_err());
        assert!(group_exp(&GroupDesc::strong().generator(), &a.scalar(3).unwrap()).is_err());
    }

    #[test]
    fn identity_beacon_is_rejected() {
        let g = tiny();
        assert_eq!(
            dh_shared(&g.scalar(3).unwrap(), &g.identity()),
            Err(Error::IdentityElement)
        );
    }

    #[test]
    fn strong_group_round_trips_encoding() {
        let g = GroupDesc::strong();
        let e = group_exp(&g.generator(), &g.scalar(12345).unwrap()).unwrap();
        assert_eq!(g.decode_element(&e.encode()).unwrap(), e);
        assert!(g.order() >= BigUint::from(1u8) << 250usize);
    }

    #[test]
    fn toy_encoding_is_fixed_width() {
        let g = GroupDesc::toy();
        assert_eq!(g.generator().encode(), vec![0, 0, 4]);
        assert_eq!(g.decode_element(&[0, 0, 4]).unwrap(), g.generator());
        // p - 1 is a quadratic non-residue because p ≡ 3 (mod 4).
        let minus_one = (2_097_143u64 - 1).to_be_bytes()[5..].to_vec();
        assert!(g.decode_element(&minus_one).is_err());
    }
}
