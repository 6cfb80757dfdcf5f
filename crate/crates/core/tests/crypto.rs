//! Property tests of the cryptographic building blocks, run in the toy
//! group so that every claim can be checked against a brute-force oracle.

use std::collections::HashSet;

use pct_core::crypto::{
    blind_pow, cuckoo_build, cuckoo_query, dh_shared, hash_with_label, ordered_token,
    ordered_token_pair, randomized_receipt, receipt_matches, unblind_pow, Digest, GroupDesc,
    DEFAULT_FP_TARGET,
};
use pct_core::protocols::psi_ca::psi_ca_round;
use pct_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn toy() -> GroupDesc {
    GroupDesc::toy()
}

fn item(v: u32) -> Vec<u8> {
    format!("item-{v}").into_bytes()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dh_values_agree_on_both_sides(a in 1u64..1_048_571, b in 1u64..1_048_571) {
        let g = toy();
        let (x, y) = (g.scalar(a).unwrap(), g.scalar(b).unwrap());
        let (gx, gy) = (g.generator_exp(&x).unwrap(), g.generator_exp(&y).unwrap());
        prop_assert_eq!(dh_shared(&x, &gy).unwrap(), dh_shared(&y, &gx).unwrap());
    }

    #[test]
    fn ordered_tokens_are_complementary(a in 1u64..1_048_571, b in 1u64..1_048_571) {
        let g = toy();
        let (x, y) = (g.scalar(a).unwrap(), g.scalar(b).unwrap());
        let (gx, gy) = (g.generator_exp(&x).unwrap(), g.generator_exp(&y).unwrap());
        prop_assume!(gx != gy);
        let shared = dh_shared(&x, &gy).unwrap();
        let mine = ordered_token(&shared, &gx, &gy).unwrap();
        let theirs = ordered_token(&shared, &gy, &gx).unwrap();
        prop_assert_ne!(mine, theirs);
        let pair = ordered_token_pair(&shared);
        let mut sides = [mine, theirs];
        sides.sort();
        let mut expected = pair;
        expected.sort();
        prop_assert_eq!(sides, expected);
    }

    #[test]
    fn blinding_round_trips(v in 1u64..1_000_000, k in 1u64..1_048_571) {
        let g = toy();
        let e = g.hash_to_group(&v.to_be_bytes());
        let s = g.scalar(k).unwrap();
        prop_assert_eq!(unblind_pow(&blind_pow(&e, &s).unwrap(), &s).unwrap(), e);
    }

    #[test]
    fn blinding_commutes(v in 1u64..1_000_000, a in 1u64..1_048_571, b in 1u64..1_048_571) {
        let g = toy();
        let e = g.hash_to_group(&v.to_be_bytes());
        let (sa, sb) = (g.scalar(a).unwrap(), g.scalar(b).unwrap());
        let ab = blind_pow(&blind_pow(&e, &sa).unwrap(), &sb).unwrap();
        let ba = blind_pow(&blind_pow(&e, &sb).unwrap(), &sa).unwrap();
        prop_assert_eq!(ab, ba);
    }
}

#[test]
fn ordered_token_rejects_identical_beacons() {
    let g = toy();
    let x = g.scalar(5).unwrap();
    let gx = g.generator_exp(&x).unwrap();
    let shared = dh_shared(&x, &gx).unwrap();
    assert!(matches!(
        ordered_token(&shared, &gx, &gx),
        Err(Error::DegenerateEncounter)
    ));
}

#[test]
fn dh_rejects_identity_beacon() {
    let g = toy();
    let x = g.scalar(5).unwrap();
    assert!(matches!(
        dh_shared(&x, &g.identity()),
        Err(Error::IdentityElement)
    ));
}

#[test]
fn zero_and_out_of_range_scalars_are_rejected() {
    let g = toy();
    assert!(g.scalar(0).is_err());
    assert!(g.scalar(1_048_571).is_err());
    assert!(g.scalar(1_048_570).is_ok());
}

/// Naive intersection cardinality, counting user multiplicity.
fn naive_cardinality(server: &[Vec<u8>], user: &[Vec<u8>]) -> u64 {
    let set: HashSet<&Vec<u8>> = server.iter().collect();
    user.iter().filter(|y| set.contains(y)).count() as u64
}

#[test]
fn psi_ca_cardinality_matches_naive_oracle() {
    let g = toy();
    // Brute-force check that the fixed item universe has no hash-to-group
    // collision, so the naive oracle is the right reference.
    let universe: HashSet<_> = (0..64).map(|v| g.hash_to_group(&item(v))).collect();
    assert_eq!(universe.len(), 64);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let server: Vec<Vec<u8>> = (0..rng.gen_range(0..20))
            .map(|_| item(rng.gen_range(0..64)))
            .collect();
        let user: Vec<Vec<u8>> = (0..rng.gen_range(0..20))
            .map(|_| item(rng.gen_range(0..64)))
            .collect();
        let (n, transcript) = psi_ca_round(&g, &server, &user, &mut rng).unwrap();
        assert_eq!(n, naive_cardinality(&server, &user));
        assert_eq!(transcript.query.len(), user.len());
        assert_eq!(transcript.response.len(), user.len());
    }
}

#[test]
fn receipts_verify_only_for_the_owner() {
    let g = toy();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = g.random_scalar(&mut rng);
    let beacon = g.generator_exp(&x).unwrap();
    let receipt = randomized_receipt(&g, &beacon, &mut rng).unwrap();
    assert!(receipt_matches(&receipt, &x).unwrap());
    let mut wrong = 0;
    while wrong < 100 {
        let y = g.random_scalar(&mut rng);
        if g.generator_exp(&y).unwrap() == beacon {
            continue;
        }
        assert!(!receipt_matches(&receipt, &y).unwrap());
        wrong += 1;
    }
}

#[test]
fn receipts_are_unlinkable_to_each_other() {
    let g = toy();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let x = g.random_scalar(&mut rng);
    let beacon = g.generator_exp(&x).unwrap();
    let a = randomized_receipt(&g, &beacon, &mut rng).unwrap();
    let b = randomized_receipt(&g, &beacon, &mut rng).unwrap();
    assert_ne!(a, b);
    assert!(receipt_matches(&a, &x).unwrap() && receipt_matches(&b, &x).unwrap());
}

fn digest(label: &str, i: u64) -> Digest {
    hash_with_label(label, &i.to_be_bytes())
}

#[test]
fn cuckoo_filter_has_no_false_negatives_and_bounded_fpr() {
    let members: Vec<Digest> = (0..20_000).map(|i| digest("member", i)).collect();
    let filter = cuckoo_build(members.iter(), DEFAULT_FP_TARGET).unwrap();
    assert!(members.iter().all(|m| cuckoo_query(&filter, m)));
    let probes = 100_000u64;
    let false_positives = (0..probes)
        .filter(|i| cuckoo_query(&filter, &digest("probe", *i)))
        .count();
    let fpr = false_positives as f64 / probes as f64;
    assert!(fpr <= 2.0 * DEFAULT_FP_TARGET, "measured FPR {fpr}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cuckoo_filter_contains_every_inserted_item(seed in any::<u64>(), n in 1usize..2000) {
        let items: Vec<Digest> = (0..n as u64).map(|i| digest(&format!("p{seed}"), i)).collect();
        let filter = cuckoo_build(items.iter(), DEFAULT_FP_TARGET).unwrap();
        prop_assert_eq!(filter.len(), n);
        prop_assert!(items.iter().all(|i| cuckoo_query(&filter, i)));
    }
}
