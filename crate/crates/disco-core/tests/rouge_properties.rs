//! ROUGE properties and the brute-force LCS oracle.

use disco_core::rouge::{lcs_length, novel_ngram_proportion, rouge_l, rouge_n};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exponential-time reference LCS, safe for sequences up to length ~10.
fn lcs_recursive(a: &[u8], b: &[u8]) -> usize {
    match (a.split_last(), b.split_last()) {
        (Some((xa, ra)), Some((xb, rb))) => {
            if xa == xb {
                1 + lcs_recursive(ra, rb)
            } else {
                lcs_recursive(ra, b).max(lcs_recursive(a, rb))
            }
        }
        _ => 0,
    }
}

#[test]
fn lcs_matches_the_recursive_reference_on_1000_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let la = rng.random_range(0..=10);
        let lb = rng.random_range(0..=10);
        let a: Vec<u8> = (0..la).map(|_| rng.random_range(0..4u8)).collect();
        let b: Vec<u8> = (0..lb).map(|_| rng.random_range(0..4u8)).collect();
        assert_eq!(lcs_length(&a, &b), lcs_recursive(&a, &b));
    }
}

fn tokens() -> impl Strategy<Value = Vec<u8>> {
    proptest::collection::vec(0u8..5, 0..20)
}

proptest! {
    #[test]
    fn precision_and_recall_swap_under_argument_exchange(
        a in tokens(),
        b in tokens(),
        n in 1usize..4,
    ) {
        let ab = rouge_n(&a, &b, n).unwrap();
        let ba = rouge_n(&b, &a, n).unwrap();
        prop_assert_eq!(ab.precision, ba.recall);
        prop_assert_eq!(ab.recall, ba.precision);
    }

    #[test]
    fn appending_reference_tokens_never_lowers_recall(
        candidate in tokens(),
        reference in proptest::collection::vec(0u8..5, 1..20),
        extension in 1usize..5,
        n in 1usize..3,
    ) {
        let before = rouge_n(&candidate, &reference, n).unwrap().recall;
        let mut extended = candidate.clone();
        extended.extend(reference.iter().take(extension));
        let after = rouge_n(&extended, &reference, n).unwrap().recall;
        prop_assert!(after >= before - 1e-12);
    }

    #[test]
    fn rouge_l_bounds_and_consistency(a in tokens(), b in tokens()) {
        let s = rouge_l(&a, &b);
        prop_assert!(s.precision >= 0.0 && s.precision <= 1.0);
        prop_assert!(s.recall >= 0.0 && s.recall <= 1.0);
        // f1 consistency with P and R.
        if s.precision + s.recall == 0.0 {
            prop_assert_eq!(s.f1, 0.0);
        } else {
            let expect = 2.0 * s.precision * s.recall / (s.precision + s.recall);
            prop_assert!((s.f1 - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn subsequences_of_the_source_have_no_novel_unigrams(
        source in proptest::collection::vec(0u8..6, 1..20),
        picks in proptest::collection::vec(any::<proptest::sample::Index>(), 1..6),
    ) {
        let summary: Vec<u8> = picks.iter().map(|ix| source[ix.index(source.len())]).collect();
        prop_assert_eq!(novel_ngram_proportion(&summary, &source, 1), 0.0);
    }
}
