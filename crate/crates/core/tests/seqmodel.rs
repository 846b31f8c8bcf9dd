mod common;

use common::*;
use entrocoup::seqmodel::{
    log_likelihood, sample_sequence, sequence_entropy, uniform_bit_source, Autoregressive, NgramModel,
    RandomTreeSource,
};
use proptest::prelude::*;

/// Entropy by enumerating every sequence of length `len`.
fn enumerated_entropy<S: Autoregressive>(src: &S, len: usize) -> f64 {
    all_sequences(src.vocab_size(), len)
        .iter()
        .map(|y| sequence_prob(src, y))
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

#[test]
fn forward_entropy_matches_enumeration() {
    for seed in 0..10 {
        let m = NgramModel::random(1, 3, seed, 1.0).unwrap();
        assert!((sequence_entropy(&m, 1, 5) - enumerated_entropy(&m, 5)).abs() < 1e-9);
        let m2 = NgramModel::random(2, 3, seed, 2.0).unwrap();
        assert!((sequence_entropy(&m2, 2, 5) - enumerated_entropy(&m2, 5)).abs() < 1e-9);
    }
    assert!((uniform_bit_source(8).total_entropy() - 8.0).abs() < 1e-12);
}

#[test]
fn uniform_bits_are_fair_at_every_prefix() {
    let src = uniform_bit_source(8);
    for y in all_sequences(2, 5) {
        assert_eq!(src.next_dist(&y).probs(), &[0.5, 0.5]);
    }
}

#[test]
fn samples_have_positive_likelihood() {
    let m = NgramModel::random(2, 6, 9, 3.0).unwrap();
    for seed in 0..100 {
        let s = sample_sequence(&m, seed, 30);
        assert_eq!(s.len(), 30);
        assert!(log_likelihood(&m, &s).is_finite());
    }
}

#[test]
fn sharper_random_models_have_lower_entropy() {
    let soft = NgramModel::random(1, 8, 3, 0.5).unwrap();
    let sharp = NgramModel::random(1, 8, 3, 4.0).unwrap();
    assert!(sequence_entropy(&sharp, 1, 10) < sequence_entropy(&soft, 1, 10));
}

proptest! {
    #[test]
    fn rows_are_distributions(order in 0usize..3, vocab in 1usize..6, seed in any::<u64>(), sharp in 0.1f64..4.0) {
        let m = NgramModel::random(order, vocab, seed, sharp).unwrap();
        let src = RandomTreeSource::new(vocab.max(2), None, seed, sharp);
        for y in all_sequences(vocab, order + 1) {
            let total: f64 = m.next_dist(&y).probs().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
        for y in all_sequences(vocab.max(2), 3) {
            let total: f64 = src.next_dist(&y).probs().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn text_round_trip_preserves_rows(order in 0usize..3, vocab in 1usize..5, seed in any::<u64>()) {
        let m = NgramModel::random(order, vocab, seed, 1.0).unwrap();
        let back = NgramModel::parse(&m.to_text()).unwrap();
        for y in all_sequences(vocab, order) {
            for (a, b) in m.next_dist(&y).probs().iter().zip(back.next_dist(&y).probs()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sampling_is_bit_reproducible(seed in any::<u64>()) {
        let m = NgramModel::random(2, 5, 1, 1.0).unwrap();
        prop_assert_eq!(sample_sequence(&m, seed, 40), sample_sequence(&m, seed, 40));
    }
}
