//! Autoregressive sources used as message priors and covertext channels.

mod ngram;
mod random_tree;
mod uniform;

use rand::Rng;

use crate::prob::Dist;
use crate::rng::rng_from_seed;

pub use ngram::NgramModel;
pub use random_tree::RandomTreeSource;
pub use uniform::{uniform_bit_source, UniformSource};

/// A distribution over symbol sequences given by next-symbol conditionals.
pub trait Autoregressive: Send + Sync {
    /// Number of symbols, including the end-of-sequence symbol if any.
    fn vocab_size(&self) -> usize;

    /// Reserved end-of-sequence symbol. Once emitted it is absorbing.
    fn eos(&self) -> Option<usize> {
        None
    }

    /// Intrinsic maximum sequence length, if the source has one.
    fn max_len(&self) -> Option<usize> {
        None
    }

    /// `P(next | prefix)`. Callers guarantee every prefix symbol is in range.
    fn next_dist(&self, prefix: &[usize]) -> Dist;
}

impl<T: Autoregressive + ?Sized> Autoregressive for &T {
    fn vocab_size(&self) -> usize {
        (**self).vocab_size()
    }
    fn eos(&self) -> Option<usize> {
        (**self).eos()
    }
    fn max_len(&self) -> Option<usize> {
        (**self).max_len()
    }
    fn next_dist(&self, prefix: &[usize]) -> Dist {
        (**self).next_dist(prefix)
    }
}

impl<T: Autoregressive + ?Sized> Autoregressive for std::sync::Arc<T> {
    fn vocab_size(&self) -> usize {
        (**self).vocab_size()
    }
    fn eos(&self) -> Option<usize> {
        (**self).eos()
    }
    fn max_len(&self) -> Option<usize> {
        (**self).max_len()
    }
    fn next_dist(&self, prefix: &[usize]) -> Dist {
        (**self).next_dist(prefix)
    }
}

/// Point mass on EOS when the prefix already contains it.
pub(crate) fn absorbed(vocab: usize, eos: Option<usize>, prefix: &[usize]) -> Option<Dist> {
    let e = eos?;
    prefix.contains(&e).then(|| Dist::point(vocab, e))
}

/// Draw a sequence of at most `max_len` symbols. Sampling stops right after
/// an end-of-sequence symbol is drawn.
pub fn sample_sequence<S: Autoregressive + ?Sized>(source: &S, seed: u64, max_len: usize) -> Vec<usize> {
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(max_len);
    while out.len() < max_len {
        let d = source.next_dist(&out);
        let s = d.sample_with(rng.gen::<f64>());
        out.push(s);
        if Some(s) == source.eos() {
            break;
        }
    }
    out
}

/// Log-likelihood in bits; `f64::NEG_INFINITY` for impossible sequences.
pub fn log_likelihood<S: Autoregressive + ?Sized>(source: &S, seq: &[usize]) -> f64 {
    let mut total = 0.0;
    for j in 0..seq.len() {
        let p = source.next_dist(&seq[..j]).get(seq[j]);
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        total += p.log2();
    }
    total
}

/// Exact entropy (bits) of the first `len` symbols of a source whose
/// conditionals depend on at most the previous `order` symbols.
///
/// Runs forward over the distribution of the last `order` symbols, so the
/// cost is `len * vocab^(order + 1)`.
pub fn sequence_entropy<S: Autoregressive + ?Sized>(source: &S, order: usize, len: usize) -> f64 {
    use std::collections::BTreeMap;
    let mut states: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    states.insert(Vec::new(), 1.0);
    let mut total = 0.0;
    for _ in 0..len {
        let mut next: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (ctx, &w) in &states {
            let d = source.next_dist(ctx);
            total += w * d.entropy();
            for (s, &p) in d.probs().iter().enumerate() {
                if p > 0.0 {
                    let mut c = ctx.clone();
                    c.push(s);
                    if c.len() > order {
                        c.remove(0);
                    }
                    *next.entry(c).or_insert(0.0) += w * p;
                }
            }
        }
        states = next;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_zero_loglik() {
        let m = NgramModel::from_rows(
            0,
            vec!["a".into(), "b".into(), "c".into()],
            None,
            [(vec![], Dist::new(vec![0.25, 0.25, 0.5]).unwrap())],
        )
        .unwrap();
        assert!((log_likelihood(&m, &[2]) + 1.0).abs() < 1e-12);
        let bad = NgramModel::from_rows(
            0,
            vec!["a".into(), "b".into()],
            None,
            [(vec![], Dist::new(vec![1.0, 0.0]).unwrap())],
        )
        .unwrap();
        assert_eq!(log_likelihood(&bad, &[1]), f64::NEG_INFINITY);
    }

    #[test]
    fn sampling_is_reproducible() {
        let src = RandomTreeSource::new(5, None, 11, 1.0);
        assert_eq!(sample_sequence(&src, 3, 20), sample_sequence(&src, 3, 20));
    }

    #[test]
    fn sequence_entropy_of_fair_bits() {
        let src = uniform_bit_source(8);
        assert!((sequence_entropy(&src, 0, 8) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn per_symbol_loglik_tracks_entropy() {
        let row = Dist::new(vec![0.1, 0.2, 0.7]).unwrap();
        let h = row.entropy();
        let m = NgramModel::from_rows(0, vec!["x".into(), "y".into(), "z".into()], None, [(vec![], row)])
            .unwrap();
        let mut total = 0.0;
        let mut count = 0usize;
        for seed in 0..200 {
            let s = sample_sequence(&m, seed, 50);
            total -= log_likelihood(&m, &s);
            count += s.len();
        }
        assert!((total / count as f64 - h).abs() < 0.05);
    }
}
