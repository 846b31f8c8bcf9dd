use super::Autoregressive;
use crate::prob::Dist;

/// I.i.d. uniform symbols over a fixed alphabet and length.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSource {
    vocab: usize,
    len: usize,
}

impl UniformSource {
    pub fn new(vocab: usize, len: usize) -> Self {
        assert!(vocab > 0);
        Self { vocab, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Entropy of a full sequence in bits.
    pub fn total_entropy(&self) -> f64 {
        self.len as f64 * (self.vocab as f64).log2()
    }
}

/// Fair independent bits.
pub fn uniform_bit_source(length_bits: usize) -> UniformSource {
    UniformSource::new(2, length_bits)
}

impl Autoregressive for UniformSource {
    fn vocab_size(&self) -> usize {
        self.vocab
    }

    fn max_len(&self) -> Option<usize> {
        Some(self.len)
    }

    fn next_dist(&self, _prefix: &[usize]) -> Dist {
        Dist::uniform(self.vocab)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqmodel::sample_sequence;

    #[test]
    fn fair_bits() {
        let s = uniform_bit_source(8);
        assert_eq!(s.next_dist(&[1, 0, 1]).probs(), &[0.5, 0.5]);
        assert_eq!(s.total_entropy(), 8.0);
    }

    #[test]
    fn four_bit_strings_are_uniform() {
        let s = uniform_bit_source(4);
        let trials = 100_000u64;
        let mut counts = [0u64; 16];
        for seed in 0..trials {
            let bits = sample_sequence(&s, seed, 4);
            let v = bits.iter().fold(0usize, |acc, &b| acc * 2 + b);
            counts[v] += 1;
        }
        let p = 1.0 / 16.0;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - trials as f64 * p).abs() <= 3.0 * sigma + 1.0, "{counts:?}");
        }
    }
}
