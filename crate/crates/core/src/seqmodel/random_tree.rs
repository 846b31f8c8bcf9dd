use rand::Rng;

use super::{absorbed, Autoregressive};
use crate::prob::Dist;
use crate::rng::{rng_from_seed, splitmix64};

/// Synthetic source whose conditional at each prefix is a pseudo-random
/// distribution derived from a hash of the prefix.
///
/// `sharpness` above one concentrates mass on fewer symbols.
#[derive(Debug, Clone)]
pub struct RandomTreeSource {
    vocab: usize,
    eos: Option<usize>,
    seed: u64,
    sharpness: f64,
}

impl RandomTreeSource {
    pub fn new(vocab: usize, eos: Option<usize>, seed: u64, sharpness: f64) -> Self {
        assert!(vocab > 0);
        assert!(eos.is_none_or(|e| e < vocab));
        Self { vocab, eos, seed, sharpness }
    }
}

impl Autoregressive for RandomTreeSource {
    fn vocab_size(&self) -> usize {
        self.vocab
    }

    fn eos(&self) -> Option<usize> {
        self.eos
    }

    fn next_dist(&self, prefix: &[usize]) -> Dist {
        if let Some(d) = absorbed(self.vocab, self.eos, prefix) {
            return d;
        }
        let mut h = splitmix64(self.seed ^ 0xA5A5_5A5A);
        for &s in prefix {
            h = splitmix64(h ^ (s as u64 + 1));
        }
        h = splitmix64(h ^ prefix.len() as u64);
        let mut rng = rng_from_seed(h);
        let w: Vec<f64> = (0..self.vocab)
            .map(|_| {
                let u: f64 = rng.gen::<f64>().max(1e-300);
                (-u.ln()).powf(self.sharpness)
            })
            .collect();
        Dist::from_weights(&w).expect("positive weights")
    }
}
