use super::{plogp, PRUNE_EPS, SUM_TOLERANCE};
use crate::error::{Error, Result};

/// A probability distribution over the outcome indices `0..len`.
///
/// Entries lie in `[0, 1]` and sum to one. Construction renormalizes vectors
/// whose total is within [`SUM_TOLERANCE`] of one and rejects anything else.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist {
    probs: Vec<f64>,
}

impl Dist {
    /// Validate a probability vector.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty probability vector".into()));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || !(0.0..=1.0 + SUM_TOLERANCE).contains(&p) {
                return Err(Error::InvalidDistribution(format!("entry {i} = {p} outside [0, 1]")));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        let probs = if sum == 1.0 {
            probs
        } else {
            probs.iter().map(|p| (p / sum).min(1.0)).collect()
        };
        Ok(Self { probs })
    }

    /// Normalize non-negative weights. Entries that fall below [`PRUNE_EPS`]
    /// after normalization are zeroed and the remainder renormalized.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidDistribution(format!("invalid weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        if probs.iter().any(|&p| p > 0.0 && p < PRUNE_EPS) {
            for p in probs.iter_mut() {
                if *p < PRUNE_EPS {
                    *p = 0.0;
                }
            }
            let kept: f64 = probs.iter().sum();
            for p in probs.iter_mut() {
                *p /= kept;
            }
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution over an empty set");
        Self { probs: vec![1.0 / n as f64; n] }
    }

    pub fn point(n: usize, i: usize) -> Self {
        assert!(i < n, "point mass index {i} out of range {n}");
        let mut probs = vec![0.0; n];
        probs[i] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs.get(i).copied().unwrap_or(0.0)
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        entropy_of(&self.probs)
    }

    /// Number of outcomes with positive mass.
    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    /// Index of the largest entry; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    /// Condition on the event `{i : keep[i]}`.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let mut w = vec![0.0; self.len()];
        for &i in keep {
            if i >= self.len() {
                return Err(Error::OutOfRange { index: i, dim: self.len() });
            }
            w[i] = self.probs[i];
        }
        Self::from_weights(&w)
    }

    /// Inverse-CDF sampling from a uniform draw `u` in `[0, 1)`.
    pub fn sample_with(&self, u: f64) -> usize {
        sample_index(&self.probs, u)
    }
}

/// Shannon entropy (bits) of a possibly unnormalized-free probability slice.
pub fn entropy_of(probs: &[f64]) -> f64 {
    probs.iter().map(|&p| plogp(p)).sum::<f64>().max(0.0)
}

/// Inverse-CDF draw over non-negative weights in index order.
pub(crate) fn sample_index(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if target < acc {
                return i;
            }
        }
    }
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_examples() {
        assert_eq!(Dist::new(vec![0.5, 0.5]).unwrap().entropy(), 1.0);
        assert_eq!(Dist::new(vec![1.0]).unwrap().entropy(), 0.0);
        let h = Dist::new(vec![0.25, 0.25, 0.5]).unwrap().entropy();
        assert!((h - 1.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(Dist::new(vec![]).is_err());
        assert!(Dist::new(vec![0.5, 0.6]).is_err());
        assert!(Dist::new(vec![-0.1, 1.1]).is_err());
        assert!(Dist::new(vec![f64::NAN, 1.0]).is_err());
        assert!(Dist::from_weights(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn renormalizes_small_drift() {
        let d = Dist::new(vec![0.5, 0.5 + 5e-10]).unwrap();
        let s: f64 = d.probs().iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn from_weights_prunes_dust() {
        let d = Dist::from_weights(&[1.0, 1e-17, 1.0]).unwrap();
        assert_eq!(d.probs(), &[0.5, 0.0, 0.5]);
    }

    #[test]
    fn sampling_follows_cdf() {
        let d = Dist::new(vec![0.25, 0.0, 0.75]).unwrap();
        assert_eq!(d.sample_with(0.0), 0);
        assert_eq!(d.sample_with(0.2499), 0);
        assert_eq!(d.sample_with(0.25), 2);
        assert_eq!(d.sample_with(0.999_999), 2);
    }

    #[test]
    fn restrict_and_argmax() {
        let d = Dist::new(vec![0.25, 0.25, 0.5]).unwrap();
        assert_eq!(d.restrict(&[0, 1]).unwrap().probs(), &[0.5, 0.5, 0.0]);
        assert_eq!(d.argmax(), 2);
        assert_eq!(Dist::uniform(3).argmax(), 0);
    }
}
