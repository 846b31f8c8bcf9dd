//! Fixed-length token messages coded with any of the three partition-set
//! variants behind one interface.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arimec::PrefixTreePartitionSet;
use crate::error::{Error, Result};
use crate::imec::{
    enumerate_likelihoods, Coupler, CouplerOptions, FactoredPartitionSet, PartitionSet, StepRecord, TabularPartitionSet,
    MAX_TABULAR_SIZE,
};
use crate::prob::Dist;
use crate::seqmodel::{log_likelihood, Autoregressive};

/// Which partition set drives the coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Timec,
    Fimec,
    Arimec,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Timec, Variant::Fimec, Variant::Arimec];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Timec => "timec",
            Variant::Fimec => "fimec",
            Variant::Arimec => "arimec",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "timec" => Ok(Variant::Timec),
            "fimec" => Ok(Variant::Fimec),
            "arimec" => Ok(Variant::Arimec),
            other => Err(Error::InvalidArgument(format!("unknown variant `{other}`"))),
        }
    }
}

/// Messages of exactly `len` tokens. `prior` gives the autoregressive
/// message distribution used by the tabular and prefix-tree variants;
/// `components` gives the per-position distributions assumed by the
/// factored variant.
#[derive(Debug, Clone)]
pub struct MessageSpace<M> {
    pub prior: M,
    pub len: usize,
    pub components: Vec<Dist>,
}

impl<M: Autoregressive> MessageSpace<M> {
    /// Factored variant assumes each position uniform over the prior's
    /// vocabulary.
    pub fn with_uniform_components(prior: M, len: usize) -> Self {
        let v = prior.vocab_size();
        Self { prior, len, components: vec![Dist::uniform(v); len] }
    }
}

#[derive(Debug, Clone)]
enum Inner<M: Autoregressive> {
    Tabular { coupler: Coupler<TabularPartitionSet>, vocab: usize, len: usize },
    Factored { coupler: Coupler<FactoredPartitionSet>, empty: bool },
    Tree(Coupler<PrefixTreePartitionSet<M>>),
}

/// An encode or decode session over token messages.
#[derive(Debug, Clone)]
pub struct MessageCoder<M: Autoregressive> {
    inner: Inner<M>,
    variant: Variant,
}

fn tabular_index(x: &[usize], vocab: usize) -> usize {
    x.iter().fold(0, |acc, &t| acc * vocab + t)
}

fn tabular_message(mut i: usize, vocab: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = i % vocab;
        i /= vocab;
    }
    out
}

impl<M: Autoregressive + Clone> MessageCoder<M> {
    pub fn new(variant: Variant, space: &MessageSpace<M>, options: CouplerOptions) -> Result<Self> {
        let inner = match variant {
            Variant::Timec => {
                let vocab = space.prior.vocab_size();
                let size = u32::try_from(space.len)
                    .ok()
                    .and_then(|l| vocab.checked_pow(l))
                    .filter(|&s| s <= MAX_TABULAR_SIZE)
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "tabular message space {vocab}^{} is too large",
                            space.len
                        ))
                    })?;
                let weights: Vec<f64> = (0..size)
                    .map(|i| log_likelihood(&space.prior, &tabular_message(i, vocab, space.len)).exp2())
                    .collect();
                let prior = Dist::from_weights(&weights)?;
                Inner::Tabular {
                    coupler: Coupler::new(TabularPartitionSet::new(prior)?, options),
                    vocab,
                    len: space.len,
                }
            }
            Variant::Fimec => {
                if space.components.len() != space.len {
                    return Err(Error::LengthMismatch { left: space.components.len(), right: space.len });
                }
                let components = if space.len == 0 { vec![Dist::uniform(1)] } else { space.components.clone() };
                Inner::Factored {
                    coupler: Coupler::new(FactoredPartitionSet::new(components)?, options),
                    empty: space.len == 0,
                }
            }
            Variant::Arimec => Inner::Tree(Coupler::new(
                PrefixTreePartitionSet::new(space.prior.clone(), space.len),
                options,
            )),
        };
        Ok(Self { inner, variant })
    }
}

impl<M: Autoregressive> MessageCoder<M> {
    pub fn variant(&self) -> Variant {
        self.variant
    }

    fn factored_message(x: &[usize]) -> Vec<usize> {
        if x.is_empty() {
            vec![0]
        } else {
            x.to_vec()
        }
    }

    fn check_tabular(x: &[usize], vocab: usize, len: usize) -> Result<usize> {
        if x.len() != len {
            return Err(Error::LengthMismatch { left: x.len(), right: len });
        }
        if let Some(&t) = x.iter().find(|&&t| t >= vocab) {
            return Err(Error::OutOfRange { index: t, dim: vocab });
        }
        Ok(tabular_index(x, vocab))
    }

    pub fn encode_step(&mut self, x: &[usize], nu: &Dist) -> Result<usize> {
        match &mut self.inner {
            Inner::Tabular { coupler, vocab, len } => {
                let i = Self::check_tabular(x, *vocab, *len)?;
                coupler.encode_step(&i, nu)
            }
            Inner::Factored { coupler: c, .. } => c.encode_step(&Self::factored_message(x), nu),
            Inner::Tree(c) => c.encode_step(&x.to_vec(), nu),
        }
    }

    pub fn decode_step(&mut self, nu: &Dist, y: usize) -> Result<()> {
        match &mut self.inner {
            Inner::Tabular { coupler, .. } => coupler.decode_step(nu, y),
            Inner::Factored { coupler: c, .. } => c.decode_step(nu, y),
            Inner::Tree(c) => c.decode_step(nu, y),
        }
    }

    /// Condition on `y` and return the probability of emitting it for `x`.
    pub fn observe_step(&mut self, nu: &Dist, y: usize, x: &[usize]) -> Result<f64> {
        match &mut self.inner {
            Inner::Tabular { coupler, vocab, len } => {
                let i = Self::check_tabular(x, *vocab, *len)?;
                coupler.observe_step(nu, y, &i)
            }
            Inner::Factored { coupler: c, .. } => c.observe_step(nu, y, &Self::factored_message(x)),
            Inner::Tree(c) => c.observe_step(nu, y, &x.to_vec()),
        }
    }

    pub fn map_estimate(&mut self) -> Vec<usize> {
        match &mut self.inner {
            Inner::Tabular { coupler, vocab, len } => tabular_message(coupler.map_estimate(), *vocab, *len),
            Inner::Factored { coupler, empty } => {
                let x = coupler.map_estimate();
                if *empty {
                    Vec::new()
                } else {
                    x
                }
            }
            Inner::Tree(c) => c.map_estimate(),
        }
    }

    pub fn posterior_of(&mut self, x: &[usize]) -> f64 {
        match &mut self.inner {
            Inner::Tabular { coupler, vocab, len } => match Self::check_tabular(x, *vocab, *len) {
                Ok(i) => coupler.partitions_mut().posterior_of(&i),
                Err(_) => 0.0,
            },
            Inner::Factored { coupler: c, .. } => c.partitions_mut().posterior_of(&Self::factored_message(x)),
            Inner::Tree(c) => c.partitions_mut().posterior_of(&x.to_vec()),
        }
    }

    /// Entropy of the message posterior where the representation allows it.
    pub fn posterior_entropy(&mut self) -> Option<f64> {
        match &mut self.inner {
            Inner::Tabular { coupler, .. } => coupler.partitions_mut().posterior_entropy(),
            Inner::Factored { coupler: c, .. } => c.partitions_mut().posterior_entropy(),
            Inner::Tree(c) => c.partitions_mut().posterior_entropy(),
        }
    }

    pub fn records(&self) -> &[StepRecord] {
        match &self.inner {
            Inner::Tabular { coupler, .. } => coupler.records(),
            Inner::Factored { coupler: c, .. } => c.records(),
            Inner::Tree(c) => c.records(),
        }
    }

    pub fn emitted(&self) -> &[usize] {
        match &self.inner {
            Inner::Tabular { coupler, .. } => coupler.emitted(),
            Inner::Factored { coupler: c, .. } => c.emitted(),
            Inner::Tree(c) => c.emitted(),
        }
    }

    /// Materialized prefix-tree size, for the prefix-tree variant.
    pub fn tree_size(&self) -> Option<usize> {
        match &self.inner {
            Inner::Tree(c) => Some(c.partitions().materialized()),
            _ => None,
        }
    }
}

/// Exact probability of every channel sequence of length `m` under each
/// message. See [`enumerate_likelihoods`].
pub fn channel_likelihoods<M, S>(
    coder: &MessageCoder<M>,
    messages: &[Vec<usize>],
    channel: &S,
    m: usize,
) -> Result<BTreeMap<Vec<usize>, Vec<f64>>>
where
    M: Autoregressive + Clone,
    S: Autoregressive + ?Sized,
{
    enumerate_likelihoods(coder, messages, channel, m, |c, nu, y, x| c.observe_step(nu, y, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabular_indexing_round_trips() {
        for i in 0..27 {
            let x = tabular_message(i, 3, 3);
            assert_eq!(tabular_index(&x, 3), i);
        }
        assert_eq!(tabular_message(5, 2, 3), vec![1, 0, 1]);
    }

    #[test]
    fn variant_names() {
        for v in Variant::ALL {
            assert_eq!(v.as_str().parse::<Variant>().unwrap(), v);
        }
        assert!("imec".parse::<Variant>().is_err());
    }
}
