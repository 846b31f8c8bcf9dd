//! Iterative minimum-entropy coupling over a family of partitions.
//!
//! Each iteration picks the partition whose block posterior has maximum
//! entropy, couples that block posterior with the next-symbol distribution
//! of the target, and either samples a symbol for a known message (encode)
//! or conditions on an observed symbol (decode). The choice of partition
//! family gives the tabular, factored and prefix-tree variants.

mod factored;
mod session;
mod tabular;

use std::fmt::Debug;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::prob::Dist;
use crate::seqmodel::Autoregressive;

pub use factored::{factored_partition_set, FactoredPartitionSet};
pub use session::{imec_decode, imec_encode, Coupler, CouplerOptions, StepDetail, StepRecord};
pub use tabular::{singleton_partition_set, TabularPartitionSet, MAX_TABULAR_SIZE};

/// The maximum-entropy partition picked for one coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection<P> {
    pub partition: P,
    /// Posterior over the blocks of `partition`, indexed by block.
    pub blocks: Dist,
    pub entropy: f64,
    /// Partitions whose posterior had to be evaluated to make the choice.
    pub nodes_touched: usize,
}

/// A family of partitions of the message space together with the posterior
/// state needed to score them.
pub trait PartitionSet {
    type Outcome: Clone + Debug + PartialEq;
    type PartitionId: Clone + Debug + PartialEq;

    /// Pick a partition with maximum posterior block entropy. Must be
    /// deterministic given the evidence applied so far.
    fn select(&mut self) -> Selection<Self::PartitionId>;

    /// Block of `partition` that contains `x`.
    fn block_of(&self, partition: &Self::PartitionId, x: &Self::Outcome) -> usize;

    /// Bayes update. `joint[b]` is proportional to the old block mass times
    /// the likelihood of the evidence under block `b`.
    fn apply_evidence(&mut self, partition: &Self::PartitionId, joint: &[f64]) -> Result<()>;

    /// Point estimate of the message under the current posterior.
    fn map_estimate(&mut self) -> Self::Outcome;

    /// Current posterior probability of a single message.
    fn posterior_of(&mut self, x: &Self::Outcome) -> f64;

    /// Entropy of the full message posterior, when it is cheap to compute.
    fn posterior_entropy(&mut self) -> Option<f64> {
        None
    }

    /// Reject messages outside the sample space.
    fn validate(&self, x: &Self::Outcome) -> Result<()>;
}

/// Exact probability of every channel sequence of length `m` under each
/// message, obtained by replaying a session along every branch.
///
/// `observe` conditions a session on one symbol and returns the probability
/// the encoder would have emitted it for the given message. Returns
/// `y -> [P(y | messages[i])]` over sequences with positive channel
/// probability. Exponential in `m`; meant for small instances.
pub fn enumerate_likelihoods<C, X, S, F>(
    start: &C,
    messages: &[X],
    channel: &S,
    m: usize,
    observe: F,
) -> Result<BTreeMap<Vec<usize>, Vec<f64>>>
where
    C: Clone,
    S: Autoregressive + ?Sized,
    F: Fn(&mut C, &Dist, usize, &X) -> Result<f64>,
{
    struct Walk<'a, S: ?Sized, F> {
        channel: &'a S,
        observe: F,
        m: usize,
    }

    impl<S: Autoregressive + ?Sized, F> Walk<'_, S, F> {
        fn go<C: Clone, X>(
            &self,
            session: &C,
            x: &X,
            prefix: &mut Vec<usize>,
            prob: f64,
            out: &mut BTreeMap<Vec<usize>, f64>,
        ) -> Result<()>
        where
            F: Fn(&mut C, &Dist, usize, &X) -> Result<f64>,
        {
            if prefix.len() == self.m {
                out.insert(prefix.clone(), prob);
                return Ok(());
            }
            let nu = self.channel.next_dist(prefix);
            for (y, &p) in nu.probs().iter().enumerate() {
                if p <= 0.0 {
                    continue;
                }
                let mut next = session.clone();
                let q = match (self.observe)(&mut next, &nu, y, x) {
                    Ok(q) => q,
                    Err(Error::Decode(_)) => 0.0,
                    Err(e) => return Err(e),
                };
                prefix.push(y);
                self.go(&next, x, prefix, prob * q, out)?;
                prefix.pop();
            }
            Ok(())
        }
    }

    let walk = Walk { channel, observe, m };
    let mut table: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
    for (i, x) in messages.iter().enumerate() {
        let mut probs = BTreeMap::new();
        walk.go(start, x, &mut Vec::new(), 1.0, &mut probs)?;
        for (y, p) in probs {
            table.entry(y).or_insert_with(|| vec![0.0; messages.len()])[i] = p;
        }
    }
    Ok(table)
}
