use super::{PartitionSet, Selection};
use crate::error::{Error, Result};
use crate::prob::Dist;

/// Largest message space the tabular variant will hold in memory.
pub const MAX_TABULAR_SIZE: usize = 1_000_000;

/// The partition of singletons: the posterior over every message is kept
/// explicitly and every coupling uses it in full.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPartitionSet {
    posterior: Dist,
}

impl TabularPartitionSet {
    pub fn new(prior: Dist) -> Result<Self> {
        if prior.len() > MAX_TABULAR_SIZE {
            return Err(Error::InvalidArgument(format!(
                "tabular space of {} outcomes exceeds {MAX_TABULAR_SIZE}",
                prior.len()
            )));
        }
        Ok(Self { posterior: prior })
    }

    pub fn posterior(&self) -> &Dist {
        &self.posterior
    }
}

/// Tabular coupling over a prior on `0..prior.len()`.
pub fn singleton_partition_set(prior: Dist) -> Result<TabularPartitionSet> {
    TabularPartitionSet::new(prior)
}

impl PartitionSet for TabularPartitionSet {
    type Outcome = usize;
    type PartitionId = ();

    fn select(&mut self) -> Selection<()> {
        Selection {
            partition: (),
            entropy: self.posterior.entropy(),
            blocks: self.posterior.clone(),
            nodes_touched: 1,
        }
    }

    fn block_of(&self, _: &(), x: &usize) -> usize {
        *x
    }

    fn apply_evidence(&mut self, _: &(), joint: &[f64]) -> Result<()> {
        self.posterior = Dist::from_weights(joint)?;
        Ok(())
    }

    fn map_estimate(&mut self) -> usize {
        self.posterior.argmax()
    }

    fn posterior_of(&mut self, x: &usize) -> f64 {
        self.posterior.get(*x)
    }

    fn posterior_entropy(&mut self) -> Option<f64> {
        Some(self.posterior.entropy())
    }

    fn validate(&self, x: &usize) -> Result<()> {
        if *x >= self.posterior.len() {
            return Err(Error::OutOfRange { index: *x, dim: self.posterior.len() });
        }
        Ok(())
    }
}
