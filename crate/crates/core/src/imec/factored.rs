use super::{PartitionSet, Selection};
use crate::error::{Error, Result};
use crate::prob::Dist;

/// One partition per component of a factorable message: partition `i`
/// groups messages by their `i`-th component. Because every coupling
/// involves a single component, the posterior stays a product of
/// per-component marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredPartitionSet {
    components: Vec<Dist>,
}

impl FactoredPartitionSet {
    pub fn new(components: Vec<Dist>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("factored message needs at least one component".into()));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[Dist] {
        &self.components
    }
}

pub fn factored_partition_set(components: Vec<Dist>) -> Result<FactoredPartitionSet> {
    FactoredPartitionSet::new(components)
}

impl PartitionSet for FactoredPartitionSet {
    type Outcome = Vec<usize>;
    type PartitionId = usize;

    fn select(&mut self) -> Selection<usize> {
        let mut best = 0;
        let mut best_h = f64::NEG_INFINITY;
        for (i, c) in self.components.iter().enumerate() {
            let h = c.entropy();
            if h > best_h {
                best = i;
                best_h = h;
            }
        }
        Selection {
            partition: best,
            blocks: self.components[best].clone(),
            entropy: best_h,
            nodes_touched: self.components.len(),
        }
    }

    fn block_of(&self, partition: &usize, x: &Vec<usize>) -> usize {
        x[*partition]
    }

    fn apply_evidence(&mut self, partition: &usize, joint: &[f64]) -> Result<()> {
        self.components[*partition] = Dist::from_weights(joint)?;
        Ok(())
    }

    fn map_estimate(&mut self) -> Vec<usize> {
        self.components.iter().map(Dist::argmax).collect()
    }

    fn posterior_of(&mut self, x: &Vec<usize>) -> f64 {
        x.iter().zip(&self.components).map(|(&xi, c)| c.get(xi)).product()
    }

    fn posterior_entropy(&mut self) -> Option<f64> {
        Some(self.components.iter().map(Dist::entropy).sum())
    }

    fn validate(&self, x: &Vec<usize>) -> Result<()> {
        if x.len() != self.components.len() {
            return Err(Error::LengthMismatch { left: x.len(), right: self.components.len() });
        }
        for (&xi, c) in x.iter().zip(&self.components) {
            if xi >= c.len() {
                return Err(Error::OutOfRange { index: xi, dim: c.len() });
            }
        }
        Ok(())
    }
}
