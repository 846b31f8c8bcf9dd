//! Grouping of channel symbols that carry identical information.
//!
//! Two symbols whose coupling columns are proportional induce the same
//! posterior over blocks, so sampling between them spends channel entropy
//! without revealing anything about the message. Merging treats such a set
//! as one group, samples the group, and then runs a fresh coupling inside
//! the group against the restricted channel distribution.

use crate::error::Result;
use crate::prob::{Dist, SparseCoupling};

/// Per-entry tolerance when comparing normalized columns.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// A coupling with its columns grouped by induced block posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedCoupling {
    /// Groups of symbols, ordered by their smallest member.
    pub groups: Vec<Vec<usize>>,
    /// Coupling between blocks and groups.
    pub grouped: SparseCoupling,
    /// Distribution over the full symbol alphabet restricted to each group.
    pub within: Vec<Dist>,
}

impl MergedCoupling {
    /// Expand back to a block-by-symbol coupling.
    pub fn expand(&self) -> SparseCoupling {
        let cols = self.within.first().map_or(0, Dist::len);
        let mut out = SparseCoupling::new(self.grouped.rows(), cols);
        for (b, g, p) in self.grouped.iter() {
            for &s in &self.groups[g] {
                out.add(b, s, p * self.within[g].get(s)).expect("indices from a valid coupling");
            }
        }
        out
    }
}

fn sparse_columns(c: &SparseCoupling) -> Vec<Vec<(usize, f64)>> {
    let mut cols = vec![Vec::new(); c.cols()];
    for (r, s, p) in c.iter() {
        cols[s].push((r, p));
    }
    cols
}

fn same_direction(a: &[(usize, f64)], sa: f64, b: &[(usize, f64)], sb: f64) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(&(ra, pa), &(rb, pb))| ra == rb && (pa / sa - pb / sb).abs() <= MERGE_TOLERANCE)
}

/// Group the positive-mass columns of `c`. With `merge` off every positive
/// column is its own group.
pub(crate) fn column_groups(c: &SparseCoupling, merge: bool) -> Vec<Vec<usize>> {
    let cols = sparse_columns(c);
    let sums: Vec<f64> = cols.iter().map(|col| col.iter().map(|e| e.1).sum()).collect();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for s in 0..cols.len() {
        if cols[s].is_empty() {
            continue;
        }
        let home = if merge {
            groups.iter().position(|g| {
                let rep = g[0];
                same_direction(&cols[rep], sums[rep], &cols[s], sums[s])
            })
        } else {
            None
        };
        match home {
            Some(g) => groups[g].push(s),
            None => groups.push(vec![s]),
        }
    }
    // A single group holding several symbols carries no information; the
    // plain symbol-level coupling is used instead so the step terminates.
    if groups.len() == 1 && groups[0].len() > 1 {
        groups = groups.remove(0).into_iter().map(|s| vec![s]).collect();
    }
    groups
}

/// Group columns with equal normalized block posteriors. Zero columns are
/// left out of every group.
pub fn merge_columns(c: &SparseCoupling) -> Result<MergedCoupling> {
    let cols = sparse_columns(c);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let sums: Vec<f64> = cols.iter().map(|col| col.iter().map(|e| e.1).sum()).collect();
    for s in 0..cols.len() {
        if cols[s].is_empty() {
            continue;
        }
        match groups
            .iter()
            .position(|g| same_direction(&cols[g[0]], sums[g[0]], &cols[s], sums[s]))
        {
            Some(g) => groups[g].push(s),
            None => groups.push(vec![s]),
        }
    }
    let mut grouped = SparseCoupling::new(c.rows(), groups.len());
    let mut within = Vec::with_capacity(groups.len());
    for (g, members) in groups.iter().enumerate() {
        let mut w = vec![0.0; c.cols()];
        for &s in members {
            w[s] = sums[s];
            for &(r, p) in &cols[s] {
                grouped.add(r, g, p)?;
            }
        }
        within.push(Dist::from_weights(&w)?);
    }
    Ok(MergedCoupling { groups, grouped, within })
}
