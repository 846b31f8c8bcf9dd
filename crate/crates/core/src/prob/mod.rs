//! Probability vectors, sparse couplings, and minimum-entropy coupling.
//!
//! All entropies are measured in bits.

mod coupling;
mod dist;
mod exact;
mod greedy;

pub use coupling::SparseCoupling;
pub use dist::{entropy_of, Dist};
pub(crate) use dist::sample_index;
pub use exact::{exact_mec, EXACT_MEC_CAP};
pub use greedy::greedy_mec;

/// Tolerance on the total mass of a probability vector.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Masses below this threshold are treated as zero and pruned.
pub const PRUNE_EPS: f64 = 1e-15;

/// Contribution `-p log2 p` with the convention `0 log 0 = 0`.
#[inline]
pub fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}
