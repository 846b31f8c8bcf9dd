//! Prefix-tree partition set for messages drawn from an autoregressive
//! prior.
//!
//! Every prefix `v` defines a partition of the message space with blocks
//! "extends `v` with symbol `a`" (one per symbol), "does not extend `v`",
//! and "equals `v`". Posteriors over these blocks are kept lazily: only
//! visited prefixes are materialized, and a node's blocks are brought up to
//! date on demand by walking the tree path from the node where evidence
//! was last applied.

mod bound;
mod tree;

pub use bound::entropy_upper_bound;
pub use tree::{
    prefix_tree_partition_set, propagate_blocks, PrefixTreePartitionSet, PrunedDirection, SearchTrace,
};
