//! Low-entropy couplings of discrete distributions.
//!
//! The crate provides probability vectors and sparse couplings, a greedy
//! approximate minimum-entropy coupling with an exhaustive oracle for tiny
//! inputs, iterative coupling of a message distribution with an
//! autoregressive channel over tabular, factored and prefix-tree partition
//! sets, symbol merging, and two applications: steganography and coding
//! messages into the actions of a tabular Markov decision process.

pub mod arimec;
pub mod codec;
pub mod error;
pub mod experiments;
pub mod imec;
pub mod mcg;
pub mod merging;
pub mod prob;
pub mod rng;
pub mod seqmodel;
pub mod stego;

pub use error::{Error, Result};
pub use prob::{greedy_mec, Dist, SparseCoupling};
