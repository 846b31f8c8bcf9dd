use serde::{Deserialize, Serialize};

use super::{bootstrap_ci, bootstrap_seed, run_trials, trial_seed, CsvRecord, Report, SummaryRow, BOOTSTRAP_RESAMPLES};
use crate::codec::{MessageCoder, MessageSpace, Variant};
use crate::error::{Error, Result};
use crate::imec::CouplerOptions;
use crate::prob::Dist;
use crate::rng::{derive_seed, STREAM_COVER};
use crate::seqmodel::{sample_sequence, sequence_entropy, Autoregressive, NgramModel, UniformSource};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MergingConfig {
    /// Total message entropy in bits, split evenly over the components.
    pub bits: usize,
    pub components: Vec<usize>,
    pub len: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for MergingConfig {
    fn default() -> Self {
        Self { bits: 80, components: vec![10, 20, 40, 80], len: 40, trials: 100, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergingRow {
    pub components: usize,
    pub merge: bool,
    pub seed: u64,
    pub joint_entropy_bits: f64,
}

impl CsvRecord for MergingRow {
    const HEADER: &'static str = "components,merge,seed,joint_entropy_bits";
    fn csv(&self) -> String {
        format!("{},{},{},{}", self.components, self.merge, self.seed, self.joint_entropy_bits)
    }
}

/// Joint entropy `H(X, Y)` of factored coupling of uniform bits with a
/// covertext n-gram model, for several component counts.
///
/// The stegotext marginal equals the covertext exactly, so
/// `H(X, Y) = H(Y) + E_y H(X | Y = y)` with `H(Y)` computed exactly and the
/// second term averaged over covertext samples. Every configuration sees
/// the same samples, which keeps the comparison between them tight.
pub fn run_merging(cfg: &MergingConfig, cover: &NgramModel) -> Result<Report<MergingRow>> {
    for &n in &cfg.components {
        if n == 0 || !cfg.bits.is_multiple_of(n) || cfg.bits / n > 16 {
            return Err(Error::InvalidArgument(format!("{} bits do not split into {n} components", cfg.bits)));
        }
    }
    let channel_entropy = sequence_entropy(cover, cover.order(), cfg.len);
    let per_trial = run_trials(cfg.trials, |i| {
        let seed = trial_seed(cfg.seed, i);
        let y = sample_sequence(cover, derive_seed(seed, STREAM_COVER, 0), cfg.len);
        let mut out = Vec::new();
        for &n in &cfg.components {
            let width = cfg.bits / n;
            let space = MessageSpace {
                prior: UniformSource::new(1 << width, n),
                len: n,
                components: vec![Dist::uniform(1 << width); n],
            };
            for merge in [false, true] {
                let options = CouplerOptions { seed, merging: merge, record_details: false };
                let mut dec = MessageCoder::new(Variant::Fimec, &space, options)?;
                for &s in &y {
                    let nu = cover.next_dist(dec.emitted());
                    dec.decode_step(&nu, s)?;
                }
                let residual = dec.posterior_entropy().expect("factored posterior entropy");
                out.push(MergingRow { components: n, merge, seed, joint_entropy_bits: channel_entropy + residual });
            }
        }
        Ok(out)
    })?;
    let mut rows: Vec<MergingRow> = Vec::new();
    for merge in [false, true] {
        for &n in &cfg.components {
            rows.extend(per_trial.iter().flatten().filter(|r| r.merge == merge && r.components == n).cloned());
        }
    }
    let mut summary = Vec::new();
    let mut k = 0;
    for merge in [false, true] {
        for &n in &cfg.components {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| r.merge == merge && r.components == n)
                .map(|r| r.joint_entropy_bits)
                .collect();
            let group = format!("n={n} merge={merge}");
            summary.push(SummaryRow::new(group, "joint_entropy_bits", bootstrap_ci(&v, bootstrap_seed(cfg.seed, k), BOOTSTRAP_RESAMPLES)));
            k += 1;
        }
    }
    Ok(Report { rows, summary })
}
