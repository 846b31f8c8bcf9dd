use serde::{Deserialize, Serialize};

use super::{bootstrap_ci, bootstrap_seed, run_trials, trial_seed, CsvRecord, Report, SummaryRow, BOOTSTRAP_RESAMPLES};
use crate::codec::Variant;
use crate::error::Result;
use crate::rng::{derive_seed, STREAM_CODER, STREAM_MESSAGE};
use crate::seqmodel::{sample_sequence, Autoregressive, NgramModel};
use crate::stego::{linguistic_decode, linguistic_encode, StegoConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinguisticConfig {
    pub variants: Vec<Variant>,
    /// Plaintext length in tokens.
    pub plain_len: usize,
    /// Stegotext length in symbols.
    pub len: usize,
    pub trials: usize,
    pub merging: bool,
    pub seed: u64,
    pub prior_vocab: usize,
    pub prior_sharpness: f64,
    pub prior_seed: u64,
}

impl Default for LinguisticConfig {
    fn default() -> Self {
        Self {
            variants: vec![Variant::Arimec, Variant::Fimec],
            plain_len: 40,
            len: 12,
            trials: 100,
            merging: false,
            seed: 0,
            prior_vocab: 8,
            prior_sharpness: 4.0,
            prior_seed: 7,
        }
    }
}

impl LinguisticConfig {
    /// The synthetic low-entropy second-order plaintext model.
    pub fn prior(&self) -> Result<NgramModel> {
        NgramModel::random(2, self.prior_vocab, self.prior_seed, self.prior_sharpness)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticRow {
    pub variant: Variant,
    pub seed: u64,
    pub plain_len: usize,
    pub len: usize,
    /// Leading plaintext tokens the receiver recovered correctly.
    pub correct_prefix: usize,
    /// Correct tokens per stegotext symbol.
    pub throughput: f64,
}

impl CsvRecord for LinguisticRow {
    const HEADER: &'static str = "variant,seed,plain_len,len,correct_prefix,throughput";
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.variant, self.seed, self.plain_len, self.len, self.correct_prefix, self.throughput
        )
    }
}

/// Hide plaintext drawn from `prior` in `cover`: the prefix-tree variant
/// uses the true prior, the factored variant assumes uniform tokens.
pub fn run_linguistic<S: Autoregressive + ?Sized>(
    cfg: &LinguisticConfig,
    prior: &NgramModel,
    cover: &S,
) -> Result<Report<LinguisticRow>> {
    let mut rows = Vec::new();
    for &variant in &cfg.variants {
        rows.extend(run_trials(cfg.trials, |i| {
            let seed = trial_seed(cfg.seed, i);
            let plain = sample_sequence(prior, derive_seed(seed, STREAM_MESSAGE, 0), cfg.plain_len);
            let sc = StegoConfig {
                variant,
                merging: cfg.merging,
                seed: derive_seed(seed, STREAM_CODER, 0),
                len: cfg.len,
                chunk_bits: 1,
            };
            let stego = linguistic_encode(&plain, prior, cover, &sc)?;
            let guess = linguistic_decode(&stego.stegotext, cfg.plain_len, prior, cover, &sc)?;
            let correct_prefix = plain.iter().zip(&guess).take_while(|(a, b)| a == b).count();
            Ok(LinguisticRow {
                variant,
                seed,
                plain_len: cfg.plain_len,
                len: cfg.len,
                correct_prefix,
                throughput: correct_prefix as f64 / cfg.len.max(1) as f64,
            })
        })?);
    }
    let mut summary = Vec::new();
    for (k, &variant) in cfg.variants.iter().enumerate() {
        let v: Vec<f64> = rows.iter().filter(|r| r.variant == variant).map(|r| r.correct_prefix as f64).collect();
        let e = bootstrap_ci(&v, bootstrap_seed(cfg.seed, k), BOOTSTRAP_RESAMPLES);
        summary.push(SummaryRow::new(variant.as_str(), "correct_prefix", e));
    }
    Ok(Report { rows, summary })
}
