use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{bootstrap_ci, BOOTSTRAP_RESAMPLES, bootstrap_seed, run_trials, trial_seed, CsvRecord, Report, SummaryRow};
use crate::codec::Variant;
use crate::error::Result;
use crate::rng::{derive_seed, rng_from_seed, STREAM_CODER, STREAM_KEY, STREAM_MESSAGE};
use crate::seqmodel::Autoregressive;
use crate::stego::{decrypt, encrypt, stego_decode, stego_encode, PrivateKey, StegoConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StegoExperimentConfig {
    pub variants: Vec<Variant>,
    pub bits: usize,
    pub len: usize,
    pub trials: usize,
    pub merging: bool,
    pub chunk_bits: usize,
    pub seed: u64,
}

impl Default for StegoExperimentConfig {
    fn default() -> Self {
        Self {
            variants: vec![Variant::Fimec, Variant::Arimec, Variant::Timec],
            bits: 16,
            len: 100,
            trials: 100,
            merging: false,
            chunk_bits: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StegoRow {
    pub variant: Variant,
    pub seed: u64,
    pub bits: usize,
    pub len: usize,
    pub error_rate: f64,
    pub joint_entropy_bits: f64,
    /// `-log2` posterior of the true ciphertext after decoding.
    #[serde(skip)]
    pub residual_bits: f64,
    /// Whether decrypting the decoded ciphertext returned the plaintext.
    #[serde(skip)]
    pub plaintext_recovered: bool,
}

impl CsvRecord for StegoRow {
    const HEADER: &'static str = "variant,seed,bits,len,error_rate,joint_entropy_bits";
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.variant, self.seed, self.bits, self.len, self.error_rate, self.joint_entropy_bits
        )
    }
}

/// Encrypt a random plaintext, hide it, decode it from the stegotext alone.
pub fn run_stego<S: Autoregressive + ?Sized>(cfg: &StegoExperimentConfig, cover: &S) -> Result<Report<StegoRow>> {
    let mut rows = Vec::new();
    for &variant in &cfg.variants {
        rows.extend(run_trials(cfg.trials, |i| {
            let seed = trial_seed(cfg.seed, i);
            let mut rng = rng_from_seed(derive_seed(seed, STREAM_MESSAGE, 0));
            let plain: Vec<u8> = (0..cfg.bits).map(|_| rng.gen_range(0..2u8)).collect();
            let key = PrivateKey::generate(cfg.bits, derive_seed(seed, STREAM_KEY, 0));
            let cipher = encrypt(&plain, &key)?;
            let sc = StegoConfig {
                variant,
                merging: cfg.merging,
                seed: derive_seed(seed, STREAM_CODER, 0),
                len: cfg.len,
                chunk_bits: cfg.chunk_bits,
            };
            let t = stego_encode(&cipher, cover, &sc)?;
            let decoded = stego_decode(&t.stegotext, cfg.bits, cover, &sc)?;
            Ok(StegoRow {
                variant,
                seed,
                bits: cfg.bits,
                len: cfg.len,
                error_rate: if decoded == cipher { 0.0 } else { 1.0 },
                joint_entropy_bits: cfg.bits as f64 - t.log2_likelihood,
                residual_bits: t.residual_bits,
                plaintext_recovered: decrypt(&decoded, &key)? == plain,
            })
        })?);
    }
    let mut summary = Vec::new();
    for (k, &variant) in cfg.variants.iter().enumerate() {
        let of = |f: fn(&StegoRow) -> f64| -> Vec<f64> {
            rows.iter().filter(|r| r.variant == variant).map(f).collect()
        };
        let err = of(|r| r.error_rate);
        let joint = of(|r| r.joint_entropy_bits);
        let mi: Vec<f64> = of(|r| r.residual_bits).iter().map(|h| cfg.bits as f64 - h).collect();
        let g = variant.as_str();
        for (j, (metric, values)) in
            [("error_rate", &err), ("joint_entropy_bits", &joint), ("mutual_information_bits", &mi)]
                .into_iter()
                .enumerate()
        {
            let e = bootstrap_ci(values, bootstrap_seed(cfg.seed, 3 * k + j), BOOTSTRAP_RESAMPLES);
            summary.push(SummaryRow::new(g, metric, e));
        }
    }
    Ok(Report { rows, summary })
}
