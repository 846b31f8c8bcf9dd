use serde::{Deserialize, Serialize};

use super::{bootstrap_ci, bootstrap_seed, run_trials, trial_seed, CsvRecord, Estimate, Report, SummaryRow, BOOTSTRAP_RESAMPLES};
use crate::codec::{MessageSpace, Variant};
use crate::error::Result;
use crate::mcg::{expected_return, meme_decode, meme_encode, soft_value_iteration, MemeConfig, TabularMdp};
use crate::rng::{derive_seed, STREAM_MESSAGE};
use crate::seqmodel::{sample_sequence, NgramModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McgConfig {
    pub variants: Vec<Variant>,
    pub alphas: Vec<f64>,
    pub states: usize,
    pub horizon: usize,
    pub slip: f64,
    pub msg_len: usize,
    pub trials: usize,
    pub merging: bool,
    pub seed: u64,
    pub prior_vocab: usize,
    pub prior_sharpness: f64,
    pub prior_seed: u64,
}

impl Default for McgConfig {
    fn default() -> Self {
        Self {
            variants: vec![Variant::Arimec, Variant::Fimec],
            alphas: vec![0.25, 0.5, 1.0, 2.0],
            states: 5,
            horizon: 20,
            slip: 0.1,
            msg_len: 8,
            trials: 100,
            merging: false,
            seed: 0,
            prior_vocab: 4,
            prior_sharpness: 2.0,
            prior_seed: 11,
        }
    }
}

impl McgConfig {
    /// First-order message prior over a small token alphabet.
    pub fn prior(&self) -> Result<NgramModel> {
        NgramModel::random(1, self.prior_vocab, self.prior_seed, self.prior_sharpness)
    }

    pub fn mdp(&self) -> Result<TabularMdp> {
        TabularMdp::chain(self.states, self.horizon, self.slip)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McgRow {
    pub variant: Variant,
    pub alpha: f64,
    pub seed: u64,
    pub msg_len: usize,
    /// Fraction of message tokens the MAP decode got wrong.
    pub decode_error: f64,
    #[serde(rename = "return")]
    pub total_return: f64,
}

impl CsvRecord for McgRow {
    const HEADER: &'static str = "variant,alpha,seed,msg_len,decode_error,return";
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.variant, self.alpha, self.seed, self.msg_len, self.decode_error, self.total_return
        )
    }
}

/// Decode error and return of message-carrying episodes on a chain MDP.
/// The prefix-tree variant knows the message prior; the factored variant
/// assumes uniform tokens.
pub fn run_mcg(cfg: &McgConfig) -> Result<Report<McgRow>> {
    run_mcg_on(cfg, &cfg.mdp()?, &cfg.prior()?)
}

/// As [`run_mcg`] with an explicit MDP and message prior; the chain and
/// prior settings of `cfg` are ignored.
pub fn run_mcg_on(cfg: &McgConfig, mdp: &TabularMdp, prior: &NgramModel) -> Result<Report<McgRow>> {
    let (mdp, prior) = (mdp.clone(), prior.clone());
    let space = MessageSpace::with_uniform_components(prior.clone(), cfg.msg_len);
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut k = 0;
    for &alpha in &cfg.alphas {
        let policy = soft_value_iteration(&mdp, alpha)?;
        let reference = expected_return(&mdp, &policy);
        summary.push(SummaryRow::new(
            format!("alpha={alpha}"),
            "policy_expected_return",
            Estimate { mean: reference, lo: reference, hi: reference, n: 0 },
        ));
        for &variant in &cfg.variants {
            let batch = run_trials(cfg.trials, |i| {
                let seed = trial_seed(cfg.seed, i);
                let message = sample_sequence(&prior, derive_seed(seed, STREAM_MESSAGE, 0), cfg.msg_len);
                let meme = MemeConfig { variant, merging: cfg.merging, seed };
                let (ep, _) = meme_encode(&message, &space, &mdp, &policy, &meme)?;
                let (guess, _) = meme_decode(&ep.states, &ep.actions, &space, &mdp, &policy, &meme)?;
                let wrong = message.iter().zip(&guess).filter(|(a, b)| a != b).count();
                Ok(McgRow {
                    variant,
                    alpha,
                    seed,
                    msg_len: cfg.msg_len,
                    decode_error: wrong as f64 / cfg.msg_len.max(1) as f64,
                    total_return: ep.total_return,
                })
            })?;
            let group = format!("{variant} alpha={alpha}");
            let errors: Vec<f64> = batch.iter().map(|r| r.decode_error).collect();
            let returns: Vec<f64> = batch.iter().map(|r| r.total_return).collect();
            summary.push(SummaryRow::new(
                group.clone(),
                "decode_error",
                bootstrap_ci(&errors, bootstrap_seed(cfg.seed, 2 * k), BOOTSTRAP_RESAMPLES),
            ));
            summary.push(SummaryRow::new(
                group,
                "return",
                bootstrap_ci(&returns, bootstrap_seed(cfg.seed, 2 * k + 1), BOOTSTRAP_RESAMPLES),
            ));
            k += 1;
            rows.extend(batch);
        }
    }
    Ok(Report { rows, summary })
}
