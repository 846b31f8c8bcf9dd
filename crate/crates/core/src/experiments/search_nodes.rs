use serde::{Deserialize, Serialize};

use super::{run_trials, trial_seed, CsvRecord, Estimate, Report, SummaryRow};
use crate::codec::{MessageCoder, MessageSpace, Variant};
use crate::error::Result;
use crate::imec::CouplerOptions;
use crate::rng::{derive_seed, STREAM_CODER, STREAM_MESSAGE};
use crate::seqmodel::{sample_sequence, Autoregressive, NgramModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchNodesConfig {
    /// Message lengths to sweep; longer messages grow larger trees.
    pub msg_lens: Vec<usize>,
    /// Stegotext symbols per message token.
    pub steps_per_token: usize,
    pub trials: usize,
    pub merging: bool,
    pub seed: u64,
    pub prior_vocab: usize,
    pub prior_sharpness: f64,
    pub prior_seed: u64,
}

impl Default for SearchNodesConfig {
    fn default() -> Self {
        Self {
            msg_lens: vec![8, 16, 32, 64, 128],
            steps_per_token: 2,
            trials: 20,
            merging: false,
            seed: 0,
            prior_vocab: 8,
            prior_sharpness: 1.0,
            prior_seed: 5,
        }
    }
}

impl SearchNodesConfig {
    pub fn prior(&self) -> Result<NgramModel> {
        NgramModel::random(2, self.prior_vocab, self.prior_seed, self.prior_sharpness)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchNodesRow {
    pub msg_len: usize,
    pub seed: u64,
    pub step: usize,
    /// Materialized prefix-tree nodes after the step.
    pub tree_size: usize,
    /// Nodes the maximum-entropy search visited during the step.
    pub nodes_touched: usize,
}

impl CsvRecord for SearchNodesRow {
    const HEADER: &'static str = "msg_len,seed,step,tree_size,nodes_touched";
    fn csv(&self) -> String {
        format!("{},{},{},{},{}", self.msg_len, self.seed, self.step, self.tree_size, self.nodes_touched)
    }
}

/// Least-squares slope of `ln y` against `ln x`, skipping non-positive points.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> =
        points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    if logs.len() < 2 {
        return f64::NAN;
    }
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return f64::NAN;
    }
    sxy / sxx
}

/// Record, for each prefix-tree encoding step, how many nodes the search
/// touched against how large the materialized tree has grown.
pub fn run_search_nodes<S: Autoregressive + ?Sized>(
    cfg: &SearchNodesConfig,
    cover: &S,
) -> Result<Report<SearchNodesRow>> {
    let prior = cfg.prior()?;
    let mut rows = Vec::new();
    for &msg_len in &cfg.msg_lens {
        let space = MessageSpace::with_uniform_components(prior.clone(), msg_len);
        let len = msg_len * cfg.steps_per_token;
        let per_trial = run_trials(cfg.trials, |i| {
            let seed = trial_seed(cfg.seed, i);
            let message = sample_sequence(&prior, derive_seed(seed, STREAM_MESSAGE, 0), msg_len);
            let options =
                CouplerOptions { seed: derive_seed(seed, STREAM_CODER, 0), merging: cfg.merging, record_details: false };
            let mut coder = MessageCoder::new(Variant::Arimec, &space, options)?;
            let mut out = Vec::with_capacity(len);
            for step in 0..len {
                let nu = cover.next_dist(coder.emitted());
                coder.encode_step(&message, &nu)?;
                let record = coder.records().last().expect("step recorded");
                out.push(SearchNodesRow {
                    msg_len,
                    seed,
                    step,
                    tree_size: coder.tree_size().unwrap_or(0),
                    nodes_touched: record.nodes_touched,
                });
            }
            Ok(out)
        })?;
        rows.extend(per_trial.into_iter().flatten());
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.tree_size as f64, r.nodes_touched as f64)).collect();
    let slope = loglog_slope(&points);
    let touched: Vec<f64> = rows.iter().map(|r| r.nodes_touched as f64).collect();
    let sizes: Vec<f64> = rows.iter().map(|r| r.tree_size as f64).collect();
    let point = |v: f64| Estimate { mean: v, lo: v, hi: v, n: rows.len() };
    let summary = vec![
        SummaryRow::new("arimec", "mean_nodes_touched", point(super::mean(&touched))),
        SummaryRow::new("arimec", "mean_tree_size", point(super::mean(&sizes))),
        SummaryRow::new("arimec", "loglog_slope", point(slope)),
    ];
    Ok(Report { rows, summary })
}
