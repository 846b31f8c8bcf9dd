//! Desk-scale experiments. Each one runs seeded trials in parallel and
//! reports one row per trial plus bootstrap confidence intervals.
//!
//! Trial `i` of a run with root seed `r` uses `derive_seed(r, STREAM_TRIAL, i)`
//! as its seed, so results do not depend on thread scheduling. The worker
//! count is capped by the `ENTROCOUP_THREADS` environment variable.

mod linguistic;
mod mcg;
mod merging;
mod search_nodes;
mod stego;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, STREAM_BOOTSTRAP, STREAM_TRIAL};
use crate::seqmodel::NgramModel;

pub use linguistic::{run_linguistic, LinguisticConfig, LinguisticRow};
pub use mcg::{run_mcg, run_mcg_on, McgConfig, McgRow};
pub use merging::{run_merging, MergingConfig, MergingRow};
pub use search_nodes::{loglog_slope, run_search_nodes, SearchNodesConfig, SearchNodesRow};
pub use stego::{run_stego, StegoExperimentConfig, StegoRow};

pub const BOOTSTRAP_RESAMPLES: usize = 10_000;
pub const THREADS_ENV: &str = "ENTROCOUP_THREADS";

/// Mean with a percentile bootstrap 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Percentile bootstrap of the mean with `resamples` seeded resamples.
pub fn bootstrap_ci(values: &[f64], seed: u64, resamples: usize) -> Estimate {
    let n = values.len();
    let m = mean(values);
    if n == 0 || resamples == 0 {
        return Estimate { mean: m, lo: m, hi: m, n };
    }
    let mut rng = rng_from_seed(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.gen_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let at = |q: f64| means[((q * resamples as f64).floor() as usize).min(resamples - 1)];
    Estimate { mean: m, lo: at(0.025), hi: at(0.975), n }
}

/// One line of an experiment summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub group: String,
    pub metric: String,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

impl SummaryRow {
    pub fn new(group: impl Into<String>, metric: impl Into<String>, e: Estimate) -> Self {
        Self { group: group.into(), metric: metric.into(), mean: e.mean, ci_low: e.lo, ci_high: e.hi, n: e.n }
    }
}

/// Records that print as one CSV line.
pub trait CsvRecord {
    const HEADER: &'static str;
    fn csv(&self) -> String;
}

impl CsvRecord for SummaryRow {
    const HEADER: &'static str = "group,metric,mean,ci_low,ci_high,n";
    fn csv(&self) -> String {
        format!("{},{},{},{},{},{}", self.group, self.metric, self.mean, self.ci_low, self.ci_high, self.n)
    }
}

pub fn to_csv<R: CsvRecord>(rows: &[R]) -> String {
    let mut out = String::from(R::HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv());
        out.push('\n');
    }
    out
}

/// Trial rows and their summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report<R> {
    pub rows: Vec<R>,
    pub summary: Vec<SummaryRow>,
}

impl<R> Report<R> {
    pub fn find(&self, group: &str, metric: &str) -> Option<&SummaryRow> {
        self.summary.iter().find(|s| s.group == group && s.metric == metric)
    }
}

pub fn trial_seed(root: u64, trial: usize) -> u64 {
    derive_seed(root, STREAM_TRIAL, trial as u64)
}

/// Seed for the bootstrap of summary line `index`.
pub fn bootstrap_seed(root: u64, index: usize) -> u64 {
    derive_seed(root, STREAM_BOOTSTRAP, index as u64)
}

fn thread_cap() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(0),
    }
}

/// Run `f(trial)` for `trials` trials in parallel, returning results in
/// trial order.
pub fn run_trials<T, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap()?)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| (0..trials).into_par_iter().map(&f).collect())
}

/// The synthetic covertext used when no model file is given: first-order,
/// eight symbols, every row above two bits of entropy.
pub fn default_cover(seed: u64) -> NgramModel {
    NgramModel::random(1, 8, seed, 0.5).expect("valid synthetic model")
}
