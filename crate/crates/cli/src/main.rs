//! Command-line front end: couplings, steganography, model fitting and the
//! desk-scale experiments.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use entrocoup::codec::Variant;
use entrocoup::experiments::{
    default_cover, run_linguistic, run_mcg_on, run_merging, run_search_nodes, run_stego, to_csv, CsvRecord,
    LinguisticConfig, McgConfig, MergingConfig, Report, SearchNodesConfig, StegoExperimentConfig, SummaryRow,
};
use entrocoup::mcg::TabularMdp;
use entrocoup::prob::{exact_mec, greedy_mec, Dist, SparseCoupling};
use entrocoup::seqmodel::NgramModel;
use entrocoup::stego::{
    bits_to_hex, decrypt, encrypt, hex_to_bits, stego_decode, stego_encode, PrivateKey, StegoConfig,
};

#[derive(Parser)]
#[command(name = "entrocoup", version, about = "Low-entropy couplings and steganography over discrete models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Couple two marginals read from files of whitespace- or comma-separated probabilities.
    Mec(MecArgs),
    /// Generate a uniformly random key, printed as hex.
    Keygen(KeygenArgs),
    /// Hide a ciphertext (or a plaintext plus key) in covertext.
    StegoEncode(StegoEncodeArgs),
    /// Recover the ciphertext (or, given the key, the plaintext) from a stegotext.
    StegoDecode(StegoDecodeArgs),
    /// Fit an n-gram model to a whitespace-tokenized corpus.
    Fit(FitArgs),
    /// Run a desk-scale experiment and emit per-trial rows plus a summary.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl OutputArgs {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

#[derive(Args)]
struct MergeFlags {
    /// Merge identical coupling columns before sampling.
    #[arg(long, overrides_with = "no_merge")]
    merge: bool,
    #[arg(long = "no-merge", overrides_with = "merge")]
    no_merge: bool,
}

impl MergeFlags {
    fn get(&self) -> Option<bool> {
        if self.merge {
            Some(true)
        } else if self.no_merge {
            Some(false)
        } else {
            None
        }
    }
}

#[derive(Args)]
struct CoverArgs {
    /// Covertext n-gram model file; a synthetic first-order model otherwise.
    #[arg(long)]
    cover: Option<PathBuf>,
    /// Seed of the synthetic covertext model.
    #[arg(long, default_value_t = 0)]
    cover_seed: u64,
}

impl CoverArgs {
    fn load(&self) -> Result<NgramModel> {
        match &self.cover {
            Some(p) => NgramModel::load(p).with_context(|| format!("loading {}", p.display())),
            None => Ok(default_cover(self.cover_seed)),
        }
    }

    fn describe(&self) -> CoverSpec {
        CoverSpec { path: self.cover.as_ref().map(|p| p.display().to_string()), seed: self.cover_seed }
    }
}

#[derive(Debug, Clone, Serialize)]
struct CoverSpec {
    path: Option<String>,
    seed: u64,
}

#[derive(Args)]
struct MecArgs {
    mu: PathBuf,
    nu: PathBuf,
    /// Use the exhaustive minimum-entropy oracle (small inputs only).
    #[arg(long)]
    exact: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct KeygenArgs {
    #[arg(long)]
    bits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CodingArgs {
    #[arg(long, default_value = "fimec")]
    variant: Variant,
    #[command(flatten)]
    merge: MergeFlags,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of stegotext symbols.
    #[arg(long, default_value_t = 100)]
    len: usize,
    /// Bits per message token for the factored and prefix-tree variants.
    #[arg(long, default_value_t = 8)]
    chunk_bits: usize,
    #[command(flatten)]
    cover: CoverArgs,
}

impl CodingArgs {
    fn config(&self) -> StegoConfig {
        StegoConfig {
            variant: self.variant,
            merging: self.merge.get().unwrap_or(false),
            seed: self.seed,
            len: self.len,
            chunk_bits: self.chunk_bits,
        }
    }
}

#[derive(Args)]
struct StegoEncodeArgs {
    /// Ciphertext as hex, MSB first.
    #[arg(long, conflicts_with = "plaintext")]
    ciphertext: Option<String>,
    /// Plaintext as hex; requires --key.
    #[arg(long, requires = "key")]
    plaintext: Option<String>,
    /// Key as hex.
    #[arg(long)]
    key: Option<String>,
    /// Message length in bits.
    #[arg(long)]
    bits: usize,
    #[command(flatten)]
    coding: CodingArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct StegoDecodeArgs {
    /// Stegotext as whitespace-separated symbol indices.
    #[arg(long, conflicts_with = "input")]
    stegotext: Option<String>,
    /// File holding the stegotext.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Key as hex; the plaintext is printed instead of the ciphertext.
    #[arg(long)]
    key: Option<String>,
    #[arg(long)]
    bits: usize,
    #[command(flatten)]
    coding: CodingArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct FitArgs {
    /// Corpus file, one sequence per line.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// End-of-sequence symbol appended to every line.
    #[arg(long)]
    eos: Option<String>,
    /// Additive smoothing on observed contexts.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExperimentName {
    Stego,
    Linguistic,
    Merging,
    Mcg,
    SearchNodes,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    name: ExperimentName,
    /// Variants to run, comma separated or repeated.
    #[arg(long, value_delimiter = ',')]
    variant: Vec<Variant>,
    #[command(flatten)]
    merge: MergeFlags,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// TOML file with experiment settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write the summary as CSV here; otherwise it goes to stderr.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Plaintext prior n-gram model for the linguistic experiment.
    #[arg(long)]
    prior: Option<PathBuf>,
    /// MDP file for the mcg experiment.
    #[arg(long)]
    mdp: Option<PathBuf>,
    #[command(flatten)]
    cover: CoverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

/// Everything that determines an experiment's output.
#[derive(Debug, Serialize)]
struct RunConfig<C> {
    experiment: &'static str,
    cover: CoverSpec,
    prior: Option<String>,
    mdp: Option<String>,
    settings: C,
}

#[derive(Serialize)]
struct JsonReport<'a, C, R> {
    config: &'a RunConfig<C>,
    rows: &'a [R],
    summary: &'a [SummaryRow],
}

fn read_config<C: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<C> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
        None => Ok(C::default()),
    }
}

fn read_dist(path: &Path) -> Result<Dist> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let probs = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("{}: `{t}` is not a number", path.display())))
        .collect::<Result<Vec<f64>>>()?;
    Dist::new(probs).with_context(|| format!("{} is not a distribution", path.display()))
}

#[derive(Serialize)]
struct MecReport {
    method: &'static str,
    entries: Vec<(usize, usize, f64)>,
    entropy_bits: f64,
    row_residual: f64,
    col_residual: f64,
}

fn residual(got: &[f64], want: &[f64]) -> f64 {
    got.iter().zip(want).map(|(a, b)| (a - b).abs()).sum()
}

fn cmd_mec(a: &MecArgs) -> Result<()> {
    let mu = read_dist(&a.mu)?;
    let nu = read_dist(&a.nu)?;
    let c: SparseCoupling = if a.exact { exact_mec(&mu, &nu)? } else { greedy_mec(&mu, &nu) };
    let r = MecReport {
        method: if a.exact { "exact" } else { "greedy" },
        entries: c.iter().collect(),
        entropy_bits: c.entropy(),
        row_residual: residual(&c.row_marginal(), mu.probs()),
        col_residual: residual(&c.col_marginal(), nu.probs()),
    };
    let text = match a.output.format {
        Format::Json => serde_json::to_string_pretty(&r)? + "\n",
        Format::Csv => {
            let mut s = String::from("row,col,prob\n");
            for (i, j, p) in &r.entries {
                s.push_str(&format!("{i},{j},{p}\n"));
            }
            s.push_str(&format!(
                "\nmetric,value\nmethod,{}\nentropy_bits,{}\nrow_residual,{}\ncol_residual,{}\n",
                r.method, r.entropy_bits, r.row_residual, r.col_residual
            ));
            s
        }
    };
    a.output.emit(&text)
}

fn cmd_keygen(a: &KeygenArgs) -> Result<()> {
    let hex = PrivateKey::generate(a.bits, a.seed).to_hex() + "\n";
    match &a.out {
        Some(p) => fs::write(p, hex).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{hex}");
            Ok(())
        }
    }
}

fn join_symbols(s: &[usize]) -> String {
    s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Serialize)]
struct EncodeReport {
    stegotext: Vec<usize>,
    ciphertext: String,
    log2_likelihood: f64,
    residual_bits: f64,
}

fn cmd_stego_encode(a: &StegoEncodeArgs) -> Result<()> {
    let cipher = match (&a.ciphertext, &a.plaintext, &a.key) {
        (Some(c), None, _) => hex_to_bits(c, a.bits)?,
        (None, Some(p), Some(k)) => encrypt(&hex_to_bits(p, a.bits)?, &PrivateKey::from_hex(k, a.bits)?)?,
        _ => bail!("give either --ciphertext or --plaintext with --key"),
    };
    let cover = a.coding.cover.load()?;
    let t = stego_encode(&cipher, &cover, &a.coding.config())?;
    let text = match a.output.format {
        Format::Csv => join_symbols(&t.stegotext) + "\n",
        Format::Json => {
            let r = EncodeReport {
                stegotext: t.stegotext,
                ciphertext: bits_to_hex(&cipher),
                log2_likelihood: t.log2_likelihood,
                residual_bits: t.residual_bits,
            };
            serde_json::to_string_pretty(&r)? + "\n"
        }
    };
    a.output.emit(&text)
}

fn cmd_stego_decode(a: &StegoDecodeArgs) -> Result<()> {
    let raw = match (&a.stegotext, &a.input) {
        (Some(s), None) => s.clone(),
        (None, Some(p)) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        _ => bail!("give either --stegotext or --input"),
    };
    let stegotext = raw
        .split_whitespace()
        .map(|t| t.parse::<usize>().with_context(|| format!("`{t}` is not a symbol index")))
        .collect::<Result<Vec<_>>>()?;
    let cover = a.coding.cover.load()?;
    let cipher = stego_decode(&stegotext, a.bits, &cover, &a.coding.config())?;
    let out = match &a.key {
        Some(k) => decrypt(&cipher, &PrivateKey::from_hex(k, a.bits)?)?,
        None => cipher,
    };
    let hex = bits_to_hex(&out);
    let text = match a.output.format {
        Format::Csv => hex + "\n",
        Format::Json => serde_json::to_string_pretty(&serde_json::json!({ "bits": a.bits, "hex": hex }))? + "\n",
    };
    a.output.emit(&text)
}

fn cmd_fit(a: &FitArgs) -> Result<()> {
    let corpus = fs::read_to_string(&a.corpus).with_context(|| format!("reading {}", a.corpus.display()))?;
    let model = NgramModel::fit(&corpus, a.order, a.eos.as_deref(), a.alpha)?;
    model.save(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}

fn write_report<C: Serialize, R: CsvRecord + Serialize>(
    a: &ExperimentArgs,
    config: &RunConfig<C>,
    report: &Report<R>,
) -> Result<()> {
    match a.output.format {
        Format::Json => {
            let j = JsonReport { config, rows: &report.rows, summary: &report.summary };
            a.output.emit(&(serde_json::to_string_pretty(&j)? + "\n"))?;
        }
        Format::Csv => a.output.emit(&to_csv(&report.rows))?,
    }
    let summary = to_csv(&report.summary);
    match &a.summary {
        Some(p) => fs::write(p, summary).with_context(|| format!("writing {}", p.display()))?,
        None if a.output.format == Format::Csv => eprint!("{summary}"),
        None => {}
    }
    Ok(())
}

fn reject_variants(a: &ExperimentArgs, only: Variant) -> Result<()> {
    if a.variant.iter().any(|&v| v != only) {
        bail!("this experiment always uses the {only} variant");
    }
    Ok(())
}

fn reject_merge_flag(a: &ExperimentArgs) -> Result<()> {
    if a.merge.get().is_some() {
        bail!("the merging experiment always compares both settings; drop --merge/--no-merge");
    }
    Ok(())
}

fn run_config<C>(a: &ExperimentArgs, experiment: &'static str, settings: C) -> RunConfig<C> {
    let path_string = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    RunConfig { experiment, cover: a.cover.describe(), prior: path_string(&a.prior), mdp: path_string(&a.mdp), settings }
}

fn cmd_experiment(a: &ExperimentArgs) -> Result<()> {
    let cfg_path = a.config.as_deref();
    macro_rules! settle {
        ($cfg:ident) => {
            if let Some(s) = a.seed {
                $cfg.seed = s;
            }
            if let Some(t) = a.trials {
                $cfg.trials = t;
            }
        };
    }
    match a.name {
        ExperimentName::Stego => {
            let mut cfg: StegoExperimentConfig = read_config(cfg_path)?;
            settle!(cfg);
            if !a.variant.is_empty() {
                cfg.variants = a.variant.clone();
            }
            if let Some(m) = a.merge.get() {
                cfg.merging = m;
            }
            let report = run_stego(&cfg, &a.cover.load()?)?;
            write_report(a, &run_config(a, "stego", cfg), &report)
        }
        ExperimentName::Linguistic => {
            let mut cfg: LinguisticConfig = read_config(cfg_path)?;
            settle!(cfg);
            if !a.variant.is_empty() {
                cfg.variants = a.variant.clone();
            }
            if let Some(m) = a.merge.get() {
                cfg.merging = m;
            }
            let prior = match &a.prior {
                Some(p) => NgramModel::load(p).with_context(|| format!("loading {}", p.display()))?,
                None => cfg.prior()?,
            };
            let report = run_linguistic(&cfg, &prior, &a.cover.load()?)?;
            write_report(a, &run_config(a, "linguistic", cfg), &report)
        }
        ExperimentName::Merging => {
            reject_variants(a, Variant::Fimec)?;
            reject_merge_flag(a)?;
            let mut cfg: MergingConfig = read_config(cfg_path)?;
            settle!(cfg);
            let report = run_merging(&cfg, &a.cover.load()?)?;
            write_report(a, &run_config(a, "merging", cfg), &report)
        }
        ExperimentName::Mcg => {
            let mut cfg: McgConfig = read_config(cfg_path)?;
            settle!(cfg);
            if !a.variant.is_empty() {
                cfg.variants = a.variant.clone();
            }
            if let Some(m) = a.merge.get() {
                cfg.merging = m;
            }
            let mdp = match &a.mdp {
                Some(p) => TabularMdp::load(p).with_context(|| format!("loading {}", p.display()))?,
                None => cfg.mdp()?,
            };
            let prior = match &a.prior {
                Some(p) => NgramModel::load(p).with_context(|| format!("loading {}", p.display()))?,
                None => cfg.prior()?,
            };
            let report = run_mcg_on(&cfg, &mdp, &prior)?;
            write_report(a, &run_config(a, "mcg", cfg), &report)
        }
        ExperimentName::SearchNodes => {
            reject_variants(a, Variant::Arimec)?;
            let mut cfg: SearchNodesConfig = read_config(cfg_path)?;
            settle!(cfg);
            if let Some(m) = a.merge.get() {
                cfg.merging = m;
            }
            let report = run_search_nodes(&cfg, &a.cover.load()?)?;
            write_report(a, &run_config(a, "search-nodes", cfg), &report)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Mec(a) => cmd_mec(a),
        Command::Keygen(a) => cmd_keygen(a),
        Command::StegoEncode(a) => cmd_stego_encode(a),
        Command::StegoDecode(a) => cmd_stego_decode(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
