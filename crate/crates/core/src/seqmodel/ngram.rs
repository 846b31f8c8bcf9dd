use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use super::{absorbed, Autoregressive};
use crate::error::{Error, Result};
use crate::prob::Dist;

/// Table-based k-th order Markov model.
///
/// The conditional for a prefix is looked up under its last `min(k, len)`
/// symbols. Contexts missing from the table fall back to the uniform
/// distribution, so a covertext model never assigns zero mass to a symbol
/// because of an unseen context.
///
/// File format (one record per line):
///
/// ```text
/// ngram k=<order> vocab=<size> eos=<symbol|none>
/// <symbol_0> <symbol_1> ... <symbol_{V-1}>
/// <context symbols> : <p_0> <p_1> ... <p_{V-1}>
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct NgramModel {
    order: usize,
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    eos: Option<usize>,
    table: BTreeMap<Vec<usize>, Dist>,
}

impl NgramModel {
    pub fn from_rows(
        order: usize,
        vocab: Vec<String>,
        eos: Option<usize>,
        rows: impl IntoIterator<Item = (Vec<usize>, Dist)>,
    ) -> Result<Self> {
        if vocab.is_empty() {
            return Err(Error::InvalidArgument("empty vocabulary".into()));
        }
        let mut index = HashMap::new();
        for (i, s) in vocab.iter().enumerate() {
            if s.is_empty() || s.contains(':') || s.chars().any(char::is_whitespace) {
                return Err(Error::InvalidArgument(format!("bad vocabulary symbol `{s}`")));
            }
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate symbol `{s}`")));
            }
        }
        if let Some(e) = eos {
            if e >= vocab.len() {
                return Err(Error::OutOfRange { index: e, dim: vocab.len() });
            }
        }
        let mut table = BTreeMap::new();
        for (ctx, d) in rows {
            if ctx.len() > order {
                return Err(Error::InvalidArgument(format!("context longer than order {order}")));
            }
            if let Some(&s) = ctx.iter().find(|&&s| s >= vocab.len()) {
                return Err(Error::OutOfRange { index: s, dim: vocab.len() });
            }
            if d.len() != vocab.len() {
                return Err(Error::LengthMismatch { left: d.len(), right: vocab.len() });
            }
            table.insert(ctx, d);
        }
        Ok(Self { order, vocab, index, eos, table })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[usize], &Dist)> {
        self.table.iter().map(|(c, d)| (c.as_slice(), d))
    }

    pub fn symbol_index(&self, s: &str) -> Result<usize> {
        self.index.get(s).copied().ok_or_else(|| Error::UnknownSymbol(s.to_string()))
    }

    pub fn symbol(&self, i: usize) -> Option<&str> {
        self.vocab.get(i).map(String::as_str)
    }

    /// Parse whitespace-separated symbol names into indices.
    pub fn encode_symbols(&self, text: &str) -> Result<Vec<usize>> {
        text.split_whitespace().map(|t| self.symbol_index(t)).collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (ln, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
        let mut order = None;
        let mut size = None;
        let mut eos_name: Option<Option<String>> = None;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("ngram") {
            return Err(Error::Parse { line: ln, msg: "header must start with `ngram`".into() });
        }
        for f in fields {
            let (key, value) = f
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: ln, msg: format!("malformed header field `{f}`") })?;
            let bad = |what: &str| Error::Parse { line: ln, msg: format!("bad {what} `{value}`") };
            match key {
                "k" => order = Some(value.parse::<usize>().map_err(|_| bad("order"))?),
                "vocab" => size = Some(value.parse::<usize>().map_err(|_| bad("vocab size"))?),
                "eos" => eos_name = Some((value != "none").then(|| value.to_string())),
                "fallback" if value == "uniform" => {}
                _ => return Err(Error::Parse { line: ln, msg: format!("unknown header field `{f}`") }),
            }
        }
        let missing = |what: &str| Error::Parse { line: ln, msg: format!("header lacks `{what}`") };
        let order = order.ok_or_else(|| missing("k"))?;
        let size = size.ok_or_else(|| missing("vocab"))?;
        let eos_name = eos_name.ok_or_else(|| missing("eos"))?;

        let (ln, vocab_line) = lines
            .next()
            .ok_or(Error::Parse { line: ln + 1, msg: "missing vocabulary line".into() })?;
        let vocab: Vec<String> = vocab_line.split_whitespace().map(str::to_string).collect();
        if vocab.len() != size {
            return Err(Error::Parse {
                line: ln,
                msg: format!("vocabulary lists {} symbols, header says {size}", vocab.len()),
            });
        }
        let lookup: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let eos = match eos_name {
            None => None,
            Some(name) => Some(*lookup.get(name.as_str()).ok_or(Error::Parse {
                line: 1,
                msg: format!("eos symbol `{name}` not in vocabulary"),
            })?),
        };

        let mut rows = Vec::new();
        for (ln, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (ctx_text, probs_text) = line
                .split_once(':')
                .ok_or_else(|| Error::Parse { line: ln, msg: "expected `<context> : <probs>`".into() })?;
            let ctx = ctx_text
                .split_whitespace()
                .map(|s| {
                    lookup.get(s).copied().ok_or_else(|| Error::Parse {
                        line: ln,
                        msg: format!("unknown symbol `{s}` in context"),
                    })
                })
                .collect::<Result<Vec<usize>>>()?;
            if ctx.len() > order {
                return Err(Error::Parse { line: ln, msg: format!("context longer than order {order}") });
            }
            let probs = probs_text
                .split_whitespace()
                .enumerate()
                .map(|(i, t)| {
                    t.parse::<f64>().map_err(|_| Error::Parse {
                        line: ln,
                        msg: format!("probability {i} is not a number: `{t}`"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if probs.len() != size {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("expected {size} probabilities, found {}", probs.len()),
                });
            }
            let d = Dist::new(probs).map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?;
            rows.push((ctx, d));
        }
        Self::from_rows(order, vocab, eos, rows)
    }

    /// Canonical text form; `parse(to_text())` reproduces the model.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let eos = self.eos.map_or("none", |e| self.vocab[e].as_str());
        let _ = writeln!(out, "ngram k={} vocab={} eos={}", self.order, self.vocab.len(), eos);
        let _ = writeln!(out, "{}", self.vocab.join(" "));
        for (ctx, d) in &self.table {
            let names: Vec<&str> = ctx.iter().map(|&s| self.vocab[s].as_str()).collect();
            let probs: Vec<String> = d.probs().iter().map(|p| format!("{p}")).collect();
            if names.is_empty() {
                let _ = writeln!(out, ": {}", probs.join(" "));
            } else {
                let _ = writeln!(out, "{} : {}", names.join(" "), probs.join(" "));
            }
        }
        out
    }

    /// Maximum-likelihood estimate from whitespace-tokenized lines, with
    /// additive smoothing `alpha` on observed contexts.
    pub fn fit(corpus: &str, order: usize, eos: Option<&str>, alpha: f64) -> Result<Self> {
        if alpha < 0.0 {
            return Err(Error::InvalidArgument("negative smoothing".into()));
        }
        let sentences: Vec<Vec<&str>> = corpus
            .lines()
            .map(|l| l.split_whitespace().collect::<Vec<_>>())
            .filter(|t| !t.is_empty())
            .collect();
        let mut names: Vec<String> = sentences.iter().flatten().map(|s| s.to_string()).collect();
        if let Some(e) = eos {
            names.push(e.to_string());
        }
        names.sort();
        names.dedup();
        if names.is_empty() {
            return Err(Error::InvalidArgument("empty corpus".into()));
        }
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let eos_idx = eos.map(|e| index[e]);
        let v = names.len();
        let mut counts: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
        for sent in &sentences {
            let mut seq: Vec<usize> = sent.iter().map(|s| index[*s]).collect();
            if let Some(e) = eos_idx {
                seq.push(e);
            }
            for j in 0..seq.len() {
                let ctx = seq[j.saturating_sub(order)..j].to_vec();
                counts.entry(ctx).or_insert_with(|| vec![0.0; v])[seq[j]] += 1.0;
            }
        }
        let rows = counts.into_iter().map(|(ctx, c)| {
            let w: Vec<f64> = c.iter().map(|x| x + alpha).collect();
            (ctx, Dist::from_weights(&w).expect("observed context has counts"))
        });
        Self::from_rows(order, names, eos_idx, rows)
    }
}

impl NgramModel {
    /// Synthetic model with a row for every context of length `0..=order`
    /// over symbols `t0 .. t{vocab-1}`. Row weights are `(-ln u)^sharpness`
    /// for uniform draws `u`, so larger `sharpness` gives lower entropy.
    pub fn random(order: usize, vocab: usize, seed: u64, sharpness: f64) -> Result<Self> {
        use rand::Rng;
        if vocab == 0 {
            return Err(Error::InvalidArgument("empty vocabulary".into()));
        }
        let names: Vec<String> = (0..vocab).map(|i| format!("t{i}")).collect();
        let mut rng = crate::rng::rng_from_seed(seed);
        let mut rows = Vec::new();
        let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
        for depth in 0..=order {
            for ctx in &layer {
                let w: Vec<f64> = (0..vocab)
                    .map(|_| (-rng.gen::<f64>().max(1e-300).ln()).powf(sharpness))
                    .collect();
                rows.push((ctx.clone(), Dist::from_weights(&w)?));
            }
            if depth < order {
                layer = layer
                    .iter()
                    .flat_map(|c| {
                        (0..vocab).map(move |s| {
                            let mut n = c.clone();
                            n.push(s);
                            n
                        })
                    })
                    .collect();
            }
        }
        Self::from_rows(order, names, None, rows)
    }

    /// Smallest row entropy in the table (bits).
    pub fn min_row_entropy(&self) -> f64 {
        self.table.values().map(Dist::entropy).fold(f64::INFINITY, f64::min)
    }
}

impl Autoregressive for NgramModel {
    fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    fn eos(&self) -> Option<usize> {
        self.eos
    }

    fn next_dist(&self, prefix: &[usize]) -> Dist {
        if let Some(d) = absorbed(self.vocab.len(), self.eos, prefix) {
            return d;
        }
        let start = prefix.len().saturating_sub(self.order);
        match self.table.get(&prefix[start..]) {
            Some(d) => d.clone(),
            None => Dist::uniform(self.vocab.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqmodel::sample_sequence;

    const CANONICAL: &str = "ngram k=1 vocab=3 eos=c\na b c\n: 0.5 0.25 0.25\na : 0.1 0.6 0.3\nb : 1 0 0\n";

    #[test]
    fn canonical_round_trip_is_byte_identical() {
        let m = NgramModel::parse(CANONICAL).unwrap();
        assert_eq!(m.to_text(), CANONICAL);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ngram");
        m.save(&path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), CANONICAL);
        assert_eq!(NgramModel::load(&path).unwrap(), m);
    }

    #[test]
    fn lookup_and_fallback() {
        let m = NgramModel::parse(CANONICAL).unwrap();
        assert_eq!(m.next_dist(&[]).probs(), &[0.5, 0.25, 0.25]);
        assert_eq!(m.next_dist(&[1, 0]).probs(), &[0.1, 0.6, 0.3]);
        // EOS is absorbing.
        assert_eq!(m.next_dist(&[2]).probs(), &[0.0, 0.0, 1.0]);
        let m0 = NgramModel::parse("ngram k=2 vocab=2 eos=none\nx y\nx x : 1 0\n").unwrap();
        assert_eq!(m0.next_dist(&[1, 1]).probs(), &[0.5, 0.5]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("gram k=1 vocab=1 eos=none\na\n", 1),
            ("ngram k=1 vocab=2 eos=none\na\n", 2),
            ("ngram k=1 vocab=2 eos=none\na b\na : 0.5\n", 3),
            ("ngram k=1 vocab=2 eos=none\na b\na : 0.5 0.6\n", 3),
            ("ngram k=1 vocab=2 eos=none\na b\nz : 0.5 0.5\n", 3),
            ("ngram k=1 vocab=2 eos=none\na b\n: 0.5 0.5\na b : 0.5 0.5\n", 4),
            ("ngram k=1 vocab=2 eos=none\na b\na 0.5 0.5\n", 3),
            ("ngram k=1 vocab=2 eos=none\na b\na : 0.5 x\n", 3),
        ];
        for (text, line) in cases {
            match NgramModel::parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn unknown_symbol() {
        let m = NgramModel::parse(CANONICAL).unwrap();
        assert_eq!(m.encode_symbols("a q"), Err(Error::UnknownSymbol("q".into())));
        assert_eq!(m.encode_symbols("a b").unwrap(), vec![0, 1]);
    }

    #[test]
    fn deterministic_model_samples_unique_sequence() {
        let m = NgramModel::parse("ngram k=1 vocab=3 eos=none\na b c\n: 1 0 0\na : 0 1 0\nb : 0 0 1\nc : 1 0 0\n")
            .unwrap();
        for seed in 0..5 {
            assert_eq!(sample_sequence(&m, seed, 5), vec![0, 1, 2, 0, 1]);
        }
    }

    #[test]
    fn fit_counts() {
        let m = NgramModel::fit("a b a\na a\n", 1, Some("</s>"), 0.0).unwrap();
        assert_eq!(m.vocab(), &["</s>", "a", "b"]);
        // After `a`: b once, a once, </s> twice.
        let d = m.next_dist(&[1]);
        assert_eq!(d.probs(), &[0.5, 0.25, 0.25]);
        assert_eq!(m.next_dist(&[]).probs(), &[0.0, 1.0, 0.0]);
    }
}
