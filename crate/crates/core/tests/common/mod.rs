#![allow(dead_code)]

use std::collections::BTreeMap;

use entrocoup::prob::{greedy_mec, Dist};
use entrocoup::rng::rng_from_seed;
use entrocoup::seqmodel::Autoregressive;
use rand::Rng;
use rand_chacha::ChaCha20Rng;

/// Random distribution over `n` outcomes; with `sparse` some entries are zero.
pub fn random_dist(rng: &mut ChaCha20Rng, n: usize, sparse: bool) -> Dist {
    loop {
        let w: Vec<f64> = (0..n)
            .map(|_| {
                if sparse && rng.gen_bool(0.25) {
                    0.0
                } else {
                    rng.gen::<f64>()
                }
            })
            .collect();
        if w.iter().sum::<f64>() > 0.0 {
            return Dist::from_weights(&w).unwrap();
        }
    }
}

/// Independent positions with fixed per-position distributions.
#[derive(Debug, Clone)]
pub struct ProductSource {
    pub components: Vec<Dist>,
    pub vocab: usize,
}

impl ProductSource {
    pub fn new(components: Vec<Dist>) -> Self {
        let vocab = components.iter().map(Dist::len).max().unwrap_or(1);
        Self { components, vocab }
    }
}

impl Autoregressive for ProductSource {
    fn vocab_size(&self) -> usize {
        self.vocab
    }

    fn next_dist(&self, prefix: &[usize]) -> Dist {
        match self.components.get(prefix.len()) {
            Some(c) => {
                let mut p = c.probs().to_vec();
                p.resize(self.vocab, 0.0);
                Dist::new(p).unwrap()
            }
            None => Dist::uniform(self.vocab),
        }
    }
}

/// Explicit conditional table keyed by the full prefix.
#[derive(Debug, Clone)]
pub struct TableSource {
    pub vocab: usize,
    pub eos: Option<usize>,
    pub rows: BTreeMap<Vec<usize>, Dist>,
}

impl Autoregressive for TableSource {
    fn vocab_size(&self) -> usize {
        self.vocab
    }

    fn eos(&self) -> Option<usize> {
        self.eos
    }

    fn next_dist(&self, prefix: &[usize]) -> Dist {
        if let Some(e) = self.eos {
            if prefix.contains(&e) {
                return Dist::point(self.vocab, e);
            }
        }
        self.rows.get(prefix).cloned().unwrap_or_else(|| Dist::uniform(self.vocab))
    }
}

/// Random channel over `vocab` symbols whose rows may contain zeros.
pub fn random_table_source(seed: u64, vocab: usize, depth: usize, sparse: bool) -> TableSource {
    let mut rng = rng_from_seed(seed);
    let mut rows = BTreeMap::new();
    let mut layer = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for p in layer {
            rows.insert(p.clone(), random_dist(&mut rng, vocab, sparse));
            for s in 0..vocab {
                let mut c: Vec<usize> = p.clone();
                c.push(s);
                next.push(c);
            }
        }
        layer = next;
    }
    TableSource { vocab, eos: None, rows }
}

/// Every fixed-length message over `vocab` symbols, in lexicographic order.
pub fn all_sequences(vocab: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..vocab).map(move |s| {
                    let mut c = p.clone();
                    c.push(s);
                    c
                })
            })
            .collect();
    }
    out
}

/// Messages of a source truncated at `max_len` with their probabilities.
/// End-of-sequence terminates a message and is not part of it.
pub fn enumerate_messages<S: Autoregressive>(src: &S, max_len: usize) -> Vec<(Vec<usize>, f64)> {
    fn go<S: Autoregressive>(src: &S, max_len: usize, prefix: &mut Vec<usize>, p: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if prefix.len() == max_len {
            out.push((prefix.clone(), p));
            return;
        }
        let d = src.next_dist(prefix);
        for (a, &q) in d.probs().iter().enumerate() {
            if Some(a) == src.eos() {
                out.push((prefix.clone(), p * q));
            } else {
                prefix.push(a);
                go(src, max_len, prefix, p * q, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(src, max_len, &mut Vec::new(), 1.0, &mut out);
    out
}

pub fn sequence_prob<S: Autoregressive + ?Sized>(src: &S, y: &[usize]) -> f64 {
    (0..y.len()).map(|j| src.next_dist(&y[..j]).get(y[j])).product()
}

/// Largest deviation of the induced joint from both marginals.
/// `table[y][i] = P(y | x_i)`, `prior[i] = P(x_i)`.
pub fn marginal_gap<S: Autoregressive + ?Sized>(
    table: &BTreeMap<Vec<usize>, Vec<f64>>,
    prior: &[f64],
    channel: &S,
    m: usize,
) -> f64 {
    let mut gap: f64 = 0.0;
    let mut row_sums = vec![0.0; prior.len()];
    for (y, likes) in table {
        let joint: f64 = likes.iter().zip(prior).map(|(l, p)| l * p).sum();
        gap = gap.max((joint - sequence_prob(channel, y)).abs());
        for (i, l) in likes.iter().enumerate() {
            row_sums[i] += l * prior[i];
        }
    }
    let channel_total: f64 = all_sequences(channel.vocab_size(), m)
        .iter()
        .filter(|y| !table.contains_key(*y))
        .map(|y| sequence_prob(channel, y))
        .sum();
    gap = gap.max(channel_total);
    for (r, p) in row_sums.iter().zip(prior) {
        gap = gap.max((r - p).abs());
    }
    gap
}

/// Straight-line tabular iterative coupling: couple the full posterior with
/// the channel, sample the message's row, condition on the emitted column.
pub fn reference_tabular_encode<S: Autoregressive>(prior: &Dist, x: usize, channel: &S, m: usize, seed: u64) -> (Vec<usize>, Vec<Vec<f64>>) {
    let mut rng = rng_from_seed(seed);
    let mut post = prior.clone();
    let mut ys = Vec::new();
    let mut posts = Vec::new();
    for _ in 0..m {
        let nu = channel.next_dist(&ys);
        let c = greedy_mec(&post, &nu);
        let row: Vec<f64> = (0..nu.len()).map(|y| c.get(x, y)).collect();
        let y = inverse_cdf(&row, rng.gen::<f64>());
        post = Dist::from_weights(&c.column(y)).unwrap();
        posts.push(post.probs().to_vec());
        ys.push(y);
    }
    (ys, posts)
}

/// Straight-line factored iterative coupling over independent components.
pub fn reference_factored_encode<S: Autoregressive>(
    components: &[Dist],
    x: &[usize],
    channel: &S,
    m: usize,
    seed: u64,
) -> (Vec<usize>, Vec<Vec<Vec<f64>>>) {
    let mut rng = rng_from_seed(seed);
    let mut post: Vec<Dist> = components.to_vec();
    let mut ys = Vec::new();
    let mut posts = Vec::new();
    for _ in 0..m {
        let mut i = 0;
        for k in 1..post.len() {
            if post[k].entropy() > post[i].entropy() {
                i = k;
            }
        }
        let nu = channel.next_dist(&ys);
        let c = greedy_mec(&post[i], &nu);
        let row: Vec<f64> = (0..nu.len()).map(|y| c.get(x[i], y)).collect();
        let y = inverse_cdf(&row, rng.gen::<f64>());
        post[i] = Dist::from_weights(&c.column(y)).unwrap();
        posts.push(post.iter().map(|d| d.probs().to_vec()).collect());
        ys.push(y);
    }
    (ys, posts)
}

fn inverse_cdf(w: &[f64], u: f64) -> usize {
    let total: f64 = w.iter().sum();
    let t = u * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in w.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if t < acc {
                return i;
            }
        }
    }
    last
}

/// Eager Bayes posterior over explicitly enumerated messages, with block
/// masses recomputed from scratch for any prefix.
#[derive(Debug, Clone)]
pub struct EagerTree {
    pub messages: Vec<(Vec<usize>, f64)>,
    pub vocab: usize,
}

impl EagerTree {
    pub fn block_of(&self, prefix: &[usize], x: &[usize]) -> usize {
        let k = prefix.len();
        if x.len() < k || x[..k] != *prefix {
            self.vocab
        } else if x.len() == k {
            self.vocab + 1
        } else {
            x[k]
        }
    }

    pub fn blocks(&self, prefix: &[usize]) -> Vec<f64> {
        let mut b = vec![0.0; self.vocab + 2];
        let total: f64 = self.messages.iter().map(|m| m.1).sum();
        for (x, p) in &self.messages {
            b[self.block_of(prefix, x)] += p / total;
        }
        b
    }

    pub fn apply(&mut self, prefix: &[usize], lik: &[f64]) {
        let blocks: Vec<usize> = self.messages.iter().map(|(x, _)| self.block_of(prefix, x)).collect();
        for ((_, p), b) in self.messages.iter_mut().zip(blocks) {
            *p *= lik[b];
        }
        let total: f64 = self.messages.iter().map(|m| m.1).sum();
        for (_, p) in self.messages.iter_mut() {
            *p /= total;
        }
    }

    /// Every prefix node of the tree (all proper prefixes and messages).
    pub fn prefixes(&self, max_len: usize) -> Vec<Vec<usize>> {
        let mut set = std::collections::BTreeSet::new();
        for (x, _) in &self.messages {
            for k in 0..=x.len().min(max_len) {
                set.insert(x[..k].to_vec());
            }
        }
        set.into_iter().collect()
    }
}

pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&q| q > 0.0).map(|&q| -q * q.log2()).sum()
}

use entrocoup::codec::{channel_likelihoods, MessageCoder, MessageSpace, Variant};
use entrocoup::imec::CouplerOptions;

/// A small random coupling instance: messages of `len` tokens over `vocab`
/// symbols (at most 8 messages), a channel over at most 3 symbols, `m <= 4`.
pub struct SmallInstance {
    pub space: MessageSpace<TableSource>,
    pub channel: TableSource,
    pub m: usize,
    pub messages: Vec<Vec<usize>>,
    pub prior: Vec<f64>,
}

pub fn small_instance(seed: u64, variant: Variant) -> SmallInstance {
    let mut rng = rng_from_seed(seed);
    let shapes = [(2, 1), (2, 2), (2, 3), (3, 1), (4, 1), (5, 1), (8, 1)];
    let (vocab, len) = shapes[rng.gen_range(0..shapes.len())];
    let sparse = rng.gen_bool(0.3);
    let (prior_src, components) = if variant == Variant::Fimec {
        let comps: Vec<Dist> = (0..len).map(|_| random_dist(&mut rng, vocab, sparse)).collect();
        let mut rows = BTreeMap::new();
        for k in 0..len {
            for p in all_sequences(vocab, k) {
                rows.insert(p, comps[k].clone());
            }
        }
        (TableSource { vocab, eos: None, rows }, comps)
    } else {
        let src = random_table_source(rng.gen(), vocab, len, sparse);
        (src, vec![Dist::uniform(vocab); len])
    };
    let channel_vocab = rng.gen_range(2..=3);
    let m = rng.gen_range(1..=4);
    let channel = random_table_source(rng.gen(), channel_vocab, m, rng.gen_bool(0.3));
    let messages = all_sequences(vocab, len);
    let prior: Vec<f64> = messages.iter().map(|x| sequence_prob(&prior_src, x)).collect();
    SmallInstance {
        space: MessageSpace { prior: prior_src, len, components },
        channel,
        m,
        messages,
        prior,
    }
}

/// Largest marginal deviation of the exhaustively enumerated joint.
pub fn coupling_gap(seed: u64, variant: Variant, merging: bool) -> f64 {
    let inst = small_instance(seed, variant);
    let options = CouplerOptions { seed, merging, record_details: false };
    let coder = MessageCoder::new(variant, &inst.space, options).unwrap();
    let table = channel_likelihoods(&coder, &inst.messages, &inst.channel, inst.m).unwrap();
    marginal_gap(&table, &inst.prior, &inst.channel, inst.m)
}

use entrocoup::arimec::PrefixTreePartitionSet;
use entrocoup::imec::PartitionSet;

/// Tree shape with at most `max_nodes` prefix nodes, optionally with an
/// end-of-sequence symbol.
pub fn random_tree_shape(rng: &mut ChaCha20Rng, max_nodes: usize) -> (usize, Option<usize>, usize) {
    loop {
        let vocab: usize = rng.gen_range(2..=6);
        let eos = if rng.gen_bool(0.4) { Some(vocab - 1) } else { None };
        let branching = vocab - eos.map_or(0, |_| 1);
        let max_len = rng.gen_range(1..=8);
        let nodes: usize = (0..=max_len).map(|k| branching.pow(k as u32)).sum();
        if nodes <= max_nodes && branching >= 1 {
            return (vocab, eos, max_len);
        }
    }
}

/// A random prefix-tree instance paired with its eager oracle.
pub fn random_tree(seed: u64, max_nodes: usize) -> (PrefixTreePartitionSet<TableSource>, EagerTree, usize) {
    let mut rng = rng_from_seed(seed);
    let (vocab, eos, max_len) = random_tree_shape(&mut rng, max_nodes);
    let mut src = random_table_source(rng.gen(), vocab, max_len, rng.gen_bool(0.3));
    src.eos = eos;
    let messages = enumerate_messages(&src, max_len);
    let tree = PrefixTreePartitionSet::new(src, max_len);
    (tree, EagerTree { messages, vocab }, max_len)
}

/// Highest block entropy over every node of the tree.
pub fn exhaustive_max_entropy(tree: &mut PrefixTreePartitionSet<TableSource>, eager: &EagerTree, max_len: usize) -> f64 {
    eager
        .prefixes(max_len)
        .iter()
        .map(|p| entropy(&tree.blocks_at(p).unwrap()))
        .fold(0.0, f64::max)
}

/// Random likelihood over the blocks of a node.
pub fn random_likelihood(rng: &mut ChaCha20Rng, blocks: usize) -> Vec<f64> {
    (0..blocks).map(|_| if rng.gen_bool(0.1) { 0.0 } else { rng.gen::<f64>() + 0.01 }).collect()
}

/// Whether `node` lies on the `to` side of the edge `from -- to`.
pub fn beyond(from: &[usize], to: &[usize], node: &[usize]) -> bool {
    if to.len() > from.len() {
        node.starts_with(to)
    } else {
        !node.starts_with(from)
    }
}

pub fn select_and_check(tree: &mut PrefixTreePartitionSet<TableSource>, eager: &EagerTree, max_len: usize) -> (Vec<usize>, bool) {
    tree.set_tracing(true);
    let sel = tree.select();
    let best = exhaustive_max_entropy(tree, eager, max_len);
    let found = (sel.entropy - best).abs() <= 1e-9
        && (entropy(&eager.blocks(&sel.partition)) - best).abs() <= 1e-9;
    let trace = tree.last_trace().unwrap().clone();
    let mut sound = true;
    for pr in &trace.pruned {
        for p in eager.prefixes(max_len) {
            if beyond(&pr.from, &pr.to, &p) && entropy(&eager.blocks(&p)) > pr.bound + 1e-9 {
                sound = false;
            }
        }
    }
    (sel.partition, found && sound)
}
