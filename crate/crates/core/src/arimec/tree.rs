use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use super::entropy_upper_bound;
use crate::error::{Error, Result};
use crate::imec::{PartitionSet, Selection};
use crate::prob::{entropy_of, Dist};
use crate::seqmodel::Autoregressive;

#[derive(Debug, Clone)]
struct Node {
    prefix: Vec<usize>,
    parent: Option<usize>,
    children: BTreeMap<usize, usize>,
    blocks: Vec<f64>,
    stamp: u64,
}

/// A neighbor direction the search skipped, with the entropy bound that
/// justified skipping every node on that side of the edge.
#[derive(Debug, Clone, PartialEq)]
pub struct PrunedDirection {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
    pub bound: f64,
}

/// What one maximum-entropy search looked at.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchTrace {
    pub start: Vec<usize>,
    pub evaluated: Vec<(Vec<usize>, f64)>,
    pub pruned: Vec<PrunedDirection>,
    pub best: Vec<usize>,
}

/// Rescale a node's blocks after its neighbor learned new evidence.
///
/// `toward` is the node's block containing the neighbor and `q` is the
/// neighbor's current mass for its own block containing this node. The two
/// blocks are complements, so `toward` gets `1 - q` and the remaining blocks
/// keep their relative sizes while summing to `q`.
pub fn propagate_blocks(old: &[f64], toward: usize, q: f64) -> Vec<f64> {
    let q = q.clamp(0.0, 1.0);
    let other: f64 = old.iter().enumerate().filter(|&(i, _)| i != toward).map(|(_, p)| p).sum();
    let mut out = vec![0.0; old.len()];
    if other > 0.0 {
        let scale = q / other;
        for (i, &p) in old.iter().enumerate() {
            if i != toward {
                out[i] = p * scale;
            }
        }
        out[toward] = 1.0 - q;
    } else {
        out[toward] = 1.0;
    }
    out
}

/// Prefix-tree partition set over messages of at most `max_len` symbols.
///
/// Block layout of every node: indices `0..vocab` are the child blocks,
/// `vocab` is "does not extend this prefix" and `vocab + 1` is "equals this
/// prefix". A message ends either at an end-of-sequence symbol of the prior
/// (which is never part of the message itself) or at `max_len`.
#[derive(Debug, Clone)]
pub struct PrefixTreePartitionSet<M> {
    mu: M,
    vocab: usize,
    eos: Option<usize>,
    max_len: usize,
    kappa: usize,
    nodes: Vec<Node>,
    index: HashMap<Vec<usize>, usize>,
    version: u64,
    anchor: usize,
    beam_width: usize,
    tracing: bool,
    trace: Option<SearchTrace>,
}

pub fn prefix_tree_partition_set<M: Autoregressive>(mu: M, max_len: usize) -> PrefixTreePartitionSet<M> {
    PrefixTreePartitionSet::new(mu, max_len)
}

impl<M: Autoregressive> PrefixTreePartitionSet<M> {
    pub fn new(mu: M, max_len: usize) -> Self {
        let vocab = mu.vocab_size();
        let eos = mu.eos();
        let mut s = Self {
            mu,
            vocab,
            eos,
            max_len,
            kappa: vocab + 2,
            nodes: Vec::new(),
            index: HashMap::new(),
            version: 0,
            anchor: 0,
            beam_width: 1,
            tracing: false,
            trace: None,
        };
        let blocks = s.prior_blocks(&[], 1.0);
        s.push_node(Vec::new(), None, blocks);
        s
    }

    /// Keep this many candidate prefixes in the point estimate. One means
    /// greedy descent.
    pub fn with_beam_width(mut self, width: usize) -> Self {
        self.beam_width = width.max(1);
        self
    }

    /// Record a [`SearchTrace`] for every search.
    pub fn set_tracing(&mut self, on: bool) {
        self.tracing = on;
        if !on {
            self.trace = None;
        }
    }

    pub fn last_trace(&self) -> Option<&SearchTrace> {
        self.trace.as_ref()
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn vocab(&self) -> usize {
        self.vocab
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn not_block(&self) -> usize {
        self.vocab
    }

    pub fn eq_block(&self) -> usize {
        self.vocab + 1
    }

    pub fn model(&self) -> &M {
        &self.mu
    }

    /// Prefix of the node where evidence was last applied.
    pub fn working_prefix(&self) -> &[usize] {
        &self.nodes[self.anchor].prefix
    }

    pub fn materialized(&self) -> usize {
        self.nodes.len()
    }

    pub fn materialized_prefixes(&self) -> Vec<Vec<usize>> {
        self.nodes.iter().map(|n| n.prefix.clone()).collect()
    }

    pub fn is_materialized(&self, prefix: &[usize]) -> bool {
        self.index.contains_key(prefix)
    }

    fn push_node(&mut self, prefix: Vec<usize>, parent: Option<usize>, blocks: Vec<f64>) -> usize {
        let id = self.nodes.len();
        if let (Some(p), Some(&a)) = (parent, prefix.last()) {
            self.nodes[p].children.insert(a, id);
        }
        self.index.insert(prefix.clone(), id);
        self.nodes.push(Node { prefix, parent, children: BTreeMap::new(), blocks, stamp: self.version });
        id
    }

    /// Blocks of `prefix` when the extensions of `prefix` carry `mass` and
    /// their relative weights are still those of the prior.
    fn prior_blocks(&self, prefix: &[usize], mass: f64) -> Vec<f64> {
        let mut b = vec![0.0; self.vocab + 2];
        b[self.vocab] = (1.0 - mass).max(0.0);
        if mass <= 0.0 {
            return b;
        }
        if prefix.len() >= self.max_len {
            b[self.vocab + 1] = mass;
            return b;
        }
        let d = self.mu.next_dist(prefix);
        for (a, &p) in d.probs().iter().enumerate() {
            if Some(a) == self.eos {
                b[self.vocab + 1] = mass * p;
            } else {
                b[a] = mass * p;
            }
        }
        b
    }

    /// Update node `n` from its current neighbor `p`.
    fn refresh_from(&mut self, n: usize, p: usize) {
        let (toward, q) = if self.nodes[n].parent == Some(p) {
            let a = *self.nodes[n].prefix.last().expect("non-root node");
            (self.vocab, self.nodes[p].blocks[a])
        } else {
            let a = *self.nodes[p].prefix.last().expect("child has a symbol");
            (a, self.nodes[p].blocks[self.vocab])
        };
        let fresh = propagate_blocks(&self.nodes[n].blocks, toward, q);
        let node = &mut self.nodes[n];
        node.blocks = fresh;
        node.stamp = self.version;
    }

    /// Bring node `n` up to date by walking from the evidence anchor.
    fn ensure_current(&mut self, n: usize) {
        if self.nodes[n].stamp == self.version {
            return;
        }
        let target = self.nodes[n].prefix.clone();
        let from = self.anchor;
        let common = self.nodes[from]
            .prefix
            .iter()
            .zip(&target)
            .take_while(|(a, b)| a == b)
            .count();
        let mut path = vec![from];
        let mut cur = from;
        while self.nodes[cur].prefix.len() > common {
            cur = self.nodes[cur].parent.expect("deeper than the common ancestor");
            path.push(cur);
        }
        for &a in &target[common..] {
            cur = self.nodes[cur].children[&a];
            path.push(cur);
        }
        for w in path.windows(2) {
            if self.nodes[w[1]].stamp != self.version {
                self.refresh_from(w[1], w[0]);
            }
        }
    }

    /// Child `a` of current node `n`, materializing it if needed.
    fn child_of(&mut self, n: usize, a: usize) -> usize {
        if let Some(&c) = self.nodes[n].children.get(&a) {
            if self.nodes[c].stamp != self.version {
                self.refresh_from(c, n);
            }
            return c;
        }
        let mut prefix = self.nodes[n].prefix.clone();
        prefix.push(a);
        let blocks = self.prior_blocks(&prefix, self.nodes[n].blocks[a]);
        self.push_node(prefix, Some(n), blocks)
    }

    fn check_prefix(&self, prefix: &[usize]) -> Result<()> {
        if prefix.len() > self.max_len {
            return Err(Error::LengthMismatch { left: prefix.len(), right: self.max_len });
        }
        for &a in prefix {
            if a >= self.vocab {
                return Err(Error::OutOfRange { index: a, dim: self.vocab });
            }
            if Some(a) == self.eos {
                return Err(Error::InvalidArgument("end-of-sequence symbol inside a message".into()));
            }
        }
        Ok(())
    }

    fn node_for(&mut self, prefix: &[usize]) -> usize {
        let mut n = 0;
        self.ensure_current(n);
        for &a in prefix {
            n = self.child_of(n, a);
        }
        n
    }

    /// Current block posterior of any prefix, materialized or not. Does not
    /// materialize new nodes.
    pub fn blocks_at(&mut self, prefix: &[usize]) -> Result<Vec<f64>> {
        self.check_prefix(prefix)?;
        let mut n = 0;
        self.ensure_current(0);
        for (i, &a) in prefix.iter().enumerate() {
            match self.nodes[n].children.get(&a) {
                Some(&c) => {
                    self.ensure_current(c);
                    n = c;
                }
                None => {
                    let mut blocks = self.nodes[n].blocks.clone();
                    for j in i..prefix.len() {
                        blocks = self.prior_blocks(&prefix[..=j], blocks[prefix[j]]);
                    }
                    return Ok(blocks);
                }
            }
        }
        Ok(self.nodes[n].blocks.clone())
    }

    /// Multiply every block of `prefix` by `likelihood` and renormalize,
    /// making `prefix` the working node.
    pub fn apply_likelihood(&mut self, prefix: &[usize], likelihood: &[f64]) -> Result<()> {
        self.check_prefix(prefix)?;
        if likelihood.len() != self.vocab + 2 {
            return Err(Error::LengthMismatch { left: likelihood.len(), right: self.vocab + 2 });
        }
        let n = self.node_for(prefix);
        let joint: Vec<f64> = self.nodes[n].blocks.iter().zip(likelihood).map(|(b, l)| b * l).collect();
        self.set_blocks(n, &joint)
    }

    fn set_blocks(&mut self, n: usize, joint: &[f64]) -> Result<()> {
        let fresh = Dist::from_weights(joint)?.into_probs();
        self.version += 1;
        let node = &mut self.nodes[n];
        node.blocks = fresh;
        node.stamp = self.version;
        self.anchor = n;
        Ok(())
    }

    fn better(&self, h: f64, n: usize, best_h: f64, best: usize) -> bool {
        if h != best_h {
            return h > best_h;
        }
        let (a, b) = (&self.nodes[n].prefix, &self.nodes[best].prefix);
        (a.len(), a) < (b.len(), b)
    }

    fn search(&mut self) -> (usize, f64, usize) {
        let start = self.anchor;
        self.ensure_current(start);
        let mut best = start;
        let mut best_h = entropy_of(&self.nodes[start].blocks);
        let mut touched = 1;
        let mut trace = self.tracing.then(|| SearchTrace {
            start: self.nodes[start].prefix.clone(),
            evaluated: vec![(self.nodes[start].prefix.clone(), best_h)],
            ..SearchTrace::default()
        });
        let mut visited = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        let floor = 1.0 / self.kappa as f64;
        while let Some(u) = queue.pop_front() {
            let mut moves: Vec<(Option<usize>, f64)> = Vec::new();
            if let Some(p) = self.nodes[u].parent {
                if !visited.contains(&p) {
                    moves.push((None, self.nodes[u].blocks[self.vocab]));
                }
            }
            if self.nodes[u].prefix.len() < self.max_len {
                for a in 0..self.vocab {
                    let q = self.nodes[u].blocks[a];
                    let seen = self.nodes[u].children.get(&a).is_some_and(|c| visited.contains(c));
                    if q > 0.0 && !seen {
                        moves.push((Some(a), q));
                    }
                }
            }
            for (dir, q) in moves {
                // Every partition on the far side of this edge has a block
                // with mass at least 1 - q.
                let c = 1.0 - q;
                let bound = if c < floor {
                    None
                } else {
                    Some(entropy_upper_bound(c, self.kappa).unwrap_or(f64::INFINITY))
                };
                if let Some(bound) = bound.filter(|&b| b <= best_h) {
                    if let Some(t) = trace.as_mut() {
                        let mut to = self.nodes[u].prefix.clone();
                        match dir {
                            None => {
                                to.pop();
                            }
                            Some(a) => to.push(a),
                        }
                        t.pruned.push(PrunedDirection { from: self.nodes[u].prefix.clone(), to, bound });
                    }
                    continue;
                }
                let v = match dir {
                    None => {
                        let p = self.nodes[u].parent.expect("checked above");
                        if self.nodes[p].stamp != self.version {
                            self.refresh_from(p, u);
                        }
                        p
                    }
                    Some(a) => self.child_of(u, a),
                };
                touched += 1;
                let h = entropy_of(&self.nodes[v].blocks);
                if let Some(t) = trace.as_mut() {
                    t.evaluated.push((self.nodes[v].prefix.clone(), h));
                }
                if self.better(h, v, best_h, best) {
                    best = v;
                    best_h = h;
                }
                visited.insert(v);
                queue.push_back(v);
            }
        }
        if let Some(mut t) = trace {
            t.best = self.nodes[best].prefix.clone();
            self.trace = Some(t);
        }
        (best, best_h, touched)
    }

    fn greedy_map(&mut self) -> Vec<usize> {
        let eq = self.vocab + 1;
        let mut prefix = Vec::new();
        loop {
            let blocks = self.blocks_at(&prefix).expect("prefix built from valid symbols");
            let mut pick = 0;
            for i in (0..self.vocab).chain([eq]) {
                if blocks[i] > blocks[pick] {
                    pick = i;
                }
            }
            if pick == eq || prefix.len() >= self.max_len {
                return prefix;
            }
            prefix.push(pick);
        }
    }

    /// Beam search with branch-and-bound: the mass of a prefix's extension
    /// block bounds the posterior of every message below it.
    fn beam_map(&mut self) -> Vec<usize> {
        let eq = self.vocab + 1;
        let mut best: (f64, Vec<usize>) = (-1.0, Vec::new());
        let mut beam: Vec<Vec<usize>> = vec![Vec::new()];
        while !beam.is_empty() {
            let mut next: Vec<(f64, Vec<usize>)> = Vec::new();
            for p in beam {
                let blocks = self.blocks_at(&p).expect("prefix built from valid symbols");
                if blocks[eq] > best.0 {
                    best = (blocks[eq], p.clone());
                }
                if p.len() < self.max_len {
                    for a in 0..self.vocab {
                        if blocks[a] > 0.0 {
                            let mut c = p.clone();
                            c.push(a);
                            next.push((blocks[a], c));
                        }
                    }
                }
            }
            next.retain(|(m, _)| *m > best.0);
            next.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
            next.truncate(self.beam_width);
            beam = next.into_iter().map(|(_, p)| p).collect();
        }
        best.1
    }
}

impl<M: Autoregressive> PartitionSet for PrefixTreePartitionSet<M> {
    type Outcome = Vec<usize>;
    type PartitionId = Vec<usize>;

    fn select(&mut self) -> Selection<Vec<usize>> {
        let (n, h, touched) = self.search();
        Selection {
            partition: self.nodes[n].prefix.clone(),
            blocks: Dist::from_weights(&self.nodes[n].blocks).expect("node blocks form a distribution"),
            entropy: h,
            nodes_touched: touched,
        }
    }

    fn block_of(&self, partition: &Vec<usize>, x: &Vec<usize>) -> usize {
        let k = partition.len();
        if x.len() < k || x[..k] != partition[..] {
            self.vocab
        } else if x.len() == k {
            self.vocab + 1
        } else {
            x[k]
        }
    }

    fn apply_evidence(&mut self, partition: &Vec<usize>, joint: &[f64]) -> Result<()> {
        if joint.len() != self.vocab + 2 {
            return Err(Error::LengthMismatch { left: joint.len(), right: self.vocab + 2 });
        }
        let n = match self.index.get(partition) {
            Some(&n) => {
                self.ensure_current(n);
                n
            }
            None => {
                self.check_prefix(partition)?;
                self.node_for(partition)
            }
        };
        self.set_blocks(n, joint)
    }

    fn map_estimate(&mut self) -> Vec<usize> {
        if self.beam_width <= 1 {
            self.greedy_map()
        } else {
            self.beam_map()
        }
    }

    fn posterior_of(&mut self, x: &Vec<usize>) -> f64 {
        match self.blocks_at(x) {
            Ok(b) => b[self.vocab + 1],
            Err(_) => 0.0,
        }
    }

    fn validate(&self, x: &Vec<usize>) -> Result<()> {
        self.check_prefix(x)
    }
}
