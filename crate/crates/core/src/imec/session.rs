use rand::Rng;
use rand_chacha::ChaCha20Rng;

use super::PartitionSet;
use crate::error::{Error, Result};
use crate::merging::column_groups;
use crate::prob::{greedy_mec, Dist, SparseCoupling};
use crate::rng::rng_from_seed;
use crate::seqmodel::Autoregressive;

/// Per-session switches. Encode and decode must use equal options.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CouplerOptions {
    pub seed: u64,
    pub merging: bool,
    /// Keep every intermediate coupling in the step records.
    pub record_details: bool,
}

/// Intermediate objects of one step, one entry per coupling level.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDetail {
    pub blocks: Vec<Dist>,
    pub nus: Vec<Dist>,
    pub couplings: Vec<SparseCoupling>,
}

/// Summary of one emitted symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub symbol: usize,
    /// Couplings performed for this symbol; more than one only with merging.
    pub levels: usize,
    /// Entropy of the block posterior chosen at the first level.
    pub partition_entropy: f64,
    pub coupling_entropy: f64,
    pub nodes_touched: usize,
    /// `log2 P(symbol | message, earlier symbols)` when the message is known.
    pub log2_prob: Option<f64>,
    /// Column sums of the first-level coupling: the symbol distribution the
    /// coupling realizes when averaged over the message posterior.
    pub marginal: Vec<f64>,
    pub detail: Option<StepDetail>,
}

enum Role<'a, O> {
    Encode(&'a O),
    Decode { y: usize, tracked: Option<&'a O> },
}

/// One in-progress encode or decode run over a partition set.
///
/// The encoder draws one uniform variate per coupling level from a seeded
/// ChaCha20 stream; the decoder never draws, so it replays the encoder's
/// partition choices and couplings exactly from the observed symbols.
#[derive(Debug, Clone)]
pub struct Coupler<P: PartitionSet> {
    partitions: P,
    options: CouplerOptions,
    rng: ChaCha20Rng,
    emitted: Vec<usize>,
    records: Vec<StepRecord>,
}

impl<P: PartitionSet> Coupler<P> {
    pub fn new(partitions: P, options: CouplerOptions) -> Self {
        Self {
            partitions,
            rng: rng_from_seed(options.seed),
            options,
            emitted: Vec::new(),
            records: Vec::new(),
        }
    }

    pub fn options(&self) -> CouplerOptions {
        self.options
    }

    pub fn emitted(&self) -> &[usize] {
        &self.emitted
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn partitions(&self) -> &P {
        &self.partitions
    }

    pub fn partitions_mut(&mut self) -> &mut P {
        &mut self.partitions
    }

    pub fn into_partitions(self) -> P {
        self.partitions
    }

    pub fn map_estimate(&mut self) -> P::Outcome {
        self.partitions.map_estimate()
    }

    /// Emit the next symbol for message `x` given the channel's next-symbol
    /// distribution `nu`.
    pub fn encode_step(&mut self, x: &P::Outcome, nu: &Dist) -> Result<usize> {
        self.partitions.validate(x)?;
        self.step(nu, Role::Encode(x))
    }

    /// Condition on an observed symbol.
    pub fn decode_step(&mut self, nu: &Dist, y: usize) -> Result<()> {
        self.step(nu, Role::Decode { y, tracked: None }).map(|_| ())
    }

    /// Condition on an observed symbol and return the probability the
    /// encoder would have emitted it for message `x`.
    pub fn observe_step(&mut self, nu: &Dist, y: usize, x: &P::Outcome) -> Result<f64> {
        self.partitions.validate(x)?;
        self.step(nu, Role::Decode { y, tracked: Some(x) })?;
        let lp = self.records.last().and_then(|r| r.log2_prob).unwrap_or(f64::NEG_INFINITY);
        Ok(lp.exp2())
    }

    /// Emit `m` symbols, drawing the channel distribution from `channel`.
    pub fn encode_sequence<S: Autoregressive + ?Sized>(
        &mut self,
        x: &P::Outcome,
        channel: &S,
        m: usize,
    ) -> Result<Vec<usize>> {
        let start = self.emitted.len();
        for _ in 0..m {
            let nu = channel.next_dist(&self.emitted);
            self.encode_step(x, &nu)?;
        }
        Ok(self.emitted[start..].to_vec())
    }

    pub fn decode_sequence<S: Autoregressive + ?Sized>(&mut self, y: &[usize], channel: &S) -> Result<()> {
        for &s in y {
            let nu = channel.next_dist(&self.emitted);
            self.decode_step(&nu, s)?;
        }
        Ok(())
    }

    fn step(&mut self, nu: &Dist, role: Role<'_, P::Outcome>) -> Result<usize> {
        if let Role::Decode { y, .. } = role {
            if y >= nu.len() {
                return Err(Error::OutOfRange { index: y, dim: nu.len() });
            }
        }
        let mut nu_level = nu.clone();
        let mut log2_prob = 0.0;
        let mut nodes_touched = 0;
        let mut first: Option<(f64, f64, Vec<f64>)> = None;
        let mut detail = self.options.record_details.then(|| StepDetail {
            blocks: Vec::new(),
            nus: Vec::new(),
            couplings: Vec::new(),
        });
        let mut levels = 0;
        loop {
            levels += 1;
            if levels > nu.len() {
                return Err(Error::Invariant(format!(
                    "merging recursion exceeded alphabet size {}",
                    nu.len()
                )));
            }
            let sel = self.partitions.select();
            nodes_touched += sel.nodes_touched;
            // Greedy MEC ignores blocks below the pruning threshold, so
            // negligible blocks simply receive no mass in the coupling.
            let coupling = greedy_mec(&sel.blocks, &nu_level);
            if first.is_none() {
                first = Some((sel.entropy, coupling.entropy(), coupling.col_marginal()));
            }
            let groups = column_groups(&coupling, self.options.merging);
            let mut group_of = vec![usize::MAX; nu_level.len()];
            for (g, members) in groups.iter().enumerate() {
                for &s in members {
                    group_of[s] = g;
                }
            }

            let known = match role {
                Role::Encode(x) => Some(x),
                Role::Decode { tracked, .. } => tracked,
            };
            let row_weights = known.map(|x| {
                let b = self.partitions.block_of(&sel.partition, x);
                let mut w = vec![0.0; groups.len()];
                for (s, p) in coupling.row(b) {
                    w[group_of[s]] += p;
                }
                w
            });

            let chosen = match role {
                Role::Encode(_) => {
                    let w = row_weights.as_ref().expect("encoder knows the message");
                    let total: f64 = w.iter().sum();
                    if total <= 0.0 {
                        return Err(Error::Corruption(
                            "message block has zero posterior mass".into(),
                        ));
                    }
                    let u: f64 = self.rng.gen();
                    crate::prob::sample_index(w, u)
                }
                Role::Decode { y, .. } => {
                    let g = group_of[y];
                    if g == usize::MAX {
                        return Err(Error::Decode(format!("symbol {y} has zero probability")));
                    }
                    g
                }
            };
            if let Some(w) = &row_weights {
                let total: f64 = w.iter().sum();
                log2_prob += if total > 0.0 { (w[chosen] / total).log2() } else { f64::NEG_INFINITY };
            }

            let members = &groups[chosen];
            let mut joint = vec![0.0; coupling.rows()];
            for (b, s, p) in coupling.iter() {
                if group_of[s] == chosen {
                    joint[b] += p;
                }
            }
            self.partitions.apply_evidence(&sel.partition, &joint)?;
            if let Some(d) = detail.as_mut() {
                d.blocks.push(sel.blocks.clone());
                d.nus.push(nu_level.clone());
                d.couplings.push(coupling.clone());
            }

            if members.len() == 1 {
                let symbol = members[0];
                let (partition_entropy, coupling_entropy, marginal) = first.expect("set on first level");
                let known = matches!(role, Role::Encode(_) | Role::Decode { tracked: Some(_), .. });
                self.emitted.push(symbol);
                self.records.push(StepRecord {
                    symbol,
                    levels,
                    partition_entropy,
                    coupling_entropy,
                    nodes_touched,
                    log2_prob: known.then_some(log2_prob),
                    marginal,
                    detail,
                });
                return Ok(symbol);
            }
            nu_level = nu_level.restrict(members)?;
        }
    }
}

/// Encode `x` into `m` channel symbols, returning the finished session.
pub fn imec_encode<P: PartitionSet, S: Autoregressive + ?Sized>(
    partitions: P,
    x: &P::Outcome,
    channel: &S,
    m: usize,
    options: CouplerOptions,
) -> Result<Coupler<P>> {
    let mut session = Coupler::new(partitions, options);
    session.encode_sequence(x, channel, m)?;
    Ok(session)
}

/// Decode an observed sequence, returning the point estimate and the session
/// holding the posterior.
pub fn imec_decode<P: PartitionSet, S: Autoregressive + ?Sized>(
    partitions: P,
    y: &[usize],
    channel: &S,
    options: CouplerOptions,
) -> Result<(P::Outcome, Coupler<P>)> {
    let mut session = Coupler::new(partitions, options);
    session.decode_sequence(y, channel)?;
    let x = session.map_estimate();
    Ok((x, session))
}
