//! Coding messages into the actions of a tabular MDP.
//!
//! A maximum-entropy policy is computed by soft value iteration. At every
//! step the posterior over messages is coupled with the policy's action
//! distribution in the current state, and the action is drawn from the
//! coupling given the true message. Averaged over messages the action
//! distribution is exactly the policy's, so expected return is unchanged.

mod mdp;
mod policy;

pub use mdp::TabularMdp;
pub use policy::{expected_return, soft_value_iteration, SoftPolicy};

use crate::codec::{MessageCoder, MessageSpace, Variant};
use crate::error::{Error, Result};
use crate::imec::CouplerOptions;
use crate::rng::{derive_seed, rng_from_seed, STREAM_CODER, STREAM_ENV};
use crate::seqmodel::{log_likelihood, Autoregressive};

/// Settings shared by sender and receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemeConfig {
    pub variant: Variant,
    pub merging: bool,
    pub seed: u64,
}

impl MemeConfig {
    fn options(&self) -> CouplerOptions {
        CouplerOptions {
            seed: derive_seed(self.seed, STREAM_CODER, 0),
            merging: self.merging,
            record_details: false,
        }
    }
}

/// One played episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    /// Visited states, one more than the number of actions.
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
    pub total_return: f64,
    /// Per step, the action distribution the coupling realizes when
    /// averaged over the message posterior.
    pub action_marginals: Vec<Vec<f64>>,
}

/// Play one episode whose actions carry `message`. Environment randomness
/// comes from its own stream and never depends on the message.
pub fn meme_encode<M: Autoregressive + Clone>(
    message: &[usize],
    space: &MessageSpace<M>,
    mdp: &TabularMdp,
    policy: &SoftPolicy,
    cfg: &MemeConfig,
) -> Result<(Episode, MessageCoder<M>)> {
    use rand::Rng;
    if message.len() != space.len || log_likelihood(&space.prior, message) == f64::NEG_INFINITY {
        return Err(Error::Corruption("message has zero prior probability".into()));
    }
    let mut env = rng_from_seed(derive_seed(cfg.seed, STREAM_ENV, 0));
    let mut coder = MessageCoder::new(cfg.variant, space, cfg.options())?;
    let mut s = mdp.initial().sample_with(env.gen::<f64>());
    let mut ep = Episode { states: vec![s], actions: Vec::new(), total_return: 0.0, action_marginals: Vec::new() };
    for t in 0..mdp.horizon() {
        let pi = policy.action_dist(t, s);
        let a = coder.encode_step(message, pi)?;
        let next = mdp.transition(s, a).sample_with(env.gen::<f64>());
        ep.total_return += mdp.reward(s, a, next);
        ep.action_marginals.push(coder.records()[t].marginal.clone());
        ep.actions.push(a);
        ep.states.push(next);
        s = next;
    }
    Ok((ep, coder))
}

/// Recover the message from an observed trajectory.
pub fn meme_decode<M: Autoregressive + Clone>(
    states: &[usize],
    actions: &[usize],
    space: &MessageSpace<M>,
    mdp: &TabularMdp,
    policy: &SoftPolicy,
    cfg: &MemeConfig,
) -> Result<(Vec<usize>, MessageCoder<M>)> {
    if states.len() != actions.len() + 1 {
        return Err(Error::LengthMismatch { left: states.len(), right: actions.len() + 1 });
    }
    if actions.len() > policy.horizon() {
        return Err(Error::LengthMismatch { left: actions.len(), right: policy.horizon() });
    }
    let mut coder = MessageCoder::new(cfg.variant, space, cfg.options())?;
    for (t, &a) in actions.iter().enumerate() {
        let (s, next) = (states[t], states[t + 1]);
        if s >= mdp.states() || next >= mdp.states() || a >= mdp.actions() {
            return Err(Error::Decode(format!("step {t} leaves the state or action space")));
        }
        if mdp.transition(s, a).get(next) <= 0.0 {
            return Err(Error::Decode(format!("step {t} is inconsistent with the dynamics")));
        }
        coder.decode_step(policy.action_dist(t, s), a)?;
    }
    let x = coder.map_estimate();
    Ok((x, coder))
}
