use super::TabularMdp;
use crate::error::{Error, Result};
use crate::prob::Dist;

/// Time-dependent stochastic policy from soft value iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftPolicy {
    alpha: f64,
    /// `rows[t][s]` is the action distribution at step `t` in state `s`.
    rows: Vec<Vec<Dist>>,
    /// `values[t][s]` is the soft value at step `t`.
    values: Vec<Vec<f64>>,
}

impl SoftPolicy {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn action_dist(&self, t: usize, s: usize) -> &Dist {
        &self.rows[t][s]
    }

    pub fn value(&self, t: usize, s: usize) -> f64 {
        self.values[t][s]
    }

    pub fn horizon(&self) -> usize {
        self.rows.len()
    }
}

/// Finite-horizon soft Bellman backups with temperature `alpha` (reward
/// units per nat):
/// `Q_t(s,a) = sum_s' T(s'|s,a) (R(s,a,s') + V_{t+1}(s'))`,
/// `V_t(s) = alpha ln sum_a exp(Q_t(s,a) / alpha)`,
/// `pi_t(a|s) = exp((Q_t(s,a) - V_t(s)) / alpha)`.
pub fn soft_value_iteration(mdp: &TabularMdp, alpha: f64) -> Result<SoftPolicy> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("temperature must be positive, got {alpha}")));
    }
    let (ns, na, h) = (mdp.states(), mdp.actions(), mdp.horizon());
    let mut rows = vec![Vec::new(); h];
    let mut values = vec![vec![0.0; ns]; h + 1];
    for t in (0..h).rev() {
        for s in 0..ns {
            let q: Vec<f64> = (0..na)
                .map(|a| {
                    mdp.transition(s, a)
                        .probs()
                        .iter()
                        .enumerate()
                        .filter(|(_, &p)| p > 0.0)
                        .map(|(n, &p)| p * (mdp.reward(s, a, n) + values[t + 1][n]))
                        .sum()
                })
                .collect();
            let top = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = q.iter().map(|v| ((v - top) / alpha).exp()).sum();
            values[t][s] = top + alpha * z.ln();
            let w: Vec<f64> = q.iter().map(|v| ((v - values[t][s]) / alpha).exp()).collect();
            rows[t].push(Dist::from_weights(&w)?);
        }
    }
    values.truncate(h);
    Ok(SoftPolicy { alpha, rows, values })
}

/// Exact expected total reward of following `policy` from the initial
/// state distribution.
pub fn expected_return(mdp: &TabularMdp, policy: &SoftPolicy) -> f64 {
    let mut occ = mdp.initial().probs().to_vec();
    let mut total = 0.0;
    for t in 0..mdp.horizon() {
        let mut next = vec![0.0; mdp.states()];
        for (s, &w) in occ.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (a, &pa) in policy.action_dist(t, s).probs().iter().enumerate() {
                for (n, &pn) in mdp.transition(s, a).probs().iter().enumerate() {
                    let m = w * pa * pn;
                    total += m * mdp.reward(s, a, n);
                    next[n] += m;
                }
            }
        }
        occ = next;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_softmax() {
        let mdp = TabularMdp::bandit(vec![1.0, 0.0], 1).unwrap();
        let p = soft_value_iteration(&mdp, 1.0).unwrap();
        let want = 1.0f64.exp() / (1.0f64.exp() + 1.0);
        assert!((p.action_dist(0, 0).get(0) - want).abs() < 1e-12);
        assert!((p.action_dist(0, 0).get(0) - 0.731).abs() < 1e-3);
    }

    #[test]
    fn equal_rewards_give_uniform_policy() {
        let mdp = TabularMdp::bandit(vec![0.5; 3], 4).unwrap();
        let p = soft_value_iteration(&mdp, 0.7).unwrap();
        for t in 0..4 {
            for &q in p.action_dist(t, 0).probs() {
                assert!((q - 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn low_temperature_is_nearly_greedy() {
        let mdp = TabularMdp::bandit(vec![1.0, 0.0], 1).unwrap();
        let p = soft_value_iteration(&mdp, 1e-4).unwrap();
        assert!(p.action_dist(0, 0).get(0) >= 0.999);
        assert!(soft_value_iteration(&mdp, 0.0).is_err());
        assert!(soft_value_iteration(&mdp, -1.0).is_err());
    }

    #[test]
    fn expected_return_of_bandit() {
        let mdp = TabularMdp::bandit(vec![1.0, 0.0], 3).unwrap();
        let p = soft_value_iteration(&mdp, 1.0).unwrap();
        let want = 3.0 * p.action_dist(0, 0).get(0);
        assert!((expected_return(&mdp, &p) - want).abs() < 1e-12);
    }
}
