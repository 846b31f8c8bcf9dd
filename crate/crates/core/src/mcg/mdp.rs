use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::Dist;

/// On-disk layout of an MDP file (TOML).
///
/// ```toml
/// states = 2
/// actions = 2
/// horizon = 3
/// initial = [1.0, 0.0]
/// transitions = [[[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0]]]   # [s][a][s']
/// rewards = [[[0.0, 1.0], [0.0, 1.0]], [[0.0, 1.0], [0.0, 1.0]]]       # [s][a][s']
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MdpFile {
    states: usize,
    actions: usize,
    horizon: usize,
    initial: Vec<f64>,
    transitions: Vec<Vec<Vec<f64>>>,
    rewards: Vec<Vec<Vec<f64>>>,
}

/// Finite-horizon tabular Markov decision process.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    states: usize,
    actions: usize,
    horizon: usize,
    initial: Dist,
    transitions: Vec<Vec<Dist>>,
    rewards: Vec<Vec<Vec<f64>>>,
}

impl TabularMdp {
    pub fn new(
        initial: Dist,
        transitions: Vec<Vec<Dist>>,
        rewards: Vec<Vec<Vec<f64>>>,
        horizon: usize,
    ) -> Result<Self> {
        let states = initial.len();
        if transitions.len() != states || rewards.len() != states {
            return Err(Error::InvalidArgument("transition or reward table has the wrong state count".into()));
        }
        let actions = transitions.first().map_or(0, Vec::len);
        if actions == 0 {
            return Err(Error::InvalidArgument("an MDP needs at least one action".into()));
        }
        for s in 0..states {
            if transitions[s].len() != actions || rewards[s].len() != actions {
                return Err(Error::InvalidArgument(format!("state {s} has the wrong action count")));
            }
            for a in 0..actions {
                if transitions[s][a].len() != states || rewards[s][a].len() != states {
                    return Err(Error::InvalidArgument(format!("row ({s}, {a}) has the wrong length")));
                }
                if rewards[s][a].iter().any(|r| !r.is_finite()) {
                    return Err(Error::InvalidArgument(format!("non-finite reward in row ({s}, {a})")));
                }
            }
        }
        Ok(Self { states, actions, horizon, initial, transitions, rewards })
    }

    /// Chain of `n` states starting at the left end. Action 1 moves right
    /// (staying put with probability `slip`), action 0 moves left. Entering
    /// the right end pays 1.
    pub fn chain(n: usize, horizon: usize, slip: f64) -> Result<Self> {
        if n < 2 || !(0.0..=1.0).contains(&slip) {
            return Err(Error::InvalidArgument("chain needs n >= 2 and slip in [0, 1]".into()));
        }
        let mut transitions = Vec::with_capacity(n);
        let mut rewards = Vec::with_capacity(n);
        for s in 0..n {
            let left = s.saturating_sub(1);
            let right = (s + 1).min(n - 1);
            let mut l = vec![0.0; n];
            l[left] = 1.0;
            let mut r = vec![0.0; n];
            r[right] += 1.0 - slip;
            r[s] += slip;
            transitions.push(vec![Dist::new(l)?, Dist::new(r)?]);
            let mut pay = vec![0.0; n];
            pay[n - 1] = 1.0;
            rewards.push(vec![pay.clone(), pay]);
        }
        Self::new(Dist::point(n, 0), transitions, rewards, horizon)
    }

    /// One state, one reward per action.
    pub fn bandit(rewards: Vec<f64>, horizon: usize) -> Result<Self> {
        let k = rewards.len();
        let transitions = vec![vec![Dist::point(1, 0); k]];
        let rewards = vec![rewards.into_iter().map(|r| vec![r]).collect()];
        Self::new(Dist::point(1, 0), transitions, rewards, horizon)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f: MdpFile = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map_or(0, |s| text[..s.start].lines().count().max(1)),
            msg: e.message().to_string(),
        })?;
        if f.initial.len() != f.states || f.transitions.len() != f.states {
            return Err(Error::InvalidArgument(format!("file declares {} states", f.states)));
        }
        if f.transitions.first().map_or(0, Vec::len) != f.actions {
            return Err(Error::InvalidArgument(format!("file declares {} actions", f.actions)));
        }
        let transitions = f
            .transitions
            .into_iter()
            .map(|row| row.into_iter().map(Dist::new).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(Dist::new(f.initial)?, transitions, f.rewards, f.horizon)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        let f = MdpFile {
            states: self.states,
            actions: self.actions,
            horizon: self.horizon,
            initial: self.initial.probs().to_vec(),
            transitions: self
                .transitions
                .iter()
                .map(|row| row.iter().map(|d| d.probs().to_vec()).collect())
                .collect(),
            rewards: self.rewards.clone(),
        };
        toml::to_string(&f).expect("plain numeric tables serialize")
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn initial(&self) -> &Dist {
        &self.initial
    }

    pub fn transition(&self, s: usize, a: usize) -> &Dist {
        &self.transitions[s][a]
    }

    pub fn reward(&self, s: usize, a: usize, next: usize) -> f64 {
        self.rewards[s][a][next]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let m = TabularMdp::chain(3, 4, 0.1).unwrap();
        let back = TabularMdp::parse(&m.to_toml()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_bad_rows() {
        let text = "states = 1\nactions = 1\nhorizon = 1\ninitial = [1.0]\ntransitions = [[[0.5]]]\nrewards = [[[0.0]]]\n";
        assert!(TabularMdp::parse(text).is_err());
        assert!(matches!(TabularMdp::parse("states = ["), Err(Error::Parse { .. })));
    }
}
