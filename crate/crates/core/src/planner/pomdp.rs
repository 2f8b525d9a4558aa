use std::sync::Arc;

use crate::domain::{Agent, DomainModel};
use crate::error::{Error, Result};

/// A finite-horizon single-agent decision problem.
///
/// State spaces may change with the step index `t` (interactive states do),
/// so every query carries it.
pub trait Pomdp {
    fn n_states(&self, t: usize) -> usize;
    fn n_actions(&self) -> usize;
    fn n_observations(&self) -> usize;
    fn reward(&self, t: usize, s: usize, a: usize) -> f64;
    /// Appends `(s', o, P(s', o | s, a))` for every nonzero outcome.
    fn transitions(&self, t: usize, s: usize, a: usize, out: &mut Vec<(usize, usize, f64)>);
}

/// One agent's view of the domain with the other agent's action replaced by
/// a fixed distribution. This is the level-0 planning frame.
#[derive(Debug, Clone)]
pub struct PlanningView {
    domain: Arc<DomainModel>,
    agent: Agent,
    other_dist: Vec<f64>,
    rewards: Vec<f64>,
    kernel: Vec<Vec<(usize, usize, f64)>>,
}

impl PlanningView {
    pub fn new(domain: Arc<DomainModel>, agent: Agent, other_dist: Vec<f64>) -> Result<Self> {
        let other = agent.other();
        if other_dist.len() != domain.n_actions(other) {
            return Err(Error::InvalidModel(format!(
                "other-action distribution has {} entries, expected {}",
                other_dist.len(),
                domain.n_actions(other)
            )));
        }
        if (other_dist.iter().sum::<f64>() - 1.0).abs() > crate::domain::PROB_TOL
            || other_dist.iter().any(|p| *p < 0.0)
        {
            return Err(Error::InvalidModel("other-action distribution is not a distribution".into()));
        }
        let ns = domain.n_states();
        let na = domain.n_actions(agent);
        let mut rewards = vec![0.0; ns * na];
        let mut kernel = Vec::with_capacity(ns * na);
        for s in 0..ns {
            for a in 0..na {
                let mut out: Vec<(usize, usize, f64)> = Vec::new();
                for (b, &pb) in other_dist.iter().enumerate() {
                    if pb == 0.0 {
                        continue;
                    }
                    let (ai, aj) = agent.joint(a, b);
                    rewards[s * na + a] += pb * domain.reward(s, ai, aj);
                    for &(next, pt) in domain.successors(s, ai, aj) {
                        for (o, &po) in domain.obs_row(agent, next, ai, aj).iter().enumerate() {
                            if po > 0.0 {
                                out.push((next, o, pb * pt * po));
                            }
                        }
                    }
                }
                out.sort_by_key(|x| (x.0, x.1));
                let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(out.len());
                for e in out {
                    match merged.last_mut() {
                        Some(last) if last.0 == e.0 && last.1 == e.1 => last.2 += e.2,
                        _ => merged.push(e),
                    }
                }
                kernel.push(merged);
            }
        }
        Ok(Self { domain, agent, other_dist, rewards, kernel })
    }

    /// The other agent's action is uniformly distributed.
    pub fn uniform(domain: Arc<DomainModel>, agent: Agent) -> Self {
        let n = domain.n_actions(agent.other());
        Self::new(domain, agent, vec![1.0 / n as f64; n]).expect("uniform distribution is valid")
    }

    pub fn domain(&self) -> &Arc<DomainModel> {
        &self.domain
    }

    pub fn agent(&self) -> Agent {
        self.agent
    }

    pub fn other_dist(&self) -> &[f64] {
        &self.other_dist
    }
}

impl Pomdp for PlanningView {
    fn n_states(&self, _t: usize) -> usize {
        self.domain.n_states()
    }

    fn n_actions(&self) -> usize {
        self.domain.n_actions(self.agent)
    }

    fn n_observations(&self) -> usize {
        self.domain.n_observations(self.agent)
    }

    fn reward(&self, _t: usize, s: usize, a: usize) -> f64 {
        self.rewards[s * self.n_actions() + a]
    }

    fn transitions(&self, _t: usize, s: usize, a: usize, out: &mut Vec<(usize, usize, f64)>) {
        out.extend_from_slice(&self.kernel[s * self.n_actions() + a]);
    }
}
