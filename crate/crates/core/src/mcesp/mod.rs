//! Monte Carlo exploring-starts policy search over observation histories,
//! used to learn level-0 policies, and the loop that grows a set of
//! collaborative policies from it.

mod collaborative;
mod learner;

use serde::{Deserialize, Serialize};

pub use collaborative::{generate_collaborative_set, CollaborativeSet, RestartTrace};
pub use learner::{learn_level0, terminate_saa, LearnOutcome, Termination, TraceRow};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    /// Learning rate of the Q update.
    pub alpha: f64,
    /// Discount applied to rewards by absolute step.
    pub gamma: f64,
    /// Fresh samples per (history, action) pair before values are compared.
    pub n_saa: usize,
    pub max_iterations: usize,
    /// Consecutive rejected perturbations that end the search.
    pub patience: usize,
    pub seed: u64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self { alpha: 0.9, gamma: 1.0, n_saa: 25, max_iterations: 10_000, patience: 10, seed: 0 }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!("alpha = {} outside (0,1]", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma = {} outside [0,1]", self.gamma)));
        }
        if self.n_saa == 0 {
            return Err(Error::Config("n_saa must be at least 1".into()));
        }
        if self.patience == 0 || self.max_iterations == 0 {
            return Err(Error::Config("patience and max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// `(1 - alpha) q + alpha ret`.
pub fn q_update(q: f64, alpha: f64, ret: f64) -> f64 {
    (1.0 - alpha) * q + alpha * ret
}

/// A sampled episode of the learner. Observation `k` is received after
/// action `k`; the empty history precedes action 0. Sampling may start at
/// step `start` after a given observation prefix, in which case actions
/// and rewards before `start` are placeholders.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub start: usize,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub observations: Vec<usize>,
}

impl Trajectory {
    /// Full episode from step 0.
    pub fn new(actions: Vec<usize>, rewards: Vec<f64>, observations: Vec<usize>) -> Self {
        Self { start: 0, actions, rewards, observations }
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

/// Discounted rewards from the step at which `history` is first observed,
/// with discount exponents counted from step 0. `None` when the trajectory
/// never passes through `history` (or only before sampling started).
pub fn post_history_return(traj: &Trajectory, history: &[usize], gamma: f64) -> Option<f64> {
    let t0 = history.len();
    if t0 < traj.start || t0 >= traj.len() || traj.observations.get(..t0)? != history {
        return None;
    }
    Some(
        traj.rewards[t0..]
            .iter()
            .enumerate()
            .map(|(k, r)| gamma.powi((t0 + k) as i32) * r)
            .sum(),
    )
}

/// Q values and sample counts per (policy node, action). Nodes are those of
/// the complete tree in breadth-first order, so node `k` names one
/// observation history for the whole run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    pub n_actions: usize,
    pub histories: Vec<Vec<usize>>,
    pub values: Vec<f64>,
    pub visits: Vec<u64>,
    /// Samples since the last accepted policy change.
    pub fresh: Vec<usize>,
    /// Sum of those fresh samples.
    pub fresh_sum: Vec<f64>,
}

impl QTable {
    pub fn new(histories: Vec<Vec<usize>>, n_actions: usize) -> Self {
        let n = histories.len() * n_actions;
        Self {
            n_actions,
            histories,
            values: vec![0.0; n],
            visits: vec![0; n],
            fresh: vec![0; n],
            fresh_sum: vec![0.0; n],
        }
    }

    #[inline]
    fn idx(&self, node: usize, a: usize) -> usize {
        node * self.n_actions + a
    }

    pub fn value(&self, node: usize, a: usize) -> f64 {
        self.values[self.idx(node, a)]
    }

    pub fn record(&mut self, node: usize, a: usize, alpha: f64, ret: f64) {
        let k = self.idx(node, a);
        self.values[k] = q_update(self.values[k], alpha, ret);
        self.visits[k] += 1;
        self.fresh[k] += 1;
        self.fresh_sum[k] += ret;
    }

    pub fn fresh_count(&self, node: usize, a: usize) -> usize {
        self.fresh[self.idx(node, a)]
    }

    /// Mean of the fresh samples of a pair, if any.
    pub fn fresh_mean(&self, node: usize, a: usize) -> Option<f64> {
        let k = self.idx(node, a);
        (self.fresh[k] > 0).then(|| self.fresh_sum[k] / self.fresh[k] as f64)
    }

    pub fn reset_fresh(&mut self) {
        self.fresh.iter_mut().for_each(|f| *f = 0);
        self.fresh_sum.iter_mut().for_each(|f| *f = 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn q_update_cases() {
        assert_eq!(q_update(0.0, 1.0, 7.0), 7.0);
        assert_eq!(q_update(10.0, 0.0, 99.0), 10.0);
        assert!((q_update(2.0, 0.9, 10.0) - 9.2).abs() < 1e-12);
    }

    #[test]
    fn post_history_return_cases() {
        let traj = Trajectory::new(vec![0, 0, 0], vec![1.0, 1.0, 1.0], vec![0, 1, 0]);
        assert_eq!(post_history_return(&traj, &[], 1.0), Some(3.0));
        assert_eq!(post_history_return(&traj, &[0, 1], 1.0), Some(1.0));
        assert_eq!(post_history_return(&traj, &[0], 0.5), Some(0.75));
        assert_eq!(post_history_return(&traj, &[1], 1.0), None);
    }

    #[test]
    fn exploring_start_prefix_is_skipped() {
        let traj = Trajectory { start: 1, actions: vec![0, 1, 1], rewards: vec![0.0, 2.0, 3.0], observations: vec![1, 0, 0] };
        assert_eq!(post_history_return(&traj, &[], 1.0), None);
        assert_eq!(post_history_return(&traj, &[1], 1.0), Some(5.0));
    }

    #[test]
    fn config_validation() {
        assert!(LearnerConfig::default().validate().is_ok());
        assert!(LearnerConfig { alpha: 0.0, ..Default::default() }.validate().is_err());
        assert!(LearnerConfig { n_saa: 0, ..Default::default() }.validate().is_err());
        assert!(LearnerConfig { gamma: 1.5, ..Default::default() }.validate().is_err());
    }

    proptest! {
        #[test]
        fn q_update_is_convex(q in -1e3f64..1e3, ret in -1e3f64..1e3, alpha in 0.0f64..=1.0) {
            let r = q_update(q, alpha, ret);
            prop_assert!(r >= q.min(ret) - 1e-9 && r <= q.max(ret) + 1e-9);
        }

        #[test]
        fn undiscounted_return_from_the_root_is_the_total(rewards in proptest::collection::vec(-10.0f64..10.0, 1..6)) {
            let n = rewards.len();
            let traj = Trajectory::new(vec![0; n], rewards.clone(), vec![0; n]);
            let total: f64 = rewards.iter().sum();
            prop_assert_eq!(post_history_return(&traj, &[], 1.0), Some(total));
        }
    }
}
