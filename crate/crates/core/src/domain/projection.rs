//! A two-agent domain seen by one agent while the other follows a fixed
//! policy tree.

use std::sync::Arc;

use rand::Rng;

use super::{Agent, DomainModel};
use crate::error::{Error, Result};
use crate::planner::{sample_index, sample_sparse, FlatPolicy, PolicyTree, Pomdp, END};

/// Hidden state of a projected environment: the world state and the folded
/// agent's current node (`END` once its policy is exhausted).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EnvState {
    pub s: usize,
    pub node: usize,
    pub t: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub next: EnvState,
    pub obs: usize,
    pub reward: f64,
}

#[derive(Debug, Clone)]
pub struct ProjectedEnv {
    base: Arc<DomainModel>,
    other_policy: PolicyTree,
    other_flat: FlatPolicy,
    perspective: Agent,
    initial: Vec<f64>,
}

/// Folds `other_policy` into the environment of `perspective`.
pub fn project(base: Arc<DomainModel>, other_policy: &PolicyTree, perspective: Agent) -> ProjectedEnv {
    let other_flat = other_policy.flatten(base.n_observations(perspective.other()));
    let initial = base.initial().to_vec();
    ProjectedEnv { base, other_policy: other_policy.clone(), other_flat, perspective, initial }
}

impl ProjectedEnv {
    /// Same environment started from another distribution over world
    /// states.
    pub fn with_initial(mut self, initial: Vec<f64>) -> Result<Self> {
        if initial.len() != self.base.n_states() {
            return Err(Error::InvalidModel("initial distribution has the wrong length".into()));
        }
        self.initial = initial;
        Ok(self)
    }

    pub fn base(&self) -> &Arc<DomainModel> {
        &self.base
    }

    pub fn perspective(&self) -> Agent {
        self.perspective
    }

    pub fn other_policy(&self) -> &PolicyTree {
        &self.other_policy
    }

    /// Number of steps the folded policy can play.
    pub fn depth(&self) -> usize {
        self.other_flat.depth()
    }

    /// Index of an environment state in the [`Pomdp`] view.
    pub fn state_index(&self, st: EnvState) -> usize {
        let node = if st.node == END { self.other_flat.len() } else { st.node };
        st.s * (self.other_flat.len() + 1) + node
    }

    pub fn state_of(&self, index: usize, t: usize) -> EnvState {
        let width = self.other_flat.len() + 1;
        let node = index % width;
        EnvState {
            s: index / width,
            node: if node == self.other_flat.len() { END } else { node },
            t,
        }
    }

    /// Initial distribution over the [`Pomdp`] state indices.
    pub fn initial_belief(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.n_states(0)];
        for (s, &p) in self.initial.iter().enumerate() {
            b[self.state_index(EnvState { s, node: 0, t: 0 })] = p;
        }
        b
    }

    pub fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> EnvState {
        EnvState { s: sample_index(rng, &self.initial), node: 0, t: 0 }
    }

    pub fn step<R: Rng + ?Sized>(&self, state: EnvState, action: usize, rng: &mut R) -> Result<StepOutcome> {
        if state.node == END {
            return Err(Error::PolicyExhausted { step: state.t, depth: self.depth() });
        }
        let b = self.other_flat.actions[state.node];
        let (ai, aj) = self.perspective.joint(action, b);
        let reward = self.base.reward(state.s, ai, aj);
        let next = sample_sparse(rng, self.base.successors(state.s, ai, aj));
        let obs = sample_index(rng, self.base.obs_row(self.perspective, next, ai, aj));
        let other_obs = sample_index(rng, self.base.obs_row(self.perspective.other(), next, ai, aj));
        let node = self.other_flat.child(state.node, other_obs);
        Ok(StepOutcome { next: EnvState { s: next, node, t: state.t + 1 }, obs, reward })
    }

    /// Exact joint distribution of the hidden state and the learner's
    /// position when the learner follows `learner`: entry `k` lists
    /// `(state index, P(reach node k, state))`. The masses of entry `k` sum
    /// to the probability of reaching learner node `k`.
    pub fn node_distributions(&self, learner: &FlatPolicy) -> Vec<Vec<(usize, f64)>> {
        let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); learner.len()];
        out[0] = self
            .initial_belief()
            .into_iter()
            .enumerate()
            .filter(|(_, p)| *p > 0.0)
            .collect();
        let mut buf = Vec::new();
        let width = self.n_states(0);
        let mut mass = vec![0.0; width * learner.n_obs()];
        for node in 0..learner.len() {
            if learner.child(node, 0) == END {
                continue;
            }
            let a = learner.actions[node];
            let t = learner.step[node];
            for &(x, p) in &out[node] {
                buf.clear();
                self.transitions(t, x, a, &mut buf);
                for &(y, o, q) in &buf {
                    mass[o * width + y] += p * q;
                }
            }
            for o in 0..learner.n_obs() {
                let child = learner.child(node, o);
                let row = &mut mass[o * width..(o + 1) * width];
                out[child] = row
                    .iter_mut()
                    .enumerate()
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(y, p)| (y, std::mem::take(p)))
                    .collect();
            }
        }
        out
    }
}

/// States are `(world state, folded node)` with an extra node past the end
/// of the folded policy that is absorbing and pays nothing.
impl Pomdp for ProjectedEnv {
    fn n_states(&self, _t: usize) -> usize {
        self.base.n_states() * (self.other_flat.len() + 1)
    }

    fn n_actions(&self) -> usize {
        self.base.n_actions(self.perspective)
    }

    fn n_observations(&self) -> usize {
        self.base.n_observations(self.perspective)
    }

    fn reward(&self, t: usize, x: usize, a: usize) -> f64 {
        let st = self.state_of(x, t);
        if st.node == END {
            return 0.0;
        }
        let (ai, aj) = self.perspective.joint(a, self.other_flat.actions[st.node]);
        self.base.reward(st.s, ai, aj)
    }

    fn transitions(&self, t: usize, x: usize, a: usize, out: &mut Vec<(usize, usize, f64)>) {
        let st = self.state_of(x, t);
        if st.node == END {
            out.push((x, 0, 1.0));
            return;
        }
        let (ai, aj) = self.perspective.joint(a, self.other_flat.actions[st.node]);
        for &(next, pt) in self.base.successors(st.s, ai, aj) {
            let own = self.base.obs_row(self.perspective, next, ai, aj);
            let other = self.base.obs_row(self.perspective.other(), next, ai, aj);
            for (oo, &po) in other.iter().enumerate() {
                if po == 0.0 {
                    continue;
                }
                let node = self.other_flat.child(st.node, oo);
                let y = self.state_index(EnvState { s: next, node, t: t + 1 });
                for (o, &q) in own.iter().enumerate() {
                    if q > 0.0 {
                        out.push((y, o, pt * po * q));
                    }
                }
            }
        }
    }
}
