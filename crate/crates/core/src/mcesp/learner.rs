use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{post_history_return, LearnerConfig, QTable, Trajectory};
use crate::domain::ProjectedEnv;
use crate::error::{Error, Result};
use crate::idid::{Frame, Level0Model};
use crate::planner::{evaluate_policy, sample_sparse, Belief, FlatPolicy, PolicyTree, Pomdp, END};

/// Reach probability under which a history is ignored.
const REACH_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Every reachable pair has its full batch of fresh samples.
    Converged,
    /// Too many perturbations in a row were rejected.
    Patience,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub history: Vec<usize>,
    pub action: usize,
    pub accepted: bool,
    /// Exact value of the current policy after this iteration.
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct LearnOutcome {
    pub policy: PolicyTree,
    pub q: QTable,
    pub trace: Vec<TraceRow>,
    pub iterations: usize,
    pub termination: Termination,
}

/// True when every (history, action) pair reachable under the current
/// policy has at least `n_saa` samples since the last policy change.
pub fn terminate_saa(q: &QTable, reachable: &[bool], n_saa: usize) -> bool {
    reachable
        .iter()
        .enumerate()
        .filter(|(_, r)| **r)
        .all(|(node, _)| (0..q.n_actions).all(|a| q.fresh_count(node, a) >= n_saa))
}

struct Search<'a> {
    env: &'a ProjectedEnv,
    cfg: &'a LearnerConfig,
    flat: FlatPolicy,
    actions: Vec<usize>,
    /// Per node, the cumulative distribution over hidden states given the
    /// history, for exploring starts.
    starts: Vec<Vec<(usize, f64)>>,
    reachable: Vec<bool>,
    q: QTable,
    rng: ChaCha8Rng,
}

impl Search<'_> {
    fn refresh(&mut self) {
        self.flat = self.flat.to_tree(&self.actions).flatten(self.flat.n_obs());
        let dist = self.env.node_distributions(&self.flat);
        self.reachable = dist.iter().map(|d| d.iter().map(|x| x.1).sum::<f64>() > REACH_EPS).collect();
        self.starts = dist
            .into_iter()
            .map(|d| {
                let total: f64 = d.iter().map(|x| x.1).sum();
                d.into_iter().map(|(x, p)| (x, p / total)).collect()
            })
            .collect();
    }

    /// One rollout that starts at `node` in a hidden state drawn from its
    /// posterior, plays `action`, then follows the current policy.
    fn rollout(&mut self, node: usize, action: usize) -> Result<Trajectory> {
        let t0 = self.flat.step[node];
        let depth = self.flat.depth();
        let x = sample_sparse(&mut self.rng, &self.starts[node]);
        let mut state = self.env.state_of(x, t0);
        let mut observations = self.flat.history_of(node);
        let mut actions = vec![0; t0];
        let mut rewards = vec![0.0; t0];
        let mut cur = node;
        let mut a = action;
        for t in t0..depth {
            let out = self.env.step(state, a, &mut self.rng)?;
            actions.push(a);
            rewards.push(out.reward);
            observations.push(out.obs);
            state = out.next;
            if t + 1 < depth {
                cur = self.flat.child(cur, out.obs);
                debug_assert_ne!(cur, END);
                a = self.actions[cur];
            }
        }
        Ok(Trajectory { start: t0, actions, rewards, observations })
    }

    fn sample_pair(&mut self, node: usize, action: usize) -> Result<()> {
        let history = self.q.histories[node].clone();
        while self.q.fresh_count(node, action) < self.cfg.n_saa {
            let traj = self.rollout(node, action)?;
            let ret = post_history_return(&traj, &history, self.cfg.gamma).expect("rollout passes through its start");
            self.q.record(node, action, self.cfg.alpha, ret);
        }
        Ok(())
    }

    fn exact_value(&self) -> f64 {
        let b = Belief::new(self.env.initial_belief()).expect("initial distribution is valid");
        let tree = self.flat.to_tree(&self.actions);
        evaluate_policy(&b, self.env, &tree, 0, self.cfg.gamma)
    }
}

/// Learns a policy for a level-0 learning model in its projected
/// environment, starting from the model's seed policy.
///
/// Each iteration perturbs the action of a random reachable history whose
/// alternatives still lack a full batch of samples. Both the current and
/// the perturbed action are evaluated by `n_saa` rollouts started at that
/// history (the exploring start), updating Q by the learning-rate rule. The
/// policy switches to the best action when its sample mean beats the
/// current one, which resets all fresh counts.
pub fn learn_level0(model: &Level0Model, env: &ProjectedEnv, cfg: &LearnerConfig) -> Result<LearnOutcome> {
    cfg.validate()?;
    let Frame::Learning { seed, .. } = &model.frame else {
        return Err(Error::InvalidModel("learning needs a learning frame".into()));
    };
    if seed.depth() > env.depth() {
        return Err(Error::PolicyExhausted { step: env.depth(), depth: env.depth() });
    }
    let n_obs = env.n_observations();
    let n_actions = env.n_actions();
    if !seed.is_complete(n_obs) {
        return Err(Error::InvalidModel("seed policy is not a complete tree".into()));
    }
    let flat = seed.flatten(n_obs);
    let actions = seed.bfs_actions();
    let histories = (0..flat.len()).map(|k| flat.history_of(k)).collect();
    let mut search = Search {
        env,
        cfg,
        flat,
        actions,
        starts: Vec::new(),
        reachable: Vec::new(),
        q: QTable::new(histories, n_actions),
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
    };
    search.refresh();

    // Warm-up batch for the seed policy.
    for node in 0..search.flat.len() {
        if search.reachable[node] {
            let a = search.actions[node];
            search.sample_pair(node, a)?;
        }
    }

    let mut trace = Vec::new();
    let mut discards = 0;
    for iteration in 1..=cfg.max_iterations {
        let candidates: Vec<usize> = (0..search.flat.len())
            .filter(|&k| {
                search.reachable[k]
                    && (0..n_actions).any(|a| a != search.actions[k] && search.q.fresh_count(k, a) < cfg.n_saa)
            })
            .collect();
        if candidates.is_empty() {
            debug_assert!(terminate_saa(&search.q, &search.reachable, cfg.n_saa));
            return Ok(finish(search, trace, iteration - 1, Termination::Converged));
        }
        let node = *candidates.choose(&mut search.rng).expect("nonempty");
        let current = search.actions[node];
        let open: Vec<usize> = (0..n_actions)
            .filter(|&a| a != current && search.q.fresh_count(node, a) < cfg.n_saa)
            .collect();
        let alt = open[search.rng.gen_range(0..open.len())];
        search.sample_pair(node, current)?;
        search.sample_pair(node, alt)?;

        // Best fully sampled action; the current one wins ties.
        let mut best = current;
        let mut best_mean = search.q.fresh_mean(node, current).expect("sampled");
        for a in 0..n_actions {
            if a == current || search.q.fresh_count(node, a) < cfg.n_saa {
                continue;
            }
            let m = search.q.fresh_mean(node, a).expect("sampled");
            if m > best_mean {
                best = a;
                best_mean = m;
            }
        }
        let accepted = best != current;
        if accepted {
            search.actions[node] = best;
            search.q.reset_fresh();
            search.refresh();
            discards = 0;
        } else {
            discards += 1;
        }
        trace.push(TraceRow {
            iteration,
            history: search.q.histories[node].clone(),
            action: alt,
            accepted,
            value: search.exact_value(),
        });
        if !accepted && discards >= cfg.patience {
            return Ok(finish(search, trace, iteration, Termination::Patience));
        }
    }
    Err(Error::NoTermination(cfg.max_iterations))
}

fn finish(search: Search<'_>, trace: Vec<TraceRow>, iterations: usize, termination: Termination) -> LearnOutcome {
    let policy = search.flat.to_tree(&search.actions);
    LearnOutcome { policy, q: search.q, trace, iterations, termination }
}
