use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{learn_level0, LearnerConfig};
use crate::domain::{project, Agent, DomainModel};
use crate::error::{Error, Result};
use crate::idid::{Frame, LearnedPolicy, Level0Model};
use crate::planner::{joint_value, Belief, PolicyTree};

/// Improvement rounds per restart before giving up on a cycle.
const MAX_ROUNDS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartTrace {
    pub restart: usize,
    /// Exact joint value of each accepted policy with its partner.
    pub values: Vec<f64>,
    pub rounds: usize,
}

#[derive(Debug, Clone)]
pub struct CollaborativeSet {
    pub candidates: Vec<LearnedPolicy>,
    pub restarts: Vec<RestartTrace>,
}

fn learn(
    domain: &Arc<DomainModel>,
    partner: &PolicyTree,
    seed: PolicyTree,
    cfg: &LearnerConfig,
) -> Result<PolicyTree> {
    let env = project(domain.clone(), partner, Agent::J);
    let model = Level0Model {
        belief: Belief::new(domain.initial().to_vec())?,
        frame: Frame::Learning { alpha: cfg.alpha, seed, other_policy: partner.clone() },
        solution: None,
    };
    Ok(learn_level0(&model, &env, cfg)?.policy)
}

fn restart(domain: &Arc<DomainModel>, horizon: usize, cfg: &LearnerConfig, index: usize) -> Result<(Vec<LearnedPolicy>, RestartTrace)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64 + 1);
    let (na_i, no_i) = (domain.n_actions(Agent::I), domain.n_observations(Agent::I));
    let (na_j, no_j) = (domain.n_actions(Agent::J), domain.n_observations(Agent::J));
    let pi_i = PolicyTree::random(&mut rng, na_i, no_i, horizon);
    let seed = PolicyTree::random(&mut rng, na_j, no_j, horizon);
    let mut learner = LearnerConfig { seed: rng.gen(), ..cfg.clone() };

    let mut current = learn(domain, &pi_i, seed, &learner)?;
    let mut out = vec![LearnedPolicy {
        policy: current.clone(),
        value: joint_value(domain, &pi_i, &current)?.value,
        partner: pi_i,
    }];
    let mut rounds = 0;
    while rounds < MAX_ROUNDS {
        rounds += 1;
        learner.seed = rng.gen();
        let next = learn(domain, &current, current.clone(), &learner)?;
        let base = joint_value(domain, &current, &current)?.value;
        let improved = joint_value(domain, &current, &next)?.value;
        if improved <= base + 1e-9 {
            break;
        }
        out.push(LearnedPolicy { policy: next.clone(), value: improved, partner: current });
        current = next;
    }
    let trace = RestartTrace { restart: index, values: out.iter().map(|c| c.value).collect(), rounds };
    Ok((out, trace))
}

/// Grows candidate level-0 policies of agent j by alternating learning:
/// each restart learns against a random policy of i, then repeatedly
/// learns against its own last policy played by i, keeping every policy
/// that improves the joint value. Duplicates keep their highest value;
/// candidates are ordered by value, then by their actions.
///
/// Requires both agents to share action and observation counts, since a
/// policy of j is replayed as a policy of i.
pub fn generate_collaborative_set(
    domain: &Arc<DomainModel>,
    horizon: usize,
    restarts: usize,
    cfg: &LearnerConfig,
) -> Result<CollaborativeSet> {
    if restarts == 0 {
        return Err(Error::Config("at least one restart is required".into()));
    }
    if horizon == 0 {
        return Err(Error::ZeroHorizon);
    }
    if domain.n_actions(Agent::I) != domain.n_actions(Agent::J)
        || domain.n_observations(Agent::I) != domain.n_observations(Agent::J)
    {
        return Err(Error::Config("agents must share action and observation sets".into()));
    }
    cfg.validate()?;
    let runs: Vec<(Vec<LearnedPolicy>, RestartTrace)> = (0..restarts)
        .into_par_iter()
        .map(|r| restart(domain, horizon, cfg, r))
        .collect::<Result<_>>()?;
    let mut candidates: Vec<LearnedPolicy> = Vec::new();
    let mut traces = Vec::with_capacity(restarts);
    for (found, trace) in runs {
        traces.push(trace);
        for c in found {
            match candidates.iter_mut().find(|x| x.policy.same_behavior(&c.policy)) {
                Some(x) if c.value > x.value => *x = c,
                Some(_) => {}
                None => candidates.push(c),
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.value
            .total_cmp(&a.value)
            .then_with(|| a.policy.bfs_actions().cmp(&b.policy.bfs_actions()))
    });
    Ok(CollaborativeSet { candidates, restarts: traces })
}
