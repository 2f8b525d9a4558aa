use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::agent::{IdidAgent, OpatAgent};
use super::teammate::Teammate;
use crate::domain::{Agent, DomainModel};
use crate::error::{Error, Result};
use crate::planner::{belief_update, sample_index, sample_sparse, Belief, PlanningView};

/// Something that picks the planning agent's actions online.
#[derive(Debug, Clone)]
pub enum Planner {
    Idid(IdidAgent),
    Opat(OpatAgent),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub state: usize,
    pub action_i: usize,
    pub action_j: usize,
    pub obs_i: usize,
    pub obs_j: usize,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub steps: Vec<StepRecord>,
    pub cumulative: f64,
    /// Belief over teammate models after each step's observation; empty
    /// for agents that keep no such belief.
    pub model_beliefs: Vec<Vec<f64>>,
    /// Steps at which the model belief went back to the prior.
    pub resets: Vec<usize>,
}

/// Plays one episode. The agent replans every step for
/// `min(lookahead, steps left)` steps from its current belief.
pub fn run_episode(
    planner: &Planner,
    mut teammate: Teammate,
    domain: &DomainModel,
    steps: usize,
    lookahead: usize,
    seed: u64,
) -> Result<EpisodeLog> {
    if lookahead == 0 {
        return Err(Error::ZeroHorizon);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = Belief::new(domain.initial().to_vec())?;
    let mut log = EpisodeLog::default();
    if steps == 0 {
        return Ok(log);
    }
    let mut state = sample_index(&mut rng, initial.probs());
    // State filter that treats the teammate's action as uniform.
    let mut states = initial.clone();
    let uniform = match planner {
        Planner::Idid(a) => PlanningView::uniform(a.domain.clone(), Agent::I),
        Planner::Opat(a) => PlanningView::uniform(a.domain.clone(), Agent::I),
    };
    let mut interactive = match planner {
        Planner::Idid(a) => Some(a.interactive_belief(&states)),
        Planner::Opat(_) => None,
    };

    for t in 0..steps {
        let horizon = lookahead.min(steps - t);
        let ai = match planner {
            Planner::Idid(a) => a.plan(interactive.as_ref().expect("kept for I-DID agents"), horizon)?,
            Planner::Opat(a) => a.plan(&states, horizon, &mut rng)?,
        };
        let aj = teammate.act(t);
        let reward = domain.reward(state, ai, aj);
        let next = sample_sparse(&mut rng, domain.successors(state, ai, aj));
        let oi = sample_index(&mut rng, domain.obs_row(Agent::I, next, ai, aj));
        let oj = sample_index(&mut rng, domain.obs_row(Agent::J, next, ai, aj));
        teammate.observe(t, oj);
        log.steps.push(StepRecord { step: t, state, action_i: ai, action_j: aj, obs_i: oi, obs_j: oj, reward });
        log.cumulative += reward;
        state = next;

        states = belief_update(&states, ai, oi, &uniform, 0).unwrap_or_else(|_| initial.clone());
        if let Planner::Idid(agent) = planner {
            let b = interactive.take().expect("kept for I-DID agents");
            let b = match agent.update(&b, ai, oi) {
                Ok(b) => b,
                Err(Error::ImpossibleObservation { .. }) => {
                    log.resets.push(t);
                    agent.interactive_belief(&states)
                }
                Err(e) => return Err(e),
            };
            log.model_beliefs.push(agent.model_marginal(&b));
            interactive = Some(b);
        }
    }
    Ok(log)
}
