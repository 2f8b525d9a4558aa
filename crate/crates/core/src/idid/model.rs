use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::solve::Idid;
use crate::domain::{Agent, DomainModel, PROB_TOL};
use crate::error::{Error, Result};
use crate::planner::{belief_update, lookahead, Behavior, Belief, PlanningView, PolicyTree, BRANCH_EPS};

/// The non-belief part of a level-0 model.
#[derive(Debug, Clone, PartialEq)]
pub enum Frame {
    /// Plans against a fixed distribution over the other agent's actions;
    /// `None` means uniform.
    Planning { other_dist: Option<Vec<f64>> },
    /// Learns a policy by Monte Carlo search against `other_policy`,
    /// starting from `seed`.
    Learning { alpha: f64, seed: PolicyTree, other_policy: PolicyTree },
}

impl Frame {
    pub fn planning() -> Frame {
        Frame::Planning { other_dist: None }
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        if let Frame::Learning { alpha, seed, other_policy } = self {
            if !(*alpha > 0.0 && *alpha <= 1.0) {
                return Err(Error::InvalidModel(format!("learning rate {alpha} outside (0,1]")));
            }
            if seed.depth() != horizon || other_policy.depth() != horizon {
                return Err(Error::DepthMismatch(seed.depth(), horizon));
            }
        }
        Ok(())
    }

    /// Single-agent view a planning frame optimizes against.
    pub fn planning_view(&self, domain: &Arc<DomainModel>, agent: Agent) -> Result<PlanningView> {
        match self {
            Frame::Planning { other_dist: Some(d) } => PlanningView::new(domain.clone(), agent, d.clone()),
            _ => Ok(PlanningView::uniform(domain.clone(), agent)),
        }
    }
}

/// A solved model: the policy it follows when ties are broken by action
/// index, its expected utility in its own frame, and every optimal course
/// of action.
#[derive(Debug, Clone, PartialEq)]
pub struct Solved {
    pub policy: PolicyTree,
    pub value: f64,
    pub behavior: Behavior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Level0Model {
    pub belief: Belief,
    pub frame: Frame,
    pub solution: Option<Solved>,
}

impl Level0Model {
    pub fn planning(belief: Belief) -> Self {
        Self { belief, frame: Frame::planning(), solution: None }
    }

    /// A model whose learned policy is already known; `partner` is the
    /// other agent's policy it was learned against.
    pub fn learned(belief: Belief, alpha: f64, policy: PolicyTree, partner: PolicyTree, value: f64) -> Self {
        let behavior = Behavior::from_policy(&policy);
        Self {
            belief,
            frame: Frame::Learning { alpha, seed: policy.clone(), other_policy: partner },
            solution: Some(Solved { policy, value, behavior }),
        }
    }
}

/// Candidate models of the other agent one level down.
#[derive(Debug, Clone)]
pub enum Model {
    Level0(Level0Model),
    Nested(Box<Idid>),
}

impl Model {
    pub fn level(&self) -> usize {
        match self {
            Model::Level0(_) => 0,
            Model::Nested(m) => m.level,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelSpace {
    pub models: Vec<Model>,
    pub weights: Vec<f64>,
}

impl ModelSpace {
    pub fn new(models: Vec<Model>, weights: Vec<f64>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::EmptyModelSpace);
        }
        if weights.len() != models.len() {
            return Err(Error::InvalidModel("one weight per model is required".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidModel("model weights are not a distribution".into()));
        }
        Ok(Self { models, weights })
    }

    pub fn uniform(models: Vec<Model>) -> Result<Self> {
        let n = models.len();
        Self::new(models, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    Uniform,
    Diverse,
}

impl std::str::FromStr for Weighting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Weighting::Uniform),
            "diverse" => Ok(Weighting::Diverse),
            _ => Err(Error::Config(format!("unknown weighting `{s}`"))),
        }
    }
}

/// Model weights from expected utilities. Diverse weights grow linearly
/// with the utility above the worst one.
pub fn assign_weights(utilities: &[f64], scheme: Weighting) -> Vec<f64> {
    let n = utilities.len();
    match scheme {
        Weighting::Uniform => vec![1.0 / n as f64; n],
        Weighting::Diverse => {
            let min = utilities.iter().copied().fold(f64::INFINITY, f64::min);
            let raw: Vec<f64> = utilities.iter().map(|u| u - min + 1e-6).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|r| r / total).collect()
        }
    }
}

/// Weak compositions of `total` into `parts` nonnegative integers, in
/// lexicographic order.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Grid of beliefs for models of `agent`: the other agent's local state
/// keeps its initial marginal while `agent`'s own local state ranges over
/// all distributions with probabilities in multiples of `1/resolution`.
/// States outside the initial support of the other agent's factor get no
/// mass. Resolution 0 yields the domain's initial distribution alone.
pub fn prior_grid(domain: &DomainModel, agent: Agent, resolution: usize) -> Result<Vec<Belief>> {
    if resolution == 0 {
        return Ok(vec![Belief::new(domain.initial().to_vec())?]);
    }
    let other = agent.other();
    let mut other_marginal = vec![0.0; domain.n_local_states(other)];
    for (s, &p) in domain.initial().iter().enumerate() {
        other_marginal[domain.local_state(other, s)] += p;
    }
    let n_own = domain.n_local_states(agent);
    // Uniform over world states sharing the same pair of local values.
    let mut cell_size = vec![0usize; n_own * other_marginal.len()];
    for s in 0..domain.n_states() {
        cell_size[domain.local_state(agent, s) * other_marginal.len() + domain.local_state(other, s)] += 1;
    }
    let mut out = Vec::new();
    for g in compositions(resolution, n_own) {
        let mass: Vec<f64> = (0..domain.n_states())
            .map(|s| {
                let (own, oth) = (domain.local_state(agent, s), domain.local_state(other, s));
                g[own] as f64 / resolution as f64 * other_marginal[oth]
                    / cell_size[own * other_marginal.len() + oth] as f64
            })
            .collect();
        if let Some(b) = Belief::from_mass(mass) {
            out.push(b);
        }
    }
    Ok(out)
}

/// Level-0 planning models of `agent`, one per belief of [`prior_grid`],
/// with uniform weights.
pub fn prior_model_space(domain: &DomainModel, agent: Agent, resolution: usize) -> Result<ModelSpace> {
    let models = prior_grid(domain, agent, resolution)?
        .into_iter()
        .map(|b| Model::Level0(Level0Model::planning(b)))
        .collect();
    ModelSpace::uniform(models)
}

/// One step of the model update: each solved level-0 model of `agent`
/// branches on its optimal actions and on the observations it considers
/// possible. Successors carry the matching sub-behavior as their solution.
pub fn expand_model_space(
    ms: &ModelSpace,
    domain: &Arc<DomainModel>,
    agent: Agent,
    t: usize,
) -> Result<ModelSpace> {
    let mut models = Vec::new();
    let mut weights = Vec::new();
    for (model, &w) in ms.models.iter().zip(&ms.weights) {
        let Model::Level0(m) = model else {
            return Err(Error::InvalidModel("expansion is defined for level-0 models".into()));
        };
        let solved = m.solution.as_ref().ok_or(Error::Unsolved)?;
        let view = m.frame.planning_view(domain, agent)?;
        let tied = &solved.behavior.actions;
        for (k, &a) in tied.iter().enumerate() {
            let Some(row) = solved.behavior.children.get(k) else { continue };
            let step = lookahead(&view, t, &m.belief, a);
            for (o, (p, _)) in step.branches.iter().enumerate() {
                if *p <= BRANCH_EPS {
                    continue;
                }
                let belief = belief_update(&m.belief, a, o, &view, t)?;
                let behavior = row[o].clone();
                let policy = behavior.first_policy();
                models.push(Model::Level0(Level0Model {
                    belief,
                    frame: m.frame.clone(),
                    solution: Some(Solved { policy, value: f64::NAN, behavior }),
                }));
                weights.push(w * p / tied.len() as f64);
            }
        }
    }
    if models.is_empty() {
        return Err(Error::EmptyModelSpace);
    }
    Ok(ModelSpace { models, weights })
}

/// Merges level-0 models with identical behavior into the first of them.
pub fn prune_behavioral_eq(ms: &ModelSpace) -> Result<ModelSpace> {
    let mut keep: Vec<usize> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let behavior = |k: usize| -> Result<&Behavior> {
        match &ms.models[k] {
            Model::Level0(m) => Ok(&m.solution.as_ref().ok_or(Error::Unsolved)?.behavior),
            Model::Nested(_) => Err(Error::InvalidModel("pruning is defined for level-0 models".into())),
        }
    };
    let mut index = std::collections::HashMap::new();
    for k in 0..ms.len() {
        let b = behavior(k)?;
        match index.get(b) {
            Some(&slot) => weights[slot] += ms.weights[k],
            None => {
                index.insert(b, keep.len());
                keep.push(k);
                weights.push(ms.weights[k]);
            }
        }
    }
    Ok(ModelSpace { models: keep.iter().map(|&k| ms.models[k].clone()).collect(), weights })
}
