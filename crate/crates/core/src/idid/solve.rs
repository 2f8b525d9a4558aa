use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::model::{assign_weights, prior_model_space, Frame, Level0Model, Model, ModelSpace, Solved, Weighting};
use crate::domain::{project, Agent, DomainModel};
use crate::error::{Error, Result};
use crate::mcesp::{learn_level0, LearnerConfig};
use crate::planner::{evaluate_policy, solve_did, Behavior, Belief, PolicyTree, Pomdp};

/// Default number of level-0 policies kept by the augmented solve.
pub const DEFAULT_TOP_K: usize = 32;

/// A level-`level` I-DID of `subject`, holding candidate models of the
/// other agent one level down.
#[derive(Debug, Clone)]
pub struct Idid {
    pub level: usize,
    pub horizon: usize,
    pub domain: Arc<DomainModel>,
    pub subject: Agent,
    /// Subject's belief over world states.
    pub belief: Belief,
    pub space: ModelSpace,
    pub weighting: Weighting,
    pub top_k: usize,
    /// Merge behaviorally equivalent models while expanding.
    pub prune: bool,
}

impl Idid {
    pub fn new(domain: Arc<DomainModel>, subject: Agent, level: usize, horizon: usize, space: ModelSpace) -> Result<Self> {
        let belief = Belief::new(domain.initial().to_vec())?;
        Ok(Self {
            level,
            horizon,
            domain,
            subject,
            belief,
            space,
            weighting: Weighting::Uniform,
            top_k: DEFAULT_TOP_K,
            prune: true,
        })
    }

    /// Standard nesting: at level 1 the other agent is modeled by level-0
    /// planners over the prior grid of `resolution`; at level `l` by one
    /// level `l-1` model of the same shape per prior-grid belief.
    pub fn traditional(
        domain: Arc<DomainModel>,
        subject: Agent,
        level: usize,
        horizon: usize,
        resolution: usize,
    ) -> Result<Self> {
        if level == 0 {
            return Err(Error::Config("an I-DID has level at least 1".into()));
        }
        let other = subject.other();
        let space = if level == 1 {
            prior_model_space(&domain, other, resolution)?
        } else {
            let beliefs = super::model::prior_grid(&domain, other, resolution)?;
            let mut models = Vec::with_capacity(beliefs.len());
            for b in beliefs {
                let mut nested = Idid::traditional(domain.clone(), other, level - 1, horizon, resolution)?;
                nested.belief = b;
                models.push(Model::Nested(Box::new(nested)));
            }
            ModelSpace::uniform(models)?
        };
        Idid::new(domain, subject, level, horizon, space)
    }
}

#[derive(Debug, Clone)]
pub struct IdidSolution {
    pub policy: PolicyTree,
    pub value: f64,
    pub behavior: Option<Behavior>,
    /// Number of distinct model nodes at each step.
    pub model_counts: Vec<usize>,
    /// Weights of the models retained at the first step.
    pub weights: Vec<f64>,
}

/// Solves one model of `agent` for `horizon` steps.
pub fn solve_model(model: &Model, domain: &Arc<DomainModel>, agent: Agent, horizon: usize) -> Result<Solved> {
    match model {
        Model::Level0(m) => {
            if let Some(s) = &m.solution {
                if s.behavior.depth() != horizon {
                    return Err(Error::DepthMismatch(s.behavior.depth(), horizon));
                }
                return Ok(s.clone());
            }
            m.frame.validate(horizon)?;
            match &m.frame {
                Frame::Planning { .. } => {
                    let view = m.frame.planning_view(domain, agent)?;
                    let sol = solve_did(&m.belief, &view, horizon)?;
                    Ok(Solved { policy: sol.policy, value: sol.value, behavior: sol.behavior })
                }
                Frame::Learning { alpha, other_policy, .. } => {
                    let env = project(domain.clone(), other_policy, agent).with_initial(m.belief.probs().to_vec())?;
                    let cfg = LearnerConfig { alpha: *alpha, ..LearnerConfig::default() };
                    let out = learn_level0(m, &env, &cfg)?;
                    let b = Belief::new(env.initial_belief())?;
                    let value = evaluate_policy(&b, &env, &out.policy, 0, 1.0);
                    let behavior = Behavior::from_policy(&out.policy);
                    Ok(Solved { policy: out.policy, value, behavior })
                }
            }
        }
        Model::Nested(idid) => {
            if idid.subject != agent {
                return Err(Error::InvalidModel("nested model belongs to the wrong agent".into()));
            }
            if idid.horizon != horizon {
                return Err(Error::DepthMismatch(idid.horizon, horizon));
            }
            let sol = solve_idid(idid)?;
            let behavior = sol.behavior.expect("solve_idid returns a behavior");
            Ok(Solved { policy: sol.policy, value: sol.value, behavior })
        }
    }
}

/// Solves every model of a space in parallel, in order.
pub fn solve_models(space: &ModelSpace, domain: &Arc<DomainModel>, agent: Agent, horizon: usize) -> Result<Vec<Solved>> {
    space
        .models
        .par_iter()
        .map(|m| solve_model(m, domain, agent, horizon))
        .collect()
}

/// One model node in the expanded model space.
#[derive(Debug, Clone)]
pub(crate) struct LatticeNode {
    pub actions: Vec<usize>,
    /// `next[k][o]`: node at the next step after `actions[k]` and the
    /// modeled agent's observation `o`.
    pub next: Vec<Vec<usize>>,
}

/// Model nodes per step, plus a single terminal node after the horizon.
#[derive(Debug, Clone)]
pub(crate) struct Lattice {
    pub levels: Vec<Vec<LatticeNode>>,
    pub weights: Vec<f64>,
}

impl Lattice {
    pub fn build(roots: &[&Behavior], weights: &[f64], horizon: usize, n_obs: usize, prune: bool) -> Result<Lattice> {
        for r in roots {
            if r.depth() != horizon {
                return Err(Error::DepthMismatch(r.depth(), horizon));
            }
        }
        let mut current: Vec<&Behavior> = Vec::new();
        let mut merged = Vec::new();
        {
            let mut seen: HashMap<&Behavior, usize> = HashMap::new();
            for (&b, &w) in roots.iter().zip(weights) {
                match seen.get(b).filter(|_| prune) {
                    Some(&k) => merged[k] += w,
                    None => {
                        seen.insert(b, current.len());
                        current.push(b);
                        merged.push(w);
                    }
                }
            }
        }
        let mut levels = Vec::with_capacity(horizon + 1);
        for t in 0..horizon {
            let mut next_nodes: Vec<&Behavior> = Vec::new();
            let mut seen: HashMap<&Behavior, usize> = HashMap::new();
            let mut level = Vec::with_capacity(current.len());
            for b in &current {
                let next = if t + 1 == horizon {
                    vec![vec![0; n_obs]; b.actions.len()]
                } else {
                    b.children
                        .iter()
                        .map(|row| {
                            row.iter()
                                .map(|c| {
                                    if prune {
                                        if let Some(&k) = seen.get(c) {
                                            return k;
                                        }
                                        seen.insert(c, next_nodes.len());
                                    }
                                    next_nodes.push(c);
                                    next_nodes.len() - 1
                                })
                                .collect()
                        })
                        .collect()
                };
                level.push(LatticeNode { actions: b.actions.clone(), next });
            }
            levels.push(level);
            current = next_nodes;
        }
        levels.push(vec![LatticeNode { actions: Vec::new(), next: Vec::new() }]);
        Ok(Lattice { levels, weights: merged })
    }

    pub fn counts(&self) -> Vec<usize> {
        self.levels[..self.levels.len() - 1].iter().map(|l| l.len()).collect()
    }
}

/// The subject's planning problem over interactive states
/// `(world state, model node)`, indexed `node * |S| + s`.
pub(crate) struct InteractiveView<'a> {
    pub domain: &'a DomainModel,
    pub subject: Agent,
    pub lattice: &'a Lattice,
}

impl InteractiveView<'_> {
    fn level(&self, t: usize) -> &[LatticeNode] {
        &self.lattice.levels[t.min(self.lattice.levels.len() - 1)]
    }

    pub fn initial_belief(&self, belief: &Belief) -> Belief {
        let ns = self.domain.n_states();
        let mut b = vec![0.0; ns * self.lattice.weights.len()];
        for (k, &w) in self.lattice.weights.iter().enumerate() {
            for (s, p) in belief.support() {
                b[k * ns + s] = w * p;
            }
        }
        Belief::from_mass(b).expect("weights and belief are distributions")
    }
}

impl Pomdp for InteractiveView<'_> {
    fn n_states(&self, t: usize) -> usize {
        self.domain.n_states() * self.level(t).len()
    }

    fn n_actions(&self) -> usize {
        self.domain.n_actions(self.subject)
    }

    fn n_observations(&self) -> usize {
        self.domain.n_observations(self.subject)
    }

    fn reward(&self, t: usize, x: usize, a: usize) -> f64 {
        let ns = self.domain.n_states();
        let node = &self.level(t)[x / ns];
        let s = x % ns;
        let p = 1.0 / node.actions.len() as f64;
        node.actions
            .iter()
            .map(|&b| {
                let (ai, aj) = self.subject.joint(a, b);
                p * self.domain.reward(s, ai, aj)
            })
            .sum()
    }

    fn transitions(&self, t: usize, x: usize, a: usize, out: &mut Vec<(usize, usize, f64)>) {
        let ns = self.domain.n_states();
        let node = &self.level(t)[x / ns];
        let s = x % ns;
        let p = 1.0 / node.actions.len() as f64;
        let other = self.subject.other();
        for (k, &b) in node.actions.iter().enumerate() {
            let (ai, aj) = self.subject.joint(a, b);
            for &(next, pt) in self.domain.successors(s, ai, aj) {
                let own = self.domain.obs_row(self.subject, next, ai, aj);
                for (oo, &po) in self.domain.obs_row(other, next, ai, aj).iter().enumerate() {
                    if po == 0.0 {
                        continue;
                    }
                    let y = node.next[k][oo] * ns + next;
                    for (o, &q) in own.iter().enumerate() {
                        if q > 0.0 {
                            out.push((y, o, p * pt * po * q));
                        }
                    }
                }
            }
        }
    }
}

/// Solves the I-DID exactly: models one level down are solved first, their
/// behaviors are expanded over the horizon (merging equivalent ones when
/// `prune` is set) and the subject plans over interactive states.
pub fn solve_idid(idid: &Idid) -> Result<IdidSolution> {
    if idid.horizon == 0 {
        return Err(Error::ZeroHorizon);
    }
    if idid.level == 0 {
        return Err(Error::Config("an I-DID has level at least 1".into()));
    }
    if idid.space.is_empty() {
        return Err(Error::EmptyModelSpace);
    }
    let other = idid.subject.other();
    for m in &idid.space.models {
        if m.level() + 1 != idid.level {
            return Err(Error::InvalidModel(format!(
                "level {} I-DID holds a level {} model",
                idid.level,
                m.level()
            )));
        }
    }
    let solved = solve_models(&idid.space, &idid.domain, other, idid.horizon)?;
    solve_with_behaviors(idid, &solved.iter().map(|s| &s.behavior).collect::<Vec<_>>(), &idid.space.weights)
}

pub(crate) fn solve_with_behaviors(idid: &Idid, roots: &[&Behavior], weights: &[f64]) -> Result<IdidSolution> {
    let lattice = Lattice::build(
        roots,
        weights,
        idid.horizon,
        idid.domain.n_observations(idid.subject.other()),
        idid.prune,
    )?;
    let view = InteractiveView { domain: &idid.domain, subject: idid.subject, lattice: &lattice };
    let b0 = view.initial_belief(&idid.belief);
    let sol = solve_did(&b0, &view, idid.horizon)?;
    Ok(IdidSolution {
        policy: sol.policy,
        value: sol.value,
        behavior: Some(sol.behavior),
        model_counts: lattice.counts(),
        weights: lattice.weights.clone(),
    })
}

/// A level-0 policy produced by learning, with its expected utility and
/// the partner policy it was learned against.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedPolicy {
    pub policy: PolicyTree,
    pub value: f64,
    pub partner: PolicyTree,
}

/// Level-0 space of a level-1 I-DID joined with learned models, cut to the
/// `top_k` models with the highest expected utility and reweighted.
///
/// A model's utility is the value the subject attains against it alone
/// from the subject's own belief, so traditional and learned models are
/// ranked on the same scale. Ties keep the original order (traditional
/// models first).
pub fn augmented_model_space(idid: &Idid, learned: &[LearnedPolicy]) -> Result<(ModelSpace, Vec<f64>)> {
    if idid.top_k < 1 {
        return Err(Error::Config("K must be at least 1".into()));
    }
    if idid.level != 1 {
        return Err(Error::Config("the level-0 space lives in a level-1 I-DID".into()));
    }
    let other = idid.subject.other();
    for l in learned {
        if l.policy.depth() != idid.horizon {
            return Err(Error::DepthMismatch(l.policy.depth(), idid.horizon));
        }
    }
    let solved = solve_models(&idid.space, &idid.domain, other, idid.horizon)?;
    let model_belief = Belief::new(idid.domain.initial().to_vec())?;
    let mut models: Vec<Level0Model> = Vec::new();
    for (m, s) in idid.space.models.iter().zip(solved) {
        let Model::Level0(m) = m else { unreachable!("level-1 spaces hold level-0 models") };
        models.push(Level0Model { solution: Some(s), ..m.clone() });
    }
    for l in learned {
        models.push(Level0Model::learned(
            model_belief.clone(),
            LearnerConfig::default().alpha,
            l.policy.clone(),
            l.partner.clone(),
            l.value,
        ));
    }
    let scores: Vec<f64> = models
        .par_iter()
        .map(|m| {
            let behavior = &m.solution.as_ref().expect("solved above").behavior;
            solve_with_behaviors(idid, &[behavior], &[1.0]).map(|s| s.value)
        })
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..models.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(idid.top_k);
    let kept_scores: Vec<f64> = order.iter().map(|&k| scores[k]).collect();
    let weights = assign_weights(&kept_scores, idid.weighting);
    let space = ModelSpace::new(order.iter().map(|&k| Model::Level0(models[k].clone())).collect(), weights)?;
    Ok((space, kept_scores))
}

/// Replaces every level-0 space at the bottom of the nesting by its
/// augmented version.
pub fn augment(idid: &Idid, learned: &[LearnedPolicy]) -> Result<Idid> {
    let mut out = idid.clone();
    if idid.level == 1 {
        out.space = augmented_model_space(idid, learned)?.0;
    } else {
        for m in &mut out.space.models {
            if let Model::Nested(nested) = m {
                **nested = augment(nested, learned)?;
            }
        }
    }
    Ok(out)
}

/// The I-DID solve with learned level-0 models joined to the traditional
/// ones. `learned` holds policies of the agent modeled at level 0.
pub fn solve_augmented_idid(idid: &Idid, learned: &[LearnedPolicy]) -> Result<IdidSolution> {
    if idid.top_k < 1 {
        return Err(Error::Config("K must be at least 1".into()));
    }
    solve_idid(&augment(idid, learned)?)
}
