use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;

use crate::domain::{Agent, DomainModel};
use crate::error::{Error, Result};
use crate::idid::{solve_models, ModelSpace};
use crate::planner::{
    belief_update, sample_index, sample_sparse, solve_did_from, Behavior, Belief, PlanningView, PolicyTree, Pomdp,
};

/// One decision point of a teammate model.
#[derive(Debug, Clone)]
pub struct GraphNode {
    pub model: usize,
    pub actions: Vec<usize>,
    /// `next[k][o]` after `actions[k]` and teammate observation `o`; the
    /// last step of a model returns to its root.
    pub next: Vec<Vec<usize>>,
}

/// Teammate models unrolled into their decision points, each replayed
/// from its root once its horizon runs out.
#[derive(Debug, Clone)]
pub struct ModelGraph {
    pub nodes: Vec<GraphNode>,
    pub roots: Vec<usize>,
    pub weights: Vec<f64>,
    /// Behavior of each model, for identifying a teammate.
    pub behaviors: Vec<Behavior>,
}

impl ModelGraph {
    /// Behaviorally equivalent models are merged, summing their weights.
    pub fn new(behaviors: &[Behavior], weights: &[f64], n_obs: usize) -> Result<Self> {
        if behaviors.is_empty() {
            return Err(Error::EmptyModelSpace);
        }
        let mut distinct: Vec<Behavior> = Vec::new();
        let mut merged: Vec<f64> = Vec::new();
        let mut seen: HashMap<&Behavior, usize> = HashMap::new();
        for (b, &w) in behaviors.iter().zip(weights) {
            match seen.get(b) {
                Some(&k) => merged[k] += w,
                None => {
                    seen.insert(b, distinct.len());
                    distinct.push(b.clone());
                    merged.push(w);
                }
            }
        }
        let mut nodes = Vec::new();
        let mut roots = Vec::new();
        for (m, b) in distinct.iter().enumerate() {
            let root = nodes.len();
            roots.push(root);
            unroll(b, m, root, n_obs, &mut nodes);
        }
        Ok(Self { nodes, roots, weights: merged, behaviors: distinct })
    }

    pub fn n_models(&self) -> usize {
        self.roots.len()
    }

    /// Index of the model that behaves like `policy`, if any.
    pub fn find(&self, policy: &PolicyTree) -> Option<usize> {
        let b = Behavior::from_policy(policy);
        self.behaviors.iter().position(|x| *x == b)
    }
}

fn unroll(b: &Behavior, model: usize, root: usize, n_obs: usize, nodes: &mut Vec<GraphNode>) -> usize {
    let id = nodes.len();
    nodes.push(GraphNode { model, actions: b.actions.clone(), next: Vec::new() });
    let next = if b.children.is_empty() {
        vec![vec![root; n_obs]; b.actions.len()]
    } else {
        b.children
            .iter()
            .map(|row| row.iter().map(|c| unroll(c, model, root, n_obs, nodes)).collect())
            .collect()
    };
    nodes[id].next = next;
    id
}

/// The planning agent's problem over `(model node, world state)`, indexed
/// `node * |S| + s`. The teammate picks uniformly among a node's tied
/// actions.
pub struct CyclicTeamView<'a> {
    pub domain: &'a DomainModel,
    pub graph: &'a ModelGraph,
}

impl Pomdp for CyclicTeamView<'_> {
    fn n_states(&self, _t: usize) -> usize {
        self.domain.n_states() * self.graph.nodes.len()
    }

    fn n_actions(&self) -> usize {
        self.domain.n_actions(Agent::I)
    }

    fn n_observations(&self) -> usize {
        self.domain.n_observations(Agent::I)
    }

    fn reward(&self, _t: usize, x: usize, a: usize) -> f64 {
        let ns = self.domain.n_states();
        let node = &self.graph.nodes[x / ns];
        let p = 1.0 / node.actions.len() as f64;
        node.actions.iter().map(|&b| p * self.domain.reward(x % ns, a, b)).sum()
    }

    fn transitions(&self, _t: usize, x: usize, a: usize, out: &mut Vec<(usize, usize, f64)>) {
        let ns = self.domain.n_states();
        let node = &self.graph.nodes[x / ns];
        let s = x % ns;
        let p = 1.0 / node.actions.len() as f64;
        for (k, &b) in node.actions.iter().enumerate() {
            for &(next, pt) in self.domain.successors(s, a, b) {
                let own = self.domain.obs_row(Agent::I, next, a, b);
                for (oj, &po) in self.domain.obs_row(Agent::J, next, a, b).iter().enumerate() {
                    if po == 0.0 {
                        continue;
                    }
                    let y = node.next[k][oj] * ns + next;
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

/// Receding-horizon I-DID agent: plans `lookahead` steps over its
/// interactive belief (undiscounted, like the offline solve), then filters
/// it on its own observation.
#[derive(Debug, Clone)]
pub struct IdidAgent {
    pub domain: Arc<DomainModel>,
    pub graph: ModelGraph,
    pub lookahead: usize,
}

impl IdidAgent {
    /// Solves every model of `space` (models of j) at the lookahead.
    pub fn from_space(domain: Arc<DomainModel>, space: &ModelSpace, lookahead: usize) -> Result<Self> {
        if lookahead == 0 {
            return Err(Error::ZeroHorizon);
        }
        let solved = solve_models(space, &domain, Agent::J, lookahead)?;
        let behaviors: Vec<Behavior> = solved.into_iter().map(|s| s.behavior).collect();
        let graph = ModelGraph::new(&behaviors, &space.weights, domain.n_observations(Agent::J))?;
        Ok(Self { domain, graph, lookahead })
    }

    fn view(&self) -> CyclicTeamView<'_> {
        CyclicTeamView { domain: &self.domain, graph: &self.graph }
    }

    /// Prior weights at the model roots times a belief over world states.
    pub fn interactive_belief(&self, states: &Belief) -> Belief {
        let ns = self.domain.n_states();
        let mut b = vec![0.0; ns * self.graph.nodes.len()];
        for (m, &w) in self.graph.weights.iter().enumerate() {
            for (s, p) in states.support() {
                b[self.graph.roots[m] * ns + s] = w * p;
            }
        }
        Belief::from_mass(b).expect("weights and belief are distributions")
    }

    pub fn plan(&self, belief: &Belief, horizon: usize) -> Result<usize> {
        Ok(solve_did_from(belief, &self.view(), 0, horizon, 1.0)?.policy.action)
    }

    pub fn update(&self, belief: &Belief, a: usize, o: usize) -> Result<Belief> {
        belief_update(belief, a, o, &self.view(), 0)
    }

    pub fn model_marginal(&self, belief: &Belief) -> Vec<f64> {
        let ns = self.domain.n_states();
        let mut out = vec![0.0; self.graph.n_models()];
        for (x, p) in belief.support() {
            out[self.graph.nodes[x / ns].model] += p;
        }
        out
    }
}

/// Rollout baseline that assumes an optimal teammate: each own action is
/// scored by rollouts in which the agent then follows its side of the
/// optimal joint policy and the teammate plays the other side from its
/// root.
#[derive(Debug, Clone)]
pub struct OpatAgent {
    pub domain: Arc<DomainModel>,
    pub policy_i: PolicyTree,
    pub policy_j: PolicyTree,
    pub rollouts: usize,
}

impl OpatAgent {
    pub fn filter(&self, states: &Belief, a: usize, o: usize) -> Result<Belief> {
        belief_update(states, a, o, &PlanningView::uniform(self.domain.clone(), Agent::I), 0)
    }

    pub fn plan<R: Rng + ?Sized>(&self, states: &Belief, lookahead: usize, rng: &mut R) -> Result<usize> {
        opat_po_step(states, &self.domain, &self.policy_i, &self.policy_j, lookahead, self.rollouts, rng)
    }
}

/// Monte Carlo rollout best response against an optimal teammate. Returns
/// the smallest action with the highest mean return.
pub fn opat_po_step<R: Rng + ?Sized>(
    states: &Belief,
    domain: &DomainModel,
    policy_i: &PolicyTree,
    policy_j: &PolicyTree,
    lookahead: usize,
    rollouts: usize,
    rng: &mut R,
) -> Result<usize> {
    if rollouts == 0 {
        return Err(Error::Config("at least one rollout is required".into()));
    }
    let depth = lookahead.min(policy_j.depth()).max(1);
    let mut best = (0, f64::NEG_INFINITY);
    for a in 0..domain.n_actions(Agent::I) {
        let mut total = 0.0;
        for _ in 0..rollouts {
            let mut s = sample_index(rng, states.probs());
            let (mut ti, mut tj) = (policy_i, policy_j);
            let mut ai = a;
            for k in 0..depth {
                let aj = tj.action;
                total += domain.reward(s, ai, aj);
                if k + 1 == depth {
                    break;
                }
                s = sample_sparse(rng, domain.successors(s, ai, aj));
                let oi = sample_index(rng, domain.obs_row(Agent::I, s, ai, aj));
                let oj = sample_index(rng, domain.obs_row(Agent::J, s, ai, aj));
                ti = ti.children.get(oi).unwrap_or(ti);
                tj = tj.children.get(oj).unwrap_or(tj);
                ai = ti.action;
            }
        }
        let mean = total / rollouts as f64;
        if mean > best.1 {
            best = (a, mean);
        }
    }
    Ok(best.0)
}
