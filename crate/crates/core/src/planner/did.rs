use super::belief::{lookahead, Belief};
use super::policy::PolicyTree;
use super::pomdp::Pomdp;
use crate::error::{Error, Result};

/// Observation branches with less mass than this are treated as
/// unreachable.
pub const BRANCH_EPS: f64 = 1e-12;

/// Relative tolerance under which two action values count as tied.
pub const TIE_TOL: f64 = 1e-9;

/// Every optimal course of action of a solved model: the tied optimal
/// actions at this node and, for each of them, one child per observation.
///
/// `children` is empty at the last step; otherwise `children[k][o]`
/// follows `actions[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Behavior {
    pub actions: Vec<usize>,
    pub children: Vec<Vec<Behavior>>,
}

impl Behavior {
    /// Deterministic behavior that follows a policy tree.
    pub fn from_policy(tree: &PolicyTree) -> Behavior {
        let children = if tree.children.is_empty() {
            Vec::new()
        } else {
            vec![tree.children.iter().map(Behavior::from_policy).collect()]
        };
        Behavior { actions: vec![tree.action], children }
    }

    /// Stand-in for branches the model considers impossible.
    pub fn default_for(depth: usize, n_obs: usize) -> Behavior {
        Behavior::from_policy(&PolicyTree::constant(0, depth, n_obs))
    }

    pub fn depth(&self) -> usize {
        1 + self.children.first().and_then(|c| c.first()).map_or(0, |c| c.depth())
    }

    /// Tree formed by always taking the smallest tied action.
    pub fn first_policy(&self) -> PolicyTree {
        PolicyTree {
            action: self.actions[0],
            reachable: true,
            children: self
                .children
                .first()
                .map(|row| row.iter().map(|c| c.first_policy()).collect())
                .unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DidSolution {
    pub policy: PolicyTree,
    pub value: f64,
    pub behavior: Behavior,
}

/// Exact optimal depth-`horizon` policy from `b0`, undiscounted.
pub fn solve_did<P: Pomdp + ?Sized>(b0: &Belief, model: &P, horizon: usize) -> Result<DidSolution> {
    solve_did_from(b0, model, 0, horizon, 1.0)
}

/// Dynamic programming over the belief tree rooted at `b0` at step `t0`.
/// Rewards `k` steps after `t0` are weighted by `discount^k`.
pub fn solve_did_from<P: Pomdp + ?Sized>(
    b0: &Belief,
    model: &P,
    t0: usize,
    horizon: usize,
    discount: f64,
) -> Result<DidSolution> {
    if horizon == 0 {
        return Err(Error::ZeroHorizon);
    }
    if b0.len() != model.n_states(t0) {
        return Err(Error::InvalidModel(format!(
            "belief has {} entries, model has {} states",
            b0.len(),
            model.n_states(t0)
        )));
    }
    Ok(solve_node(model, b0, t0, horizon, discount))
}

fn solve_node<P: Pomdp + ?Sized>(
    model: &P,
    b: &Belief,
    t: usize,
    remaining: usize,
    discount: f64,
) -> DidSolution {
    let n_obs = model.n_observations();
    let mut options: Vec<(f64, Vec<Option<DidSolution>>)> = Vec::with_capacity(model.n_actions());
    for a in 0..model.n_actions() {
        let step = lookahead(model, t, b, a);
        let mut value = step.reward;
        let mut children = Vec::new();
        if remaining > 1 {
            for (p, mass) in step.branches {
                if p > BRANCH_EPS {
                    let next = Belief::from_mass(mass).expect("branch has positive mass");
                    let child = solve_node(model, &next, t + 1, remaining - 1, discount);
                    value += discount * p * child.value;
                    children.push(Some(child));
                } else {
                    children.push(None);
                }
            }
        }
        options.push((value, children));
    }
    let best = options.iter().map(|o| o.0).fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_TOL * best.abs().max(1.0);
    let tied: Vec<usize> = (0..options.len()).filter(|&a| options[a].0 >= best - tol).collect();
    let chosen = tied[0];

    let policy_children = |children: &[Option<DidSolution>]| -> Vec<PolicyTree> {
        children
            .iter()
            .map(|c| match c {
                Some(c) => c.policy.clone(),
                None => PolicyTree::unreachable(remaining - 1, n_obs),
            })
            .collect()
    };
    let behavior_children = |children: &[Option<DidSolution>]| -> Vec<Behavior> {
        children
            .iter()
            .map(|c| match c {
                Some(c) => c.behavior.clone(),
                None => Behavior::default_for(remaining - 1, n_obs),
            })
            .collect()
    };
    let behavior = Behavior {
        actions: tied.clone(),
        children: if remaining > 1 {
            tied.iter().map(|&a| behavior_children(&options[a].1)).collect()
        } else {
            Vec::new()
        },
    };
    DidSolution {
        policy: PolicyTree {
            action: chosen,
            reachable: true,
            children: policy_children(&options[chosen].1),
        },
        value: options[chosen].0,
        behavior,
    }
}

/// Expected value of following `policy` from `b0` at step `t0`.
pub fn evaluate_policy<P: Pomdp + ?Sized>(
    b0: &Belief,
    model: &P,
    policy: &PolicyTree,
    t0: usize,
    discount: f64,
) -> f64 {
    let step = lookahead(model, t0, b0, policy.action);
    let mut value = step.reward;
    if !policy.children.is_empty() {
        for (o, (p, mass)) in step.branches.into_iter().enumerate() {
            if p > BRANCH_EPS {
                let next = Belief::from_mass(mass).expect("branch has positive mass");
                value += discount * p * evaluate_policy(&next, model, &policy.children[o], t0 + 1, discount);
            }
        }
    }
    value
}
