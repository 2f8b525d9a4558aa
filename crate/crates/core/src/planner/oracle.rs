use rayon::prelude::*;

use super::joint::{joint_value_flat, ValueReport};
use super::policy::{FlatPolicy, PolicyTree};
use crate::domain::{Agent, DomainModel};
use crate::error::{Error, Result};

/// Largest number of complete policy trees enumerated per agent.
pub const TREE_LIMIT: u64 = 100_000;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub policy_i: PolicyTree,
    pub policy_j: PolicyTree,
    pub report: ValueReport,
}

/// Number of trees for one agent, or the guard error.
pub fn tree_count(model: &DomainModel, agent: Agent, horizon: usize) -> Result<u64> {
    let na = model.n_actions(agent);
    let nodes = PolicyTree::complete_node_count(model.n_observations(agent), horizon);
    let estimate = PolicyTree::count(na, model.n_observations(agent), horizon);
    if estimate > TREE_LIMIT as f64 {
        return Err(Error::TooLarge {
            per_agent: format!("{na}^{nodes}"),
            estimate,
            limit: TREE_LIMIT,
        });
    }
    Ok(estimate as u64)
}

/// Exhaustive search over all pairs of complete depth-`horizon` trees.
///
/// Pairs are ranked by value; among pairs within 1e-9 of each other the
/// first in enumeration order (i-major) wins.
pub fn brute_force_oracle(model: &DomainModel, horizon: usize) -> Result<OracleResult> {
    if horizon == 0 {
        return Err(Error::ZeroHorizon);
    }
    let count_i = tree_count(model, Agent::I, horizon)?;
    let count_j = tree_count(model, Agent::J, horizon)?;
    let (na_i, no_i) = (model.n_actions(Agent::I), model.n_observations(Agent::I));
    let (na_j, no_j) = (model.n_actions(Agent::J), model.n_observations(Agent::J));
    let flat_j: Vec<FlatPolicy> = (0..count_j)
        .map(|k| PolicyTree::from_index(k, na_j, no_j, horizon).flatten(no_j))
        .collect();
    let rows: Vec<Result<(usize, f64)>> = (0..count_i)
        .into_par_iter()
        .map(|k| {
            let fi = PolicyTree::from_index(k, na_i, no_i, horizon).flatten(no_i);
            let mut best = (0, f64::NEG_INFINITY);
            for (y, fj) in flat_j.iter().enumerate() {
                let v = joint_value_flat(model, model.initial(), &fi, fj, 1.0)?.value;
                if v > best.1 + 1e-9 {
                    best = (y, v);
                }
            }
            Ok(best)
        })
        .collect();
    let mut best = (0u64, 0usize, f64::NEG_INFINITY);
    for (x, row) in rows.into_iter().enumerate() {
        let (y, v) = row?;
        if v > best.2 + 1e-9 {
            best = (x as u64, y, v);
        }
    }
    let policy_i = PolicyTree::from_index(best.0, na_i, no_i, horizon);
    let policy_j = PolicyTree::from_index(best.1 as u64, na_j, no_j, horizon);
    let report = joint_value_flat(
        model,
        model.initial(),
        &policy_i.flatten(no_i),
        &policy_j.flatten(no_j),
        1.0,
    )?;
    Ok(OracleResult { policy_i, policy_j, report })
}

/// Best response of `agent` to a fixed policy of the other agent, by
/// enumeration. Returns the first maximizer in enumeration order.
pub fn enumerate_best_response(
    model: &DomainModel,
    agent: Agent,
    other: &PolicyTree,
) -> Result<(PolicyTree, f64)> {
    let horizon = other.depth();
    let count = tree_count(model, agent, horizon)?;
    let (na, no) = (model.n_actions(agent), model.n_observations(agent));
    let other_flat = other.flatten(model.n_observations(agent.other()));
    let values: Vec<Result<f64>> = (0..count)
        .into_par_iter()
        .map(|k| {
            let own = PolicyTree::from_index(k, na, no, horizon).flatten(no);
            let v = match agent {
                Agent::I => joint_value_flat(model, model.initial(), &own, &other_flat, 1.0)?,
                Agent::J => joint_value_flat(model, model.initial(), &other_flat, &own, 1.0)?,
            };
            Ok(v.value)
        })
        .collect();
    let mut best = (0u64, f64::NEG_INFINITY);
    for (k, v) in values.into_iter().enumerate() {
        let v = v?;
        if v > best.1 + 1e-9 {
            best = (k as u64, v);
        }
    }
    Ok((PolicyTree::from_index(best.0, na, no, horizon), best.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, build_one_shot_grid, GRID_ACTIONS};

    #[test]
    fn one_shot_grid_optimum_is_the_meeting() {
        let d = build_one_shot_grid();
        let r = brute_force_oracle(&d, 1).unwrap();
        assert_eq!(GRID_ACTIONS[r.policy_i.action], "ME");
        assert_eq!(GRID_ACTIONS[r.policy_j.action], "MN");
        assert_eq!(r.report.value, 40.0);
    }

    #[test]
    fn horizon_one_is_the_best_joint_action() {
        for name in ["mabc", "grid3", "bp"] {
            let d = build_domain(name, None).unwrap();
            let r = brute_force_oracle(&d, 1).unwrap();
            let mut best = f64::NEG_INFINITY;
            for ai in 0..d.n_actions(Agent::I) {
                for aj in 0..d.n_actions(Agent::J) {
                    let v: f64 = (0..d.n_states()).map(|s| d.initial()[s] * d.reward(s, ai, aj)).sum();
                    best = best.max(v);
                }
            }
            assert!((r.report.value - best).abs() < 1e-9, "{name}");
        }
    }

    #[test]
    fn guard_reports_the_tree_count() {
        let d = build_domain("grid3", None).unwrap();
        match brute_force_oracle(&d, 3) {
            Err(Error::TooLarge { per_agent, estimate, .. }) => {
                assert_eq!(per_agent, "5^13");
                assert_eq!(estimate, 5f64.powi(13));
            }
            other => panic!("expected the guard, got {other:?}"),
        }
    }

    #[test]
    fn value_does_not_depend_on_action_order() {
        let d = build_domain("mabc", None).unwrap();
        let p = d.permute_actions(&[1, 0], &[1, 0]).unwrap();
        let a = brute_force_oracle(&d, 2).unwrap().report.value;
        let b = brute_force_oracle(&p, 2).unwrap().report.value;
        assert!((a - b).abs() < 1e-9);
    }
}
