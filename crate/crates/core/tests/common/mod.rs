//! Property checks shared by the property suite and the acceptance runner.

#![allow(dead_code)]

use std::sync::Arc;

use idid_core::domain::{build_domain, project, Agent, DomainModel};
use idid_core::idid::{
    assign_weights, expand_model_space, prior_model_space, prune_behavioral_eq, solve_model, Level0Model, Model,
    ModelSpace, Weighting,
};
use idid_core::mcesp::q_update;
use idid_core::planner::{
    belief_update, brute_force_oracle, joint_value, lookahead, solve_did, Belief, PlanningView, PolicyTree, Pomdp,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Check = std::result::Result<(), TestCaseError>;

/// Deterministic runner without regression files.
pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        rng_seed: RngSeed::Fixed(0x1d1d),
        failure_persistence: None,
        ..Config::default()
    })
}

#[derive(Debug, Clone)]
pub struct MabcParams {
    pub fill_i: f64,
    pub fill_j: f64,
    pub noise: f64,
}

pub fn mabc_params() -> impl Strategy<Value = MabcParams> {
    (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=0.5).prop_map(|(fill_i, fill_j, noise)| MabcParams { fill_i, fill_j, noise })
}

pub fn mabc(p: &MabcParams) -> Arc<DomainModel> {
    let params = serde_json::json!({"fill_i": p.fill_i, "fill_j": p.fill_j, "obs_noise": p.noise});
    Arc::new(build_domain("mabc", Some(&params)).unwrap())
}

/// A random MABC instance or one of the canonical grids.
pub fn any_domain() -> impl Strategy<Value = Arc<DomainModel>> {
    prop_oneof![
        mabc_params().prop_map(|p| mabc(&p)),
        Just(Arc::new(build_domain("grid1shot", None).unwrap())),
        Just(Arc::new(build_domain("grid3", None).unwrap())),
    ]
}

pub fn belief_inputs() -> impl Strategy<Value = (Arc<DomainModel>, Vec<f64>, usize, u64)> {
    (any_domain(), proptest::collection::vec(0.0f64..1.0, 256), 0usize..8, any::<u64>())
}

/// Bayes updates of random beliefs stay normalized, and observations of
/// zero likelihood are reported as errors.
pub fn belief_stays_normalized((domain, raw, action, seed): (Arc<DomainModel>, Vec<f64>, usize, u64)) -> Check {
    let ns = domain.n_states();
    let mut mass = raw[..ns].to_vec();
    mass[(seed as usize) % ns] += 1e-3;
    let b = Belief::from_mass(mass).unwrap();
    prop_assert!((b.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let view = PlanningView::uniform(domain.clone(), Agent::I);
    let a = action % view.n_actions();
    let step = lookahead(&view, 0, &b, a);
    for (o, (p, _)) in step.branches.iter().enumerate() {
        match belief_update(&b, a, o, &view, 0) {
            Ok(next) => {
                prop_assert!(*p > 0.0);
                prop_assert_eq!(next.len(), view.n_states(1));
                prop_assert!(next.probs().iter().all(|x| x.is_finite() && *x >= 0.0));
                prop_assert!((next.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
            Err(_) => prop_assert_eq!(*p, 0.0),
        }
    }
    Ok(())
}

fn solved_prior(domain: &Arc<DomainModel>, resolution: usize, horizon: usize) -> ModelSpace {
    let ms = prior_model_space(domain, Agent::J, resolution).unwrap();
    let models = ms
        .models
        .iter()
        .map(|m| {
            let Model::Level0(l) = m else { unreachable!() };
            let solution = solve_model(m, domain, Agent::J, horizon).unwrap();
            Model::Level0(Level0Model { solution: Some(solution), ..l.clone() })
        })
        .collect();
    ModelSpace::new(models, ms.weights).unwrap()
}

pub fn weight_inputs() -> impl Strategy<Value = (MabcParams, usize, usize, Vec<f64>)> {
    (mabc_params(), 0usize..=4, 2usize..=3, proptest::collection::vec(-50.0f64..50.0, 1..12))
}

/// Model weights stay a distribution through expansion, pruning and
/// weighting.
pub fn weights_are_conserved((params, resolution, horizon, utilities): (MabcParams, usize, usize, Vec<f64>)) -> Check {
    let domain = mabc(&params);
    let ms = solved_prior(&domain, resolution, horizon);
    prop_assert!((ms.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let expanded = expand_model_space(&ms, &domain, Agent::J, 0).unwrap();
    prop_assert!((expanded.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let pruned = prune_behavioral_eq(&expanded).unwrap();
    prop_assert!(pruned.len() <= expanded.len());
    prop_assert!((pruned.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    for scheme in [Weighting::Uniform, Weighting::Diverse] {
        let w = assign_weights(&utilities, scheme);
        prop_assert!(w.iter().all(|x| *x > 0.0));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
    Ok(())
}

pub fn tree_inputs() -> impl Strategy<Value = (u64, usize, MabcParams)> {
    (any::<u64>(), 1usize..=3, mabc_params())
}

/// Policy trees built by indexing, flattening, planning and enumeration
/// are complete over the observation set.
pub fn trees_are_complete((index, depth, params): (u64, usize, MabcParams)) -> Check {
    let count = PolicyTree::count(2, 2, depth) as u64;
    let tree = PolicyTree::from_index(index % count, 2, 2, depth);
    prop_assert!(tree.is_complete(2));
    prop_assert_eq!(tree.depth(), depth);
    let flat = tree.flatten(2);
    prop_assert_eq!(flat.len(), PolicyTree::complete_node_count(2, depth));
    prop_assert!(flat.to_tree(&tree.bfs_actions()).same_behavior(&tree));
    prop_assert!(PolicyTree::from_bfs_actions(&tree.bfs_actions(), 2, depth).same_behavior(&tree));

    let domain = mabc(&params);
    let view = PlanningView::uniform(domain.clone(), Agent::J);
    let b = Belief::new(domain.initial().to_vec()).unwrap();
    let planned = solve_did(&b, &view, depth).unwrap();
    prop_assert!(planned.policy.is_complete(2));
    prop_assert_eq!(planned.policy.depth(), depth);
    if depth <= 2 {
        let oracle = brute_force_oracle(&domain, depth).unwrap();
        prop_assert!(oracle.policy_i.is_complete(2) && oracle.policy_j.is_complete(2));
    }
    Ok(())
}

pub fn q_inputs() -> impl Strategy<Value = (f64, f64, f64)> {
    (-1e3f64..1e3, -1e3f64..1e3, 0.0f64..=1.0)
}

pub fn q_update_is_convex((q, ret, alpha): (f64, f64, f64)) -> Check {
    let r = q_update(q, alpha, ret);
    prop_assert!(r >= q.min(ret) - 1e-9 && r <= q.max(ret) + 1e-9);
    Ok(())
}

pub fn projection_inputs() -> impl Strategy<Value = (MabcParams, u64, u64)> {
    (mabc_params(), any::<u64>(), any::<u64>())
}

/// Episodes sampled through j's projected environment average to the
/// exact joint value within three standard errors.
pub fn projection_is_sound((params, policy_seed, sample_seed): (MabcParams, u64, u64)) -> Check {
    const EPISODES: usize = 4000;
    let domain = mabc(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(policy_seed);
    let pi_i = PolicyTree::random(&mut rng, 2, 2, 3);
    let pi_j = PolicyTree::random(&mut rng, 2, 2, 3);
    let exact = joint_value(&domain, &pi_i, &pi_j).unwrap().value;
    let env = project(domain.clone(), &pi_i, Agent::J);
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
    let mut returns = Vec::with_capacity(EPISODES);
    for _ in 0..EPISODES {
        let mut state = env.reset(&mut rng);
        let mut node = &pi_j;
        let mut total = 0.0;
        for t in 0..3 {
            let out = env.step(state, node.action, &mut rng).unwrap();
            total += out.reward;
            state = out.next;
            if t < 2 {
                node = &node.children[out.obs];
            }
        }
        returns.push(total);
    }
    let n = EPISODES as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    prop_assert!((mean - exact).abs() <= 3.0 * se + 1e-9, "mean {} exact {} se {}", mean, exact, se);
    Ok(())
}
