use rand::Rng;
use serde::{Deserialize, Serialize};

use super::policy::{FlatPolicy, PolicyTree, END};
use crate::domain::{Agent, DomainModel};
use crate::error::{Error, Result};

/// Mass below which forward enumeration drops a branch.
pub const PRUNE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueReport {
    pub value: f64,
    /// Expected team reward at each step, undiscounted.
    pub per_step: Vec<f64>,
}

impl ValueReport {
    pub fn from_steps(per_step: Vec<f64>, discount: f64) -> Self {
        let value = per_step
            .iter()
            .enumerate()
            .map(|(t, r)| discount.powi(t as i32) * r)
            .sum();
        Self { value, per_step }
    }
}

/// Exact undiscounted value of a joint policy from the initial distribution.
pub fn joint_value(model: &DomainModel, pi_i: &PolicyTree, pi_j: &PolicyTree) -> Result<ValueReport> {
    joint_value_from(model, model.initial(), pi_i, pi_j, 1.0)
}

pub fn joint_value_from(
    model: &DomainModel,
    initial: &[f64],
    pi_i: &PolicyTree,
    pi_j: &PolicyTree,
    discount: f64,
) -> Result<ValueReport> {
    let fi = pi_i.flatten(model.n_observations(Agent::I));
    let fj = pi_j.flatten(model.n_observations(Agent::J));
    joint_value_flat(model, initial, &fi, &fj, discount)
}

/// Forward enumeration over `(state, node_i, node_j)`.
pub fn joint_value_flat(
    model: &DomainModel,
    initial: &[f64],
    fi: &FlatPolicy,
    fj: &FlatPolicy,
    discount: f64,
) -> Result<ValueReport> {
    if fi.depth() != fj.depth() {
        return Err(Error::DepthMismatch(fi.depth(), fj.depth()));
    }
    let ns = model.n_states();
    let (ni, nj) = (fi.len(), fj.len());
    let key = |s: usize, x: usize, y: usize| (s * ni + x) * nj + y;
    let mut current: Vec<(usize, usize, usize, f64)> = initial
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > PRUNE_EPS)
        .map(|(s, &p)| (s, 0, 0, p))
        .collect();
    let mut per_step = Vec::with_capacity(fi.depth());
    let mut mass = vec![0.0; ns * ni * nj];
    let mut touched = Vec::new();
    for _ in 0..fi.depth() {
        let mut r = 0.0;
        for &(s, x, y, p) in &current {
            let (ai, aj) = (fi.actions[x], fj.actions[y]);
            r += p * model.reward(s, ai, aj);
            for &(next, pt) in model.successors(s, ai, aj) {
                let oi_row = model.obs_row(Agent::I, next, ai, aj);
                let oj_row = model.obs_row(Agent::J, next, ai, aj);
                for (oi, &po_i) in oi_row.iter().enumerate() {
                    if po_i == 0.0 {
                        continue;
                    }
                    let cx = fi.child(x, oi);
                    if cx == END {
                        continue;
                    }
                    for (oj, &po_j) in oj_row.iter().enumerate() {
                        if po_j == 0.0 {
                            continue;
                        }
                        let k = key(next, cx, fj.child(y, oj));
                        if mass[k] == 0.0 {
                            touched.push(k);
                        }
                        mass[k] += p * pt * po_i * po_j;
                    }
                }
            }
        }
        per_step.push(r);
        touched.sort_unstable();
        current.clear();
        for &k in &touched {
            let p = std::mem::take(&mut mass[k]);
            if p > PRUNE_EPS {
                current.push((k / (ni * nj), (k / nj) % ni, k % nj, p));
            }
        }
        touched.clear();
    }
    Ok(ValueReport::from_steps(per_step, discount))
}

fn sample<R: Rng + ?Sized>(rng: &mut R, probs: impl IntoIterator<Item = (usize, f64)>) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (k, p) in probs {
        acc += p;
        last = k;
        if u < acc {
            return k;
        }
    }
    last
}

/// Draws an index from a dense probability vector.
pub fn sample_index<R: Rng + ?Sized>(rng: &mut R, probs: &[f64]) -> usize {
    sample(rng, probs.iter().copied().enumerate().filter(|(_, p)| *p > 0.0))
}

/// Draws one successor from a sparse `(index, prob)` list.
pub fn sample_sparse<R: Rng + ?Sized>(rng: &mut R, probs: &[(usize, f64)]) -> usize {
    sample(rng, probs.iter().copied())
}

/// One simulated episode of a joint policy; returns the undiscounted total.
pub fn simulate_joint<R: Rng + ?Sized>(
    model: &DomainModel,
    pi_i: &PolicyTree,
    pi_j: &PolicyTree,
    rng: &mut R,
) -> f64 {
    let mut s = sample_index(rng, model.initial());
    let (mut ti, mut tj) = (pi_i, pi_j);
    let mut total = 0.0;
    loop {
        let (ai, aj) = (ti.action, tj.action);
        total += model.reward(s, ai, aj);
        if ti.children.is_empty() || tj.children.is_empty() {
            return total;
        }
        s = sample_sparse(rng, model.successors(s, ai, aj));
        let oi = sample_index(rng, model.obs_row(Agent::I, s, ai, aj));
        let oj = sample_index(rng, model.obs_row(Agent::J, s, ai, aj));
        ti = &ti.children[oi];
        tj = &tj.children[oj];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, build_one_shot_grid, GRID_ACTIONS};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid_act(label: &str) -> usize {
        GRID_ACTIONS.iter().position(|a| *a == label).unwrap()
    }

    #[test]
    fn one_shot_greedy_pair_is_thirty() {
        let d = build_one_shot_grid();
        let r = joint_value(&d, &PolicyTree::leaf(grid_act("MW")), &PolicyTree::leaf(grid_act("MS"))).unwrap();
        assert_eq!(r.value, 30.0);
        assert_eq!(r.per_step, vec![30.0]);
    }

    #[test]
    fn depth_mismatch_is_an_error() {
        let d = build_domain("mabc", None).unwrap();
        let a = PolicyTree::constant(0, 2, 2);
        let b = PolicyTree::constant(0, 3, 2);
        assert!(matches!(joint_value(&d, &a, &b), Err(Error::DepthMismatch(2, 3))));
    }

    #[test]
    fn swapping_agents_on_a_symmetric_grid() {
        // Canonical grid3 maps onto itself under the point reflection that
        // swaps the two start corners; moves map MS<->MN, ME<->MW.
        let d = build_domain("grid3", None).unwrap();
        let mirror = [1, 0, 3, 2, 4];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = PolicyTree::random(&mut rng, 5, 3, 2);
            let b = PolicyTree::random(&mut rng, 5, 3, 2);
            let reflect = |t: &PolicyTree| {
                // Column 0 <-> column 2 swaps the LW and RW signals.
                let obs = [1, 0, 2];
                let bfs: Vec<usize> = t.bfs_actions().iter().map(|&x| mirror[x]).collect();
                let tree = PolicyTree::from_bfs_actions(&bfs, 3, 2);
                PolicyTree {
                    action: tree.action,
                    reachable: true,
                    children: (0..3).map(|o| tree.children[obs[o]].clone()).collect(),
                }
            };
            let v1 = joint_value(&d, &a, &b).unwrap().value;
            let v2 = joint_value(&d, &reflect(&b), &reflect(&a)).unwrap().value;
            assert!((v1 - v2).abs() < 1e-9);
        }
    }

    #[test]
    fn value_is_the_discounted_sum_of_steps() {
        let d = build_domain("mabc", None).unwrap();
        let a = PolicyTree::open_loop(&[0, 1, 0], 2);
        let b = PolicyTree::open_loop(&[1, 0, 1], 2);
        let r = joint_value_from(&d, d.initial(), &a, &b, 0.5).unwrap();
        let expect: f64 = r.per_step.iter().enumerate().map(|(t, x)| 0.5f64.powi(t as i32) * x).sum();
        assert!((r.value - expect).abs() < 1e-12);
    }

    #[test]
    fn mabc_open_loop_schedule_by_hand() {
        // i sends, j sends, i sends: 1 + 1 + 0.99, i's buffer had two
        // chances to refill.
        let d = build_domain("mabc", None).unwrap();
        let a = PolicyTree::open_loop(&[0, 1, 0], 2);
        let b = PolicyTree::open_loop(&[1, 0, 1], 2);
        let r = joint_value(&d, &a, &b).unwrap();
        assert!((r.value - 2.99).abs() < 1e-12, "{:?}", r);
    }
}
