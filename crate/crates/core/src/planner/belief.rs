use serde::{Deserialize, Serialize};

use super::pomdp::Pomdp;
use crate::domain::PROB_TOL;
use crate::error::{Error, Result};

/// Probability vector over the states of some [`Pomdp`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Belief(Vec<f64>);

impl Belief {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidModel("empty belief".into()));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidModel("belief has a negative or non-finite entry".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidModel(format!("belief sums to {sum}")));
        }
        Ok(Self(probs))
    }

    /// Normalizes nonnegative mass; fails on an all-zero vector.
    pub fn from_mass(mass: Vec<f64>) -> Option<Self> {
        let total: f64 = mass.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return None;
        }
        Some(Self(mass.into_iter().map(|m| m / total).collect()))
    }

    pub fn point(n: usize, s: usize) -> Self {
        let mut v = vec![0.0; n];
        v[s] = 1.0;
        Self(v)
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Entries with mass above zero.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.0.iter().copied().enumerate().filter(|(_, p)| *p > 0.0)
    }
}

impl std::ops::Index<usize> for Belief {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// One-step lookahead from a belief under a fixed action: expected reward
/// and, per observation, its probability and the unnormalized successor
/// mass over `n_states(t + 1)`.
pub struct Lookahead {
    pub reward: f64,
    pub branches: Vec<(f64, Vec<f64>)>,
}

pub fn lookahead<P: Pomdp + ?Sized>(model: &P, t: usize, b: &Belief, a: usize) -> Lookahead {
    let next_n = model.n_states(t + 1);
    let mut branches: Vec<(f64, Vec<f64>)> =
        (0..model.n_observations()).map(|_| (0.0, vec![0.0; next_n])).collect();
    let mut reward = 0.0;
    let mut buf = Vec::new();
    for (s, p) in b.support() {
        reward += p * model.reward(t, s, a);
        buf.clear();
        model.transitions(t, s, a, &mut buf);
        for &(next, o, q) in &buf {
            let m = p * q;
            branches[o].0 += m;
            branches[o].1[next] += m;
        }
    }
    Lookahead { reward, branches }
}

/// Bayes filter: `b'(s') ∝ Σ_s b(s) P(s', o | s, a)` at step `t`.
pub fn belief_update<P: Pomdp + ?Sized>(
    b: &Belief,
    a: usize,
    o: usize,
    model: &P,
    t: usize,
) -> Result<Belief> {
    let next_n = model.n_states(t + 1);
    let mut mass = vec![0.0; next_n];
    let mut buf = Vec::new();
    for (s, p) in b.support() {
        buf.clear();
        model.transitions(t, s, a, &mut buf);
        for &(next, obs, q) in &buf {
            if obs == o {
                mass[next] += p * q;
            }
        }
    }
    Belief::from_mass(mass).ok_or(Error::ImpossibleObservation { action: a, observation: o })
}
