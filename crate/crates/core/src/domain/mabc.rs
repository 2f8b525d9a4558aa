//! Multi-access broadcast channel.
//!
//! Each node has a one-message buffer. A message goes through when exactly
//! one node sends and its buffer is full; two simultaneous send attempts
//! collide. Empty buffers refill with a per-node probability after every
//! step. Each node receives a noisy collision signal.

use serde::{Deserialize, Serialize};

use super::{DomainModel, DomainTables};
use crate::error::{Error, Result};

pub const SEND: usize = 0;
pub const WAIT: usize = 1;
pub const COLLISION: usize = 0;
pub const NO_COLLISION: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MabcConfig {
    /// Refill probability of agent i's buffer.
    pub fill_i: f64,
    /// Refill probability of agent j's buffer.
    pub fill_j: f64,
    /// Probability that the collision signal is flipped.
    pub obs_noise: f64,
    /// Initial distribution over `(buffer_i, buffer_j)` full flags, indexed
    /// `2 * full_i + full_j`.
    pub initial: [f64; 4],
    pub discount: f64,
}

impl Default for MabcConfig {
    fn default() -> Self {
        Self {
            fill_i: 0.9,
            fill_j: 0.1,
            obs_noise: 0.1,
            initial: [0.0, 0.0, 0.0, 1.0],
            discount: 0.95,
        }
    }
}

/// State index of the `(full_i, full_j)` buffer configuration.
pub fn state_index(full_i: bool, full_j: bool) -> usize {
    2 * full_i as usize + full_j as usize
}

impl MabcConfig {
    pub fn build(&self) -> Result<DomainModel> {
        for (name, p) in [
            ("fill_i", self.fill_i),
            ("fill_j", self.fill_j),
            ("obs_noise", self.obs_noise),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParams(format!("{name} = {p} is not a probability")));
            }
        }
        let ns = 4;
        let labels = ["empty", "full"];
        let state_labels = (0..ns)
            .map(|s| format!("i:{}/j:{}", labels[s / 2], labels[s % 2]))
            .collect();
        let actions = vec!["send".to_string(), "wait".to_string()];
        let observations = vec!["collision".to_string(), "no_collision".to_string()];

        let mut transition = vec![0.0; ns * 2 * 2 * ns];
        let mut reward = vec![0.0; ns * 2 * 2];
        let mut obs = vec![0.0; ns * 2 * 2 * 2];
        for s in 0..ns {
            let (full_i, full_j) = (s / 2 == 1, s % 2 == 1);
            for ai in 0..2 {
                for aj in 0..2 {
                    let sa = (s * 2 + ai) * 2 + aj;
                    let (send_i, send_j) = (ai == SEND, aj == SEND);
                    let ok_i = send_i && !send_j && full_i;
                    let ok_j = send_j && !send_i && full_j;
                    reward[sa] = (ok_i as u8 + ok_j as u8) as f64;
                    let left_i = full_i && !ok_i;
                    let left_j = full_j && !ok_j;
                    let dist_i = refill(left_i, self.fill_i);
                    let dist_j = refill(left_j, self.fill_j);
                    for (bi, pi) in dist_i.iter().enumerate() {
                        for (bj, pj) in dist_j.iter().enumerate() {
                            transition[sa * ns + 2 * bi + bj] += pi * pj;
                        }
                    }
                    // The signal depends on the joint action only, so the
                    // row for successor state `s` is filled here as well.
                    let collided = send_i && send_j;
                    let p_coll = if collided { 1.0 - self.obs_noise } else { self.obs_noise };
                    obs[sa * 2 + COLLISION] = p_coll;
                    obs[sa * 2 + NO_COLLISION] = 1.0 - p_coll;
                }
            }
        }
        DomainModel::new(DomainTables {
            name: "mabc".into(),
            state_labels,
            action_labels: [actions.clone(), actions],
            observation_labels: [observations.clone(), observations],
            transition,
            observation: [obs.clone(), obs],
            reward,
            initial: self.initial.to_vec(),
            discount: self.discount,
            local: [(0..ns).map(|s| s / 2).collect(), (0..ns).map(|s| s % 2).collect()],
        })
    }
}

/// Distribution over `[empty, full]` after the refill step.
fn refill(full: bool, p: f64) -> [f64; 2] {
    if full {
        [0.0, 1.0]
    } else {
        [1.0 - p, p]
    }
}
