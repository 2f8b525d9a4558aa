//! Cooperative box pushing on a five-column corridor.
//!
//! State factorization (5 x 5 x 2 = 50 states):
//! - column of agent i, column of agent j (0..=4, sharing a cell is allowed);
//! - phase of the large box: 0 at rest, 1 after one joint push.
//!
//! Small boxes sit above columns 0 and 4; a single push delivers one to the
//! goal. The large box spans columns 1..=3 and needs two joint pushes with
//! both agents underneath it. Any delivery resets the corridor to the start
//! configuration (i at column 0, j at column 4, phase 0).
//!
//! Actions: `west`, `east`, `push`, `stay`. Lateral moves succeed with
//! probability `1 - move_noise`. An agent observes what lies in the
//! direction it acted in: the cell beside it after a lateral move (`wall`,
//! `agent` or `empty`), otherwise the space above it (`small_box`,
//! `large_box` or `empty`).

use serde::{Deserialize, Serialize};

use super::{DomainModel, DomainTables};
use crate::error::{Error, Result};

const COLS: usize = 5;
const WEST: usize = 0;
const EAST: usize = 1;
const PUSH: usize = 2;

const OBS_EMPTY: usize = 0;
const OBS_WALL: usize = 1;
const OBS_AGENT: usize = 2;
const OBS_SMALL: usize = 3;
const OBS_LARGE: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoxPushingConfig {
    pub move_noise: f64,
    pub small_box_reward: f64,
    pub large_box_reward: f64,
    pub wall_penalty: f64,
    pub step_cost: f64,
    pub discount: f64,
}

impl Default for BoxPushingConfig {
    fn default() -> Self {
        Self {
            move_noise: 0.1,
            small_box_reward: 10.0,
            large_box_reward: 100.0,
            wall_penalty: 5.0,
            step_cost: 0.1,
            discount: 0.95,
        }
    }
}

fn index(ci: usize, cj: usize, phase: usize) -> usize {
    (ci * COLS + cj) * 2 + phase
}

fn under_small(c: usize) -> bool {
    c == 0 || c == COLS - 1
}

fn under_large(c: usize) -> bool {
    (1..COLS - 1).contains(&c)
}

impl BoxPushingConfig {
    fn start(&self) -> usize {
        index(0, COLS - 1, 0)
    }

    /// Outcomes of one agent's lateral move: `(column, prob)` plus whether
    /// the wall was hit.
    fn lateral(&self, c: usize, a: usize) -> (Vec<(usize, f64)>, bool) {
        let target = match a {
            WEST if c > 0 => Some(c - 1),
            EAST if c < COLS - 1 => Some(c + 1),
            WEST | EAST => None,
            _ => return (vec![(c, 1.0)], false),
        };
        match target {
            None => (vec![(c, 1.0)], true),
            Some(t) if self.move_noise == 0.0 => (vec![(t, 1.0)], false),
            Some(t) => (vec![(t, 1.0 - self.move_noise), (c, self.move_noise)], false),
        }
    }

    fn observe(&self, own: usize, other: usize, phase: usize, a: usize) -> usize {
        match a {
            WEST | EAST => {
                let side = if a == WEST { own.checked_sub(1) } else { Some(own + 1) };
                match side {
                    Some(c) if c < COLS => {
                        if c == other {
                            OBS_AGENT
                        } else {
                            OBS_EMPTY
                        }
                    }
                    _ => OBS_WALL,
                }
            }
            _ => {
                if under_small(own) {
                    OBS_SMALL
                } else if phase == 0 {
                    OBS_LARGE
                } else {
                    OBS_EMPTY
                }
            }
        }
    }

    pub fn build(&self) -> Result<DomainModel> {
        if !(0.0..=1.0).contains(&self.move_noise) {
            return Err(Error::InvalidParams("move_noise is not a probability".into()));
        }
        let ns = COLS * COLS * 2;
        let na = 4;
        let no = 5;
        let mut transition = vec![0.0; ns * na * na * ns];
        let mut reward = vec![0.0; ns * na * na];
        let mut obs_i = vec![0.0; ns * na * na * no];
        let mut obs_j = vec![0.0; ns * na * na * no];

        for ci in 0..COLS {
            for cj in 0..COLS {
                for phase in 0..2 {
                    let s = index(ci, cj, phase);
                    for ai in 0..na {
                        for aj in 0..na {
                            let sa = (s * na + ai) * na + aj;
                            let mut r = -2.0 * self.step_cost;
                            let small = (ai == PUSH && under_small(ci)) as usize
                                + (aj == PUSH && under_small(cj)) as usize;
                            let joint_large =
                                ai == PUSH && aj == PUSH && under_large(ci) && under_large(cj);
                            let row = &mut transition[sa * ns..(sa + 1) * ns];
                            if small > 0 || (joint_large && phase == 1) {
                                r += small as f64 * self.small_box_reward;
                                if joint_large {
                                    r += self.large_box_reward;
                                }
                                row[self.start()] = 1.0;
                            } else if joint_large {
                                row[index(ci, cj, 1)] = 1.0;
                            } else {
                                let (mi, bump_i) = self.lateral(ci, ai);
                                let (mj, bump_j) = self.lateral(cj, aj);
                                r -= self.wall_penalty * (bump_i as u8 + bump_j as u8) as f64;
                                for &(ni, p) in &mi {
                                    for &(nj, q) in &mj {
                                        row[index(ni, nj, phase)] += p * q;
                                    }
                                }
                            }
                            reward[sa] = r;
                            // Observation rows are indexed by the successor
                            // state, here `s` itself.
                            obs_i[sa * no + self.observe(ci, cj, phase, ai)] = 1.0;
                            obs_j[sa * no + self.observe(cj, ci, phase, aj)] = 1.0;
                        }
                    }
                }
            }
        }

        let mut initial = vec![0.0; ns];
        initial[self.start()] = 1.0;
        let actions: Vec<String> = ["west", "east", "push", "stay"].iter().map(|s| s.to_string()).collect();
        let observations: Vec<String> = ["empty", "wall", "agent", "small_box", "large_box"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut labels = vec![String::new(); ns];
        let mut local_i = vec![0; ns];
        let mut local_j = vec![0; ns];
        for ci in 0..COLS {
            for cj in 0..COLS {
                for phase in 0..2 {
                    let s = index(ci, cj, phase);
                    labels[s] = format!("i{ci}j{cj}p{phase}");
                    local_i[s] = ci * 2 + phase;
                    local_j[s] = cj;
                }
            }
        }
        DomainModel::new(DomainTables {
            name: "box_pushing".into(),
            state_labels: labels,
            action_labels: [actions.clone(), actions],
            observation_labels: [observations.clone(), observations],
            transition,
            observation: [obs_i, obs_j],
            reward,
            initial,
            discount: self.discount,
            local: [local_i, local_j],
        })
    }
}
