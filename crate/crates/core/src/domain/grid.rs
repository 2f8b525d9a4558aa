//! Meeting in a grid.
//!
//! Both agents move on the same rectangular grid and collect the reward of
//! the cell they move into. When they end up in the same cell the team earns
//! twice the sum of their individual rewards. Walls block movement. Each
//! agent senses a wall to its right (`RW`), to its left (`LW`) or neither
//! (`NW`) from the column it occupies.

use serde::{Deserialize, Serialize};

use super::{DomainModel, DomainTables};
use crate::error::{Error, Result};

pub const GRID_ACTIONS: [&str; 5] = ["MS", "MN", "ME", "MW", "ST"];
pub const GRID_OBSERVATIONS: [&str; 3] = ["RW", "LW", "NW"];

const MOVES: [(i64, i64); 5] = [(1, 0), (-1, 0), (0, 1), (0, -1), (0, 0)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub rows: usize,
    pub cols: usize,
    /// `cell_rewards[row][col]`, row 0 is the northern edge.
    pub cell_rewards: Vec<Vec<f64>>,
    pub start_i: (usize, usize),
    pub start_j: (usize, usize),
    /// Probability that a move fails and the agent stays put.
    #[serde(default)]
    pub move_noise: f64,
    #[serde(default = "default_discount")]
    pub discount: f64,
}

fn default_discount() -> f64 {
    0.95
}

/// The one-shot instance: i starts at (1,1) and j at (2,2) on a 4x3 grid.
/// West of i pays 15, south of j pays 15, and the cell at (1,2), reachable
/// by i moving east and j moving north, pays 10.
pub fn one_shot_grid_config() -> GridConfig {
    let mut cell_rewards = vec![vec![0.0; 3]; 4];
    cell_rewards[1][0] = 15.0;
    cell_rewards[3][2] = 15.0;
    cell_rewards[1][2] = 10.0;
    GridConfig {
        rows: 4,
        cols: 3,
        cell_rewards,
        start_i: (1, 1),
        start_j: (2, 2),
        move_noise: 0.0,
        discount: default_discount(),
    }
}

impl GridConfig {
    /// Square `n`x`n` grid with agents in opposite corners. Corner cells pay
    /// 1, the centre pays 3 and the rest nothing.
    pub fn canonical(n: usize) -> Result<GridConfig> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("grid size {n} is below 2")));
        }
        let mut cell_rewards = vec![vec![0.0; n]; n];
        for (r, c) in [(0, 0), (0, n - 1), (n - 1, 0), (n - 1, n - 1)] {
            cell_rewards[r][c] = 1.0;
        }
        cell_rewards[n / 2][n / 2] = 3.0;
        Ok(GridConfig {
            rows: n,
            cols: n,
            cell_rewards,
            start_i: (0, 0),
            start_j: (n - 1, n - 1),
            move_noise: 0.0,
            discount: default_discount(),
        })
    }

    fn cell(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    fn step(&self, cell: usize, action: usize) -> usize {
        let (r, c) = ((cell / self.cols) as i64, (cell % self.cols) as i64);
        let (dr, dc) = MOVES[action];
        let (nr, nc) = (r + dr, c + dc);
        if nr < 0 || nc < 0 || nr >= self.rows as i64 || nc >= self.cols as i64 {
            cell
        } else {
            self.cell(nr as usize, nc as usize)
        }
    }

    fn wall_sense(&self, cell: usize) -> usize {
        let c = cell % self.cols;
        if c == 0 {
            1
        } else if c == self.cols - 1 {
            0
        } else {
            2
        }
    }

    fn team_reward(&self, pi: usize, pj: usize) -> f64 {
        let r = |p: usize| self.cell_rewards[p / self.cols][p % self.cols];
        if pi == pj {
            2.0 * (r(pi) + r(pj))
        } else {
            r(pi) + r(pj)
        }
    }

    pub fn build(&self) -> Result<DomainModel> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidParams("grid must have at least one cell".into()));
        }
        if self.cell_rewards.len() != self.rows
            || self.cell_rewards.iter().any(|row| row.len() != self.cols)
        {
            return Err(Error::InvalidParams("cell_rewards shape does not match rows x cols".into()));
        }
        for (r, c) in [self.start_i, self.start_j] {
            if r >= self.rows || c >= self.cols {
                return Err(Error::InvalidParams(format!("start ({r},{c}) outside the grid")));
            }
        }
        if !(0.0..=1.0).contains(&self.move_noise) {
            return Err(Error::InvalidParams("move_noise is not a probability".into()));
        }

        let nc = self.rows * self.cols;
        let ns = nc * nc;
        let na = MOVES.len();
        let no = GRID_OBSERVATIONS.len();
        let moves_to = |cell: usize, a: usize| -> Vec<(usize, f64)> {
            let target = self.step(cell, a);
            if target == cell || self.move_noise == 0.0 {
                vec![(target, 1.0)]
            } else {
                vec![(target, 1.0 - self.move_noise), (cell, self.move_noise)]
            }
        };

        let mut transition = vec![0.0; ns * na * na * ns];
        let mut reward = vec![0.0; ns * na * na];
        let mut obs_i = vec![0.0; ns * na * na * no];
        let mut obs_j = vec![0.0; ns * na * na * no];
        for s in 0..ns {
            let (pi, pj) = (s / nc, s % nc);
            for ai in 0..na {
                for aj in 0..na {
                    let sa = (s * na + ai) * na + aj;
                    for (ni, p) in moves_to(pi, ai) {
                        for &(nj, q) in &moves_to(pj, aj) {
                            transition[sa * ns + ni * nc + nj] += p * q;
                            reward[sa] += p * q * self.team_reward(ni, nj);
                        }
                    }
                    // Observation rows are indexed by the successor state.
                    obs_i[sa * no + self.wall_sense(pi)] = 1.0;
                    obs_j[sa * no + self.wall_sense(pj)] = 1.0;
                }
            }
        }
        let mut initial = vec![0.0; ns];
        initial[self.cell(self.start_i.0, self.start_i.1) * nc
            + self.cell(self.start_j.0, self.start_j.1)] = 1.0;
        let actions: Vec<String> = GRID_ACTIONS.iter().map(|s| s.to_string()).collect();
        let observations: Vec<String> = GRID_OBSERVATIONS.iter().map(|s| s.to_string()).collect();
        let cell_label = |p: usize| format!("({},{})", p / self.cols, p % self.cols);
        DomainModel::new(DomainTables {
            name: format!("grid{}x{}", self.rows, self.cols),
            state_labels: (0..ns)
                .map(|s| format!("i{}j{}", cell_label(s / nc), cell_label(s % nc)))
                .collect(),
            action_labels: [actions.clone(), actions],
            observation_labels: [observations.clone(), observations],
            transition,
            observation: [obs_i, obs_j],
            reward,
            initial,
            discount: self.discount,
            local: [(0..ns).map(|s| s / nc).collect(), (0..ns).map(|s| s % nc).collect()],
        })
    }
}
