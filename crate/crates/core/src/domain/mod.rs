//! Tabular two-agent cooperative domains.
//!
//! Every domain is a [`DomainModel`]: enumerated world states, per-agent
//! action and observation sets, a joint transition table, independent
//! per-agent observation tables and a single team reward shared by both
//! agents.

mod box_pushing;
mod grid;
mod mabc;
mod projection;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use box_pushing::BoxPushingConfig;
pub use grid::{one_shot_grid_config, GridConfig, GRID_ACTIONS, GRID_OBSERVATIONS};
pub use mabc::{state_index as mabc_state, MabcConfig, COLLISION, NO_COLLISION, SEND, WAIT};
pub use projection::{project, EnvState, ProjectedEnv, StepOutcome};

/// Row-sum tolerance for every probability table.
pub const PROB_TOL: f64 = 1e-9;

/// One of the two agents. `I` is the subject agent by convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agent {
    I,
    J,
}

impl Agent {
    pub fn other(self) -> Agent {
        match self {
            Agent::I => Agent::J,
            Agent::J => Agent::I,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Agent::I => 0,
            Agent::J => 1,
        }
    }

    /// Orders `(own, other)` actions as `(a_i, a_j)`.
    #[inline]
    pub fn joint(self, own: usize, other: usize) -> (usize, usize) {
        match self {
            Agent::I => (own, other),
            Agent::J => (other, own),
        }
    }
}

impl std::fmt::Display for Agent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Agent::I => write!(f, "i"),
            Agent::J => write!(f, "j"),
        }
    }
}

/// Raw tables handed to [`DomainModel::new`].
///
/// Layouts are row-major: `transition[s][a_i][a_j][s']`,
/// `observation[k][s'][a_i][a_j][o]`, `reward[s][a_i][a_j]`.
#[derive(Debug, Clone)]
pub struct DomainTables {
    pub name: String,
    pub state_labels: Vec<String>,
    pub action_labels: [Vec<String>; 2],
    pub observation_labels: [Vec<String>; 2],
    pub transition: Vec<f64>,
    pub observation: [Vec<f64>; 2],
    pub reward: Vec<f64>,
    pub initial: Vec<f64>,
    pub discount: f64,
    /// Per-agent local state component of every world state.
    pub local: [Vec<usize>; 2],
}

#[derive(Debug, Clone)]
pub struct DomainModel {
    name: String,
    state_labels: Vec<String>,
    action_labels: [Vec<String>; 2],
    observation_labels: [Vec<String>; 2],
    transition: Vec<f64>,
    observation: [Vec<f64>; 2],
    reward: Vec<f64>,
    initial: Vec<f64>,
    discount: f64,
    local: [Vec<usize>; 2],
    n_local: [usize; 2],
    successors: Vec<Vec<(usize, f64)>>,
}

impl DomainModel {
    pub fn new(t: DomainTables) -> Result<Self> {
        let ns = t.state_labels.len();
        let na = [t.action_labels[0].len(), t.action_labels[1].len()];
        let no = [t.observation_labels[0].len(), t.observation_labels[1].len()];
        if ns == 0 || na.contains(&0) || no.contains(&0) {
            return Err(Error::InvalidModel("empty state, action or observation set".into()));
        }
        let check_len = |what: &str, got: usize, want: usize| {
            if got != want {
                Err(Error::InvalidModel(format!("{what} table has {got} entries, expected {want}")))
            } else {
                Ok(())
            }
        };
        check_len("transition", t.transition.len(), ns * na[0] * na[1] * ns)?;
        check_len("observation(i)", t.observation[0].len(), ns * na[0] * na[1] * no[0])?;
        check_len("observation(j)", t.observation[1].len(), ns * na[0] * na[1] * no[1])?;
        check_len("reward", t.reward.len(), ns * na[0] * na[1])?;
        check_len("initial", t.initial.len(), ns)?;
        check_len("local(i)", t.local[0].len(), ns)?;
        check_len("local(j)", t.local[1].len(), ns)?;
        if !(0.0..1.0).contains(&t.discount) && t.discount != 1.0 {
            return Err(Error::InvalidModel(format!("discount {} outside [0,1]", t.discount)));
        }
        if t.reward.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidModel("non-finite reward".into()));
        }
        check_distribution("transition", &t.transition, ns)?;
        check_distribution("observation(i)", &t.observation[0], no[0])?;
        check_distribution("observation(j)", &t.observation[1], no[1])?;
        check_distribution("initial", &t.initial, ns)?;

        let successors = t
            .transition
            .chunks(ns)
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(s, &p)| (s, p))
                    .collect()
            })
            .collect();
        let n_local = [
            t.local[0].iter().max().map_or(0, |m| m + 1),
            t.local[1].iter().max().map_or(0, |m| m + 1),
        ];
        Ok(Self {
            name: t.name,
            state_labels: t.state_labels,
            action_labels: t.action_labels,
            observation_labels: t.observation_labels,
            transition: t.transition,
            observation: t.observation,
            reward: t.reward,
            initial: t.initial,
            discount: t.discount,
            local: t.local,
            n_local,
            successors,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_states(&self) -> usize {
        self.state_labels.len()
    }

    pub fn n_actions(&self, agent: Agent) -> usize {
        self.action_labels[agent.index()].len()
    }

    pub fn n_observations(&self, agent: Agent) -> usize {
        self.observation_labels[agent.index()].len()
    }

    /// Number of values of an agent's local state factor (e.g. its own
    /// position or buffer).
    pub fn n_local_states(&self, agent: Agent) -> usize {
        self.n_local[agent.index()]
    }

    pub fn local_state(&self, agent: Agent, s: usize) -> usize {
        self.local[agent.index()][s]
    }

    pub fn state_labels(&self) -> &[String] {
        &self.state_labels
    }

    pub fn action_labels(&self, agent: Agent) -> &[String] {
        &self.action_labels[agent.index()]
    }

    pub fn observation_labels(&self, agent: Agent) -> &[String] {
        &self.observation_labels[agent.index()]
    }

    pub fn action_index(&self, agent: Agent, label: &str) -> Option<usize> {
        self.action_labels[agent.index()].iter().position(|l| l == label)
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    #[inline]
    fn sa(&self, s: usize, ai: usize, aj: usize) -> usize {
        (s * self.action_labels[0].len() + ai) * self.action_labels[1].len() + aj
    }

    pub fn transition(&self, s: usize, ai: usize, aj: usize, next: usize) -> f64 {
        self.transition[self.sa(s, ai, aj) * self.n_states() + next]
    }

    /// Nonzero entries of `P(· | s, a_i, a_j)`.
    #[inline]
    pub fn successors(&self, s: usize, ai: usize, aj: usize) -> &[(usize, f64)] {
        &self.successors[self.sa(s, ai, aj)]
    }

    #[inline]
    pub fn obs_prob(&self, agent: Agent, next: usize, ai: usize, aj: usize, o: usize) -> f64 {
        let no = self.n_observations(agent);
        self.observation[agent.index()][self.sa(next, ai, aj) * no + o]
    }

    /// `P(· | s', a_i, a_j)` for one agent.
    #[inline]
    pub fn obs_row(&self, agent: Agent, next: usize, ai: usize, aj: usize) -> &[f64] {
        let no = self.n_observations(agent);
        let base = self.sa(next, ai, aj) * no;
        &self.observation[agent.index()][base..base + no]
    }

    #[inline]
    pub fn reward(&self, s: usize, ai: usize, aj: usize) -> f64 {
        self.reward[self.sa(s, ai, aj)]
    }

    /// Same domain with both action sets permuted: new action `k` of agent
    /// `i` is old action `perm_i[k]`.
    pub fn permute_actions(&self, perm_i: &[usize], perm_j: &[usize]) -> Result<DomainModel> {
        let na = [self.n_actions(Agent::I), self.n_actions(Agent::J)];
        if perm_i.len() != na[0] || perm_j.len() != na[1] {
            return Err(Error::InvalidParams("permutation length mismatch".into()));
        }
        let ns = self.n_states();
        let mut t = self.to_tables();
        for s in 0..ns {
            for ai in 0..na[0] {
                for aj in 0..na[1] {
                    let (oi, oj) = (perm_i[ai], perm_j[aj]);
                    let new = self.sa(s, ai, aj);
                    t.reward[new] = self.reward(s, oi, oj);
                    for n in 0..ns {
                        t.transition[new * ns + n] = self.transition(s, oi, oj, n);
                    }
                    for agent in [Agent::I, Agent::J] {
                        let no = self.n_observations(agent);
                        for o in 0..no {
                            t.observation[agent.index()][new * no + o] =
                                self.obs_prob(agent, s, oi, oj, o);
                        }
                    }
                }
            }
        }
        t.action_labels[0] = perm_i.iter().map(|&a| self.action_labels[0][a].clone()).collect();
        t.action_labels[1] = perm_j.iter().map(|&a| self.action_labels[1][a].clone()).collect();
        DomainModel::new(t)
    }

    pub fn to_tables(&self) -> DomainTables {
        DomainTables {
            name: self.name.clone(),
            state_labels: self.state_labels.clone(),
            action_labels: self.action_labels.clone(),
            observation_labels: self.observation_labels.clone(),
            transition: self.transition.clone(),
            observation: self.observation.clone(),
            reward: self.reward.clone(),
            initial: self.initial.clone(),
            discount: self.discount,
            local: self.local.clone(),
        }
    }

    /// Deterministic point belief on the first state with positive initial
    /// mass, used only for labelling.
    pub fn initial_state_label(&self) -> &str {
        let s = self.initial.iter().position(|&p| p > 0.0).unwrap_or(0);
        &self.state_labels[s]
    }
}

fn check_distribution(what: &str, table: &[f64], row: usize) -> Result<()> {
    for (r, chunk) in table.chunks(row).enumerate() {
        if chunk.iter().any(|&p| !(0.0..=1.0).contains(&p) || p.is_nan()) {
            return Err(Error::InvalidModel(format!("{what} row {r} has entries outside [0,1]")));
        }
        let sum: f64 = chunk.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidModel(format!("{what} row {r} sums to {sum}")));
        }
    }
    Ok(())
}

/// Family-tagged domain configuration, the on-disk format under
/// `configs/domains/`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DomainConfig {
    Grid(GridConfig),
    BoxPushing(BoxPushingConfig),
    Mabc(MabcConfig),
}

impl DomainConfig {
    pub fn build(&self) -> Result<DomainModel> {
        match self {
            DomainConfig::Grid(c) => c.build(),
            DomainConfig::BoxPushing(c) => c.build(),
            DomainConfig::Mabc(c) => c.build(),
        }
    }

    /// Canonical configuration for a short domain name: `mabc`, `grid1shot`,
    /// `gridN` (e.g. `grid3`), `bp`/`box_pushing`.
    pub fn canonical(name: &str) -> Result<DomainConfig> {
        match name {
            "mabc" => Ok(DomainConfig::Mabc(MabcConfig::default())),
            "grid1shot" | "one_shot_grid" => Ok(DomainConfig::Grid(one_shot_grid_config())),
            "bp" | "box_pushing" => Ok(DomainConfig::BoxPushing(BoxPushingConfig::default())),
            _ => {
                if let Some(n) = name.strip_prefix("grid") {
                    let n: usize = n
                        .parse()
                        .map_err(|_| Error::UnknownDomain(name.to_string()))?;
                    Ok(DomainConfig::Grid(GridConfig::canonical(n)?))
                } else {
                    Err(Error::UnknownDomain(name.to_string()))
                }
            }
        }
    }
}

/// Builds a domain from its short name and optional JSON parameters that
/// override the canonical configuration for that family.
pub fn build_domain(name: &str, params: Option<&serde_json::Value>) -> Result<DomainModel> {
    let canonical = DomainConfig::canonical(name)?;
    let config = match params {
        None => canonical,
        Some(p) => {
            let mut base = serde_json::to_value(&canonical)
                .map_err(|e| Error::InvalidParams(e.to_string()))?;
            let (Some(obj), Some(over)) = (base.as_object_mut(), p.as_object()) else {
                return Err(Error::InvalidParams("parameters must be a JSON object".into()));
            };
            for (k, v) in over {
                obj.insert(k.clone(), v.clone());
            }
            serde_json::from_value(base).map_err(|e| Error::InvalidParams(e.to_string()))?
        }
    };
    config.build()
}

/// Horizon-1 grid meeting instance in which the greedy moves (i west,
/// j south) earn 30 and the coordinated meeting (i east, j north) earns 40.
pub fn build_one_shot_grid() -> DomainModel {
    one_shot_grid_config()
        .build()
        .expect("one-shot grid configuration is valid")
}
