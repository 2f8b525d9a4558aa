//! Ad hoc teamwork episodes against scripted teammates, and trial
//! comparisons between planning agents.

mod agent;
mod episode;
mod teammate;

use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

pub use agent::{opat_po_step, CyclicTeamView, GraphNode, IdidAgent, ModelGraph, OpatAgent};
pub use episode::{run_episode, EpisodeLog, Planner, StepRecord};
pub use teammate::{
    expand_pattern, make_teammate, optimal_teammate, parse_pattern, CyclicPolicy, Teammate, TeammateKind,
    TeammateScript,
};

use crate::domain::{Agent, DomainModel};
use crate::error::{Error, Result};
use crate::idid::{augmented_model_space, Idid, Weighting};
use crate::mcesp::{generate_collaborative_set, CollaborativeSet, LearnerConfig};
use crate::planner::{OracleResult, PolicyTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgentKind {
    #[serde(rename = "aug-idid")]
    AugIdid,
    #[serde(rename = "idid")]
    Idid,
    #[serde(rename = "opat-po")]
    OpatPo,
}

impl AgentKind {
    pub fn name(self) -> &'static str {
        match self {
            AgentKind::AugIdid => "aug-idid",
            AgentKind::Idid => "idid",
            AgentKind::OpatPo => "opat-po",
        }
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aug-idid" => Ok(AgentKind::AugIdid),
            "idid" => Ok(AgentKind::Idid),
            "opat-po" | "opat" => Ok(AgentKind::OpatPo),
            _ => Err(Error::Config(format!("unknown agent `{s}`"))),
        }
    }
}

/// Settings for building the I-DID agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub lookahead: usize,
    /// Prior grid resolution of the traditional level-0 models.
    pub resolution: usize,
    pub top_k: usize,
    pub weighting: Weighting,
    pub restarts: usize,
    pub learner: LearnerConfig,
    pub rollouts: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            lookahead: 3,
            resolution: 4,
            top_k: crate::idid::DEFAULT_TOP_K,
            weighting: Weighting::Uniform,
            restarts: 20,
            learner: LearnerConfig::default(),
            rollouts: 200,
        }
    }
}

/// Everything the harness precomputes once per domain.
#[derive(Debug, Clone)]
pub struct Roster {
    pub oracle: OracleResult,
    pub learned: Option<CollaborativeSet>,
    pub agents: Vec<(AgentKind, Planner)>,
}

impl Roster {
    pub fn agent(&self, kind: AgentKind) -> Option<&Planner> {
        self.agents.iter().find(|(k, _)| *k == kind).map(|(_, p)| p)
    }
}

/// Builds the requested agents. The augmented agent learns a
/// collaborative set at the lookahead and keeps the top K models.
pub fn build_roster(domain: &Arc<DomainModel>, kinds: &[AgentKind], cfg: &AgentConfig) -> Result<Roster> {
    if cfg.lookahead == 0 {
        return Err(Error::ZeroHorizon);
    }
    let oracle = optimal_teammate(domain, cfg.lookahead)?;
    let traditional = || -> Result<Idid> {
        let mut idid = Idid::traditional(domain.clone(), Agent::I, 1, cfg.lookahead, cfg.resolution)?;
        idid.top_k = cfg.top_k;
        idid.weighting = cfg.weighting;
        Ok(idid)
    };
    let mut learned = None;
    let mut agents = Vec::new();
    for &kind in kinds {
        let planner = match kind {
            AgentKind::Idid => Planner::Idid(IdidAgent::from_space(domain.clone(), &traditional()?.space, cfg.lookahead)?),
            AgentKind::AugIdid => {
                if learned.is_none() {
                    learned = Some(generate_collaborative_set(domain, cfg.lookahead, cfg.restarts, &cfg.learner)?);
                }
                let set = learned.as_ref().expect("learned above");
                let (space, _) = augmented_model_space(&traditional()?, &set.candidates)?;
                Planner::Idid(IdidAgent::from_space(domain.clone(), &space, cfg.lookahead)?)
            }
            AgentKind::OpatPo => Planner::Opat(OpatAgent {
                domain: domain.clone(),
                policy_i: oracle.policy_i.clone(),
                policy_j: oracle.policy_j.clone(),
                rollouts: cfg.rollouts,
            }),
        };
        agents.push((kind, planner));
    }
    Ok(Roster { oracle, learned, agents })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    /// Unequal variances.
    Welch,
    /// Pooled variance.
    Student,
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "welch" => Ok(TestKind::Welch),
            "student" => Ok(TestKind::Student),
            _ => Err(Error::Config(format!("unknown test `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p: f64,
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Two-sample t-test of equal means. Needs at least two samples per side.
pub fn t_test(a: &[f64], b: &[f64], kind: TestKind) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Config("a t-test needs two samples per group".into()));
    }
    let (ma, sa) = mean_std(a);
    let (mb, sb) = mean_std(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sa * sa, sb * sb);
    let (se, df) = match kind {
        TestKind::Welch => {
            let (qa, qb) = (va / na, vb / nb);
            let df = (qa + qb).powi(2) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
            ((qa + qb).sqrt(), df)
        }
        TestKind::Student => {
            let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
            ((pooled * (1.0 / na + 1.0 / nb)).sqrt(), na + nb - 2.0)
        }
    };
    if se == 0.0 {
        let same = ma == mb;
        let t = if same { 0.0 } else { (ma - mb).signum() * f64::INFINITY };
        return Ok(TTest { t, df: na + nb - 2.0, p: if same { 1.0 } else { 0.0 } });
    }
    let t = (ma - mb) / se;
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Config(e.to_string()))?;
    Ok(TTest { t, df, p: 2.0 * (1.0 - dist.cdf(t.abs())) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub trials: usize,
    pub steps: usize,
    pub lookahead: usize,
    pub seed: u64,
    /// 0-based actions of the predefined teammate.
    pub pattern: Vec<usize>,
    pub repetition: usize,
    pub switch_step: usize,
    pub test: TestKind,
    pub baseline: AgentKind,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            trials: 10,
            steps: 20,
            lookahead: 3,
            seed: 0,
            pattern: vec![0, 1],
            repetition: 2,
            switch_step: 10,
            test: TestKind::Welch,
            baseline: AgentKind::OpatPo,
        }
    }
}

/// Seeds of trial `index`: the teammate's and the episode's. Both depend
/// only on the master seed and the index, so every agent meets the same
/// teammate and world noise.
pub fn trial_seeds(master: u64, index: usize) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64 + 1);
    (rng.gen(), rng.gen())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub agent: String,
    pub teammate: String,
    pub trials: usize,
    pub mean: f64,
    pub std: f64,
    /// Against the baseline agent on the same teammate.
    pub test: Option<TTest>,
}

impl RunSummary {
    pub fn from_logs(agent: &str, teammate: &str, logs: &[EpisodeLog]) -> Self {
        let returns: Vec<f64> = logs.iter().map(|l| l.cumulative).collect();
        let (mean, std) = mean_std(&returns);
        Self { agent: agent.into(), teammate: teammate.into(), trials: logs.len(), mean, std, test: None }
    }
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub agent: AgentKind,
    pub teammate: TeammateKind,
    /// One log per trial, in trial order.
    pub logs: Vec<EpisodeLog>,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub cells: Vec<Cell>,
    pub summaries: Vec<RunSummary>,
}

pub fn script_for(kind: TeammateKind, cfg: &CompareConfig, seed: u64) -> TeammateScript {
    TeammateScript {
        kind,
        seed,
        pattern: cfg.pattern.clone(),
        repetition: cfg.repetition,
        switch_step: cfg.switch_step,
    }
}

/// Runs every agent against every teammate kind for `trials` trials.
pub fn compare(
    roster: &Roster,
    teammates: &[TeammateKind],
    domain: &DomainModel,
    cfg: &CompareConfig,
) -> Result<Comparison> {
    if cfg.trials < 2 {
        return Err(Error::Config("a comparison needs at least two trials".into()));
    }
    let optimal: &PolicyTree = &roster.oracle.policy_j;
    let jobs: Vec<(usize, usize, usize)> = (0..roster.agents.len())
        .flat_map(|a| (0..teammates.len()).flat_map(move |m| (0..cfg.trials).map(move |t| (a, m, t))))
        .collect();
    let logs: Vec<EpisodeLog> = jobs
        .par_iter()
        .map(|&(a, m, t)| {
            let (team_seed, episode_seed) = trial_seeds(cfg.seed, t);
            let script = script_for(teammates[m], cfg, team_seed);
            let teammate = make_teammate(&script, domain, cfg.steps, Some(optimal))?;
            run_episode(&roster.agents[a].1, teammate, domain, cfg.steps, cfg.lookahead, episode_seed)
        })
        .collect::<Result<_>>()?;
    let mut cells = Vec::new();
    let mut it = logs.into_iter();
    for (kind, _) in &roster.agents {
        for &tm in teammates {
            cells.push(Cell { agent: *kind, teammate: tm, logs: it.by_ref().take(cfg.trials).collect() });
        }
    }
    let returns = |c: &Cell| c.logs.iter().map(|l| l.cumulative).collect::<Vec<_>>();
    let mut summaries = Vec::with_capacity(cells.len());
    for c in &cells {
        let mut s = RunSummary::from_logs(c.agent.name(), c.teammate.name(), &c.logs);
        if c.agent != cfg.baseline {
            if let Some(base) = cells.iter().find(|b| b.agent == cfg.baseline && b.teammate == c.teammate) {
                s.test = Some(t_test(&returns(c), &returns(base), cfg.test)?);
            }
        }
        summaries.push(s);
    }
    Ok(Comparison { cells, summaries })
}
