mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use config::{config_error, domain_defaults, load_domain, out_dir, resolve};
use idid_core::adhoc::{
    build_roster, compare, make_teammate, parse_pattern, run_episode, script_for, trial_seeds, AgentConfig,
    AgentKind, CompareConfig, EpisodeLog, Planner, RunSummary, TeammateKind, TestKind,
};
use idid_core::domain::{Agent, DomainModel};
use idid_core::idid::{
    augmented_model_space, solve_augmented_idid, solve_idid, Idid, Level0Model, Model, ModelSpace, Weighting,
};
use idid_core::mcesp::{generate_collaborative_set, LearnerConfig};
use idid_core::planner::{brute_force_oracle, joint_value, Belief, PolicyTree};
use output::{write_csv, write_json, write_manifest};

#[derive(Parser)]
#[command(name = "idid", version, about = "I-DID planning with learned level-0 models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a traditional or augmented I-DID for agent i.
    Solve(SolveFlags),
    /// Grow a set of collaborative level-0 policies for agent j.
    Learn(LearnFlags),
    /// Jointly optimal policies by exhaustive enumeration.
    Oracle(OracleFlags),
    /// Episodes of one agent against one teammate type.
    Simulate(SimulateFlags),
    /// Agents against teammate types, with significance tests.
    Compare(CompareFlags),
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Args, Serialize)]
struct SolveFlags {
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    level: Option<usize>,
    #[arg(long = "K", alias = "k")]
    #[serde(rename = "k")]
    top_k: Option<usize>,
    #[arg(long)]
    weighting: Option<Weighting>,
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    augmented: bool,
    /// `oracle`: put all weight on j's side of the joint optimum.
    #[arg(long)]
    true_model: Option<String>,
    /// Prior grid resolution of the traditional level-0 beliefs.
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    no_prune: bool,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    n_saa: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SolveConfig {
    domain: String,
    horizon: Option<usize>,
    level: usize,
    k: usize,
    weighting: Weighting,
    augmented: bool,
    true_model: Option<String>,
    resolution: Option<usize>,
    no_prune: bool,
    restarts: usize,
    alpha: f64,
    gamma: f64,
    n_saa: usize,
    seed: u64,
    workers: Option<usize>,
    out: PathBuf,
}

impl Default for SolveConfig {
    fn default() -> Self {
        let l = LearnerConfig::default();
        Self {
            domain: "mabc".into(),
            horizon: None,
            level: 1,
            k: idid_core::idid::DEFAULT_TOP_K,
            weighting: Weighting::Uniform,
            augmented: false,
            true_model: None,
            resolution: None,
            no_prune: false,
            restarts: 20,
            alpha: l.alpha,
            gamma: l.gamma,
            n_saa: l.n_saa,
            seed: 0,
            workers: None,
            out: "out".into(),
        }
    }
}

#[derive(Args, Serialize)]
struct LearnFlags {
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    n_saa: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LearnConfig {
    domain: String,
    horizon: Option<usize>,
    restarts: usize,
    alpha: f64,
    gamma: f64,
    n_saa: usize,
    seed: u64,
    workers: Option<usize>,
    out: PathBuf,
}

impl Default for LearnConfig {
    fn default() -> Self {
        let l = LearnerConfig::default();
        Self {
            domain: "mabc".into(),
            horizon: None,
            restarts: 20,
            alpha: l.alpha,
            gamma: l.gamma,
            n_saa: l.n_saa,
            seed: 0,
            workers: None,
            out: "out".into(),
        }
    }
}

#[derive(Args, Serialize)]
struct OracleFlags {
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OracleConfig {
    domain: String,
    horizon: Option<usize>,
    workers: Option<usize>,
    out: PathBuf,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { domain: "mabc".into(), horizon: None, workers: None, out: "out".into() }
    }
}

/// Flags shared by `simulate` and `compare`.
#[derive(Args, Serialize)]
struct HarnessFlags {
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    lookahead: Option<usize>,
    #[arg(long = "K", alias = "k")]
    #[serde(rename = "k")]
    top_k: Option<usize>,
    #[arg(long)]
    weighting: Option<Weighting>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    rollouts: Option<usize>,
    /// Predefined teammate actions as 1-based digits, e.g. `1324`.
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    repetition: Option<usize>,
    #[arg(long)]
    switch_step: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SimulateFlags {
    #[arg(long)]
    agent: Option<String>,
    /// random, predefined, optimal, switching or true-model.
    #[arg(long)]
    teammate: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    harness: HarnessFlags,
}

#[derive(Args, Serialize)]
struct CompareFlags {
    /// Comma-separated agents: aug-idid, idid, opat-po.
    #[arg(long)]
    agents: Option<String>,
    /// Comma-separated teammate types.
    #[arg(long)]
    teammates: Option<String>,
    #[arg(long)]
    baseline: Option<String>,
    /// welch or student.
    #[arg(long)]
    test: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    harness: HarnessFlags,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct HarnessConfig {
    domain: String,
    agent: String,
    teammate: String,
    agents: String,
    teammates: String,
    baseline: String,
    test: String,
    trials: usize,
    steps: usize,
    lookahead: usize,
    k: usize,
    weighting: Weighting,
    resolution: Option<usize>,
    restarts: usize,
    alpha: f64,
    gamma: f64,
    rollouts: usize,
    pattern: String,
    repetition: usize,
    switch_step: usize,
    seed: u64,
    workers: Option<usize>,
    out: PathBuf,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        let a = AgentConfig::default();
        let c = CompareConfig::default();
        Self {
            domain: "mabc".into(),
            agent: "aug-idid".into(),
            teammate: "true-model".into(),
            agents: "aug-idid,opat-po".into(),
            teammates: "random,predefined,optimal".into(),
            baseline: "opat-po".into(),
            test: "welch".into(),
            trials: c.trials,
            steps: c.steps,
            lookahead: a.lookahead,
            k: a.top_k,
            weighting: a.weighting,
            resolution: None,
            restarts: a.restarts,
            alpha: a.learner.alpha,
            gamma: a.learner.gamma,
            rollouts: a.rollouts,
            pattern: "12".into(),
            repetition: c.repetition,
            switch_step: c.switch_step,
            seed: 0,
            workers: None,
            out: "out".into(),
        }
    }
}

impl HarnessConfig {
    fn agent_config(&self) -> AgentConfig {
        let (_, resolution) = domain_defaults(&self.domain);
        AgentConfig {
            lookahead: self.lookahead,
            resolution: self.resolution.unwrap_or(resolution),
            top_k: self.k,
            weighting: self.weighting,
            restarts: self.restarts,
            learner: LearnerConfig { alpha: self.alpha, gamma: self.gamma, seed: self.seed, ..Default::default() },
            rollouts: self.rollouts,
        }
    }

    fn compare_config(&self) -> Result<CompareConfig> {
        Ok(CompareConfig {
            trials: self.trials,
            steps: self.steps,
            lookahead: self.lookahead,
            seed: self.seed,
            pattern: parse_pattern(&self.pattern)?,
            repetition: self.repetition,
            switch_step: self.switch_step,
            test: self.test.parse::<TestKind>()?,
            baseline: self.baseline.parse::<AgentKind>()?,
        })
    }
}

fn set_workers(workers: Option<usize>) -> Result<()> {
    if let Some(n) = workers {
        if n == 0 {
            return Err(config_error("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn policy_json(domain: &DomainModel, agent: Agent, policy: &PolicyTree) -> serde_json::Value {
    policy.to_json(domain.action_labels(agent), domain.observation_labels(agent))
}

fn learner(alpha: f64, gamma: f64, n_saa: usize, seed: u64) -> LearnerConfig {
    LearnerConfig { alpha, gamma, n_saa, seed, ..Default::default() }
}

fn cmd_solve(flags: SolveFlags) -> Result<()> {
    let cfg: SolveConfig = resolve(&flags, flags.config.as_deref())?;
    set_workers(cfg.workers)?;
    let domain = load_domain(&cfg.domain)?;
    let (h, r) = domain_defaults(&cfg.domain);
    let horizon = cfg.horizon.unwrap_or(h);
    let resolution = cfg.resolution.unwrap_or(r);
    let mut idid = Idid::traditional(domain.clone(), Agent::I, cfg.level, horizon, resolution)?;
    idid.top_k = cfg.k;
    idid.weighting = cfg.weighting;
    idid.prune = !cfg.no_prune;

    let mut top_model = None;
    let sol = match (&cfg.true_model, cfg.augmented) {
        (Some(_), false) => return Err(config_error("--true-model needs --augmented".into())),
        (Some(which), true) => {
            if which != "oracle" {
                return Err(config_error(format!("unknown true model `{which}`")));
            }
            if cfg.level != 1 {
                return Err(config_error("--true-model is supported at level 1".into()));
            }
            let oracle = brute_force_oracle(&domain, horizon)?;
            let value = oracle.report.value;
            let model = Level0Model::learned(
                Belief::new(domain.initial().to_vec())?,
                cfg.alpha,
                oracle.policy_j.clone(),
                oracle.policy_i,
                value,
            );
            idid.space = ModelSpace::uniform(vec![Model::Level0(model)])?;
            top_model = Some(oracle.policy_j);
            solve_idid(&idid)?
        }
        (None, true) => {
            let set = generate_collaborative_set(&domain, horizon, cfg.restarts, &learner(cfg.alpha, cfg.gamma, cfg.n_saa, cfg.seed))?;
            if cfg.level == 1 {
                let (space, _) = augmented_model_space(&idid, &set.candidates)?;
                if let Some(Model::Level0(m)) = space.models.first() {
                    top_model = m.solution.as_ref().map(|s| s.policy.clone());
                }
            }
            solve_augmented_idid(&idid, &set.candidates)?
        }
        (None, false) => solve_idid(&idid)?,
    };
    let joint_with_top = match &top_model {
        Some(pj) => Some(joint_value(&domain, &sol.policy, pj)?.value),
        None => None,
    };
    let out = out_dir(&cfg.out)?;
    write_json(
        &out,
        "solution.json",
        &json!({
            "domain": domain.name(),
            "level": cfg.level,
            "horizon": horizon,
            "augmented": cfg.augmented,
            "value": sol.value,
            "joint_value_with_top_model": joint_with_top,
            "model_counts": sol.model_counts,
            "weights": sol.weights,
            "policy": policy_json(&domain, Agent::I, &sol.policy),
        }),
    )?;
    write_manifest(&out, "solve", &cfg, &["solution.json"])?;
    println!("value {}", sol.value);
    if let Some(v) = joint_with_top {
        println!("joint value with top model {v}");
    }
    Ok(())
}

#[derive(Serialize)]
struct UtilityRow {
    rank: usize,
    value: f64,
}

#[derive(Serialize)]
struct TraceRow {
    restart: usize,
    round: usize,
    value: f64,
}

fn cmd_learn(flags: LearnFlags) -> Result<()> {
    let cfg: LearnConfig = resolve(&flags, flags.config.as_deref())?;
    set_workers(cfg.workers)?;
    let domain = load_domain(&cfg.domain)?;
    let horizon = cfg.horizon.unwrap_or(domain_defaults(&cfg.domain).0);
    let set = generate_collaborative_set(&domain, horizon, cfg.restarts, &learner(cfg.alpha, cfg.gamma, cfg.n_saa, cfg.seed))?;
    let out = out_dir(&cfg.out)?;
    let candidates: Vec<_> = set
        .candidates
        .iter()
        .enumerate()
        .map(|(rank, c)| {
            json!({
                "rank": rank,
                "value": c.value,
                "policy": policy_json(&domain, Agent::J, &c.policy),
                "partner": policy_json(&domain, Agent::I, &c.partner),
            })
        })
        .collect();
    write_json(&out, "candidates.json", &json!({ "domain": domain.name(), "horizon": horizon, "candidates": candidates }))?;
    let utilities: Vec<UtilityRow> =
        set.candidates.iter().enumerate().map(|(rank, c)| UtilityRow { rank, value: c.value }).collect();
    write_csv(&out, "utilities.csv", &utilities)?;
    let trace: Vec<TraceRow> = set
        .restarts
        .iter()
        .flat_map(|r| r.values.iter().enumerate().map(move |(round, &value)| TraceRow { restart: r.restart, round, value }))
        .collect();
    write_csv(&out, "trace.csv", &trace)?;
    write_manifest(&out, "learn", &cfg, &["candidates.json", "utilities.csv", "trace.csv"])?;
    println!("candidates {}", set.candidates.len());
    if let Some(best) = set.candidates.first() {
        println!("best value {}", best.value);
    }
    Ok(())
}

fn cmd_oracle(flags: OracleFlags) -> Result<()> {
    let cfg: OracleConfig = resolve(&flags, flags.config.as_deref())?;
    set_workers(cfg.workers)?;
    let domain = load_domain(&cfg.domain)?;
    let horizon = cfg.horizon.unwrap_or(domain_defaults(&cfg.domain).0);
    let r = brute_force_oracle(&domain, horizon)?;
    let out = out_dir(&cfg.out)?;
    write_json(
        &out,
        "oracle.json",
        &json!({
            "domain": domain.name(),
            "horizon": horizon,
            "value": r.report.value,
            "per_step": r.report.per_step,
            "policy_i": policy_json(&domain, Agent::I, &r.policy_i),
            "policy_j": policy_json(&domain, Agent::J, &r.policy_j),
        }),
    )?;
    write_manifest(&out, "oracle", &cfg, &["oracle.json"])?;
    println!("value {}", r.report.value);
    Ok(())
}

#[derive(Serialize)]
struct EpisodeRow<'a> {
    agent: &'a str,
    teammate: &'a str,
    trial: usize,
    step: usize,
    state: &'a str,
    action_i: &'a str,
    action_j: &'a str,
    obs_i: &'a str,
    obs_j: &'a str,
    reward: f64,
}

#[derive(Serialize)]
struct BeliefRow<'a> {
    agent: &'a str,
    teammate: &'a str,
    trial: usize,
    step: usize,
    model: usize,
    mass: f64,
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    teammate: &'a str,
    agent: &'a str,
    trials: usize,
    mean: f64,
    std: f64,
    t: Option<f64>,
    df: Option<f64>,
    p: Option<f64>,
}

fn episode_rows<'a>(
    domain: &'a DomainModel,
    agent: &'a str,
    teammate: &'a str,
    logs: &'a [EpisodeLog],
) -> (Vec<EpisodeRow<'a>>, Vec<BeliefRow<'a>>) {
    let mut episodes = Vec::new();
    let mut beliefs = Vec::new();
    for (trial, log) in logs.iter().enumerate() {
        for s in &log.steps {
            episodes.push(EpisodeRow {
                agent,
                teammate,
                trial,
                step: s.step,
                state: &domain.state_labels()[s.state],
                action_i: &domain.action_labels(Agent::I)[s.action_i],
                action_j: &domain.action_labels(Agent::J)[s.action_j],
                obs_i: &domain.observation_labels(Agent::I)[s.obs_i],
                obs_j: &domain.observation_labels(Agent::J)[s.obs_j],
                reward: s.reward,
            });
        }
        for (step, row) in log.model_beliefs.iter().enumerate() {
            for (model, &mass) in row.iter().enumerate() {
                beliefs.push(BeliefRow { agent, teammate, trial, step, model, mass });
            }
        }
    }
    (episodes, beliefs)
}

fn summary_row(s: &RunSummary) -> SummaryRow<'_> {
    SummaryRow {
        teammate: &s.teammate,
        agent: &s.agent,
        trials: s.trials,
        mean: s.mean,
        std: s.std,
        t: s.test.map(|t| t.t),
        df: s.test.map(|t| t.df),
        p: s.test.map(|t| t.p),
    }
}

fn cmd_simulate(flags: SimulateFlags) -> Result<()> {
    let cfg: HarnessConfig = resolve(&flags, flags.harness.config.as_deref())?;
    set_workers(cfg.workers)?;
    let domain = load_domain(&cfg.domain)?;
    let agent: AgentKind = cfg.agent.parse()?;
    let teammate: TeammateKind = cfg.teammate.parse()?;
    let compare_cfg = cfg.compare_config()?;
    if cfg.trials == 0 {
        return Err(config_error("--trials must be at least 1".into()));
    }
    let roster = build_roster(&domain, &[agent], &cfg.agent_config())?;
    let planner = &roster.agents[0].1;
    let logs: Vec<EpisodeLog> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let (team_seed, episode_seed) = trial_seeds(cfg.seed, t);
            let script = script_for(teammate, &compare_cfg, team_seed);
            let tm = make_teammate(&script, &domain, cfg.steps, Some(&roster.oracle.policy_j))?;
            run_episode(planner, tm, &domain, cfg.steps, cfg.lookahead, episode_seed)
        })
        .collect::<idid_core::Result<_>>()?;
    let summary = RunSummary::from_logs(agent.name(), teammate.name(), &logs);
    // Model of the agent's space that plays like the optimal teammate.
    let true_model = match planner {
        Planner::Idid(a) => a.graph.find(&roster.oracle.policy_j),
        Planner::Opat(_) => None,
    };
    let final_mass: Vec<Option<f64>> = logs
        .iter()
        .map(|l| true_model.and_then(|k| l.model_beliefs.last().map(|row| row[k])))
        .collect();

    let out = out_dir(&cfg.out)?;
    let (episodes, beliefs) = episode_rows(&domain, agent.name(), teammate.name(), &logs);
    write_csv(&out, "episodes.csv", &episodes)?;
    write_csv(&out, "beliefs.csv", &beliefs)?;
    write_csv(&out, "summary.csv", &[summary_row(&summary)])?;
    write_json(
        &out,
        "simulate.json",
        &json!({
            "agent": agent.name(),
            "teammate": teammate.name(),
            "mean": summary.mean,
            "std": summary.std,
            "returns": logs.iter().map(|l| l.cumulative).collect::<Vec<_>>(),
            "resets": logs.iter().map(|l| l.resets.clone()).collect::<Vec<_>>(),
            "true_model": true_model,
            "final_true_model_mass": final_mass,
        }),
    )?;
    write_manifest(&out, "simulate", &cfg, &["episodes.csv", "beliefs.csv", "summary.csv", "simulate.json"])?;
    println!("mean {} std {}", summary.mean, summary.std);
    if let Some(k) = true_model {
        let masses: Vec<f64> = final_mass.iter().flatten().copied().collect();
        let mean = masses.iter().sum::<f64>() / masses.len().max(1) as f64;
        println!("true model {k} mean final mass {mean}");
    }
    Ok(())
}

fn parse_list<T: std::str::FromStr<Err = idid_core::Error>>(s: &str) -> Result<Vec<T>> {
    let items: Vec<T> = s.split(',').map(|x| x.trim().parse()).collect::<idid_core::Result<_>>()?;
    if items.is_empty() {
        return Err(config_error(format!("empty list `{s}`")));
    }
    Ok(items)
}

fn cmd_compare(flags: CompareFlags) -> Result<()> {
    let cfg: HarnessConfig = resolve(&flags, flags.harness.config.as_deref())?;
    set_workers(cfg.workers)?;
    let domain = load_domain(&cfg.domain)?;
    let agents: Vec<AgentKind> = parse_list(&cfg.agents)?;
    let teammates: Vec<TeammateKind> = parse_list(&cfg.teammates)?;
    let compare_cfg = cfg.compare_config()?;
    let roster = build_roster(&domain, &agents, &cfg.agent_config())?;
    let cmp = compare(&roster, &teammates, &domain, &compare_cfg)?;

    let out = out_dir(&cfg.out)?;
    let mut episodes = Vec::new();
    let mut beliefs = Vec::new();
    for c in &cmp.cells {
        let (e, b) = episode_rows(&domain, c.agent.name(), c.teammate.name(), &c.logs);
        episodes.extend(e);
        beliefs.extend(b);
    }
    write_csv(&out, "episodes.csv", &episodes)?;
    write_csv(&out, "beliefs.csv", &beliefs)?;
    // Teammate-major rows, one column block per agent, as in a results table.
    let mut rows: Vec<&RunSummary> = cmp.summaries.iter().collect();
    rows.sort_by_key(|s| {
        let t = teammates.iter().position(|k| k.name() == s.teammate);
        let a = agents.iter().position(|k| k.name() == s.agent);
        (t, a)
    });
    let rows: Vec<SummaryRow> = rows.into_iter().map(summary_row).collect();
    write_csv(&out, "summary.csv", &rows)?;
    write_manifest(&out, "compare", &cfg, &["episodes.csv", "beliefs.csv", "summary.csv"])?;
    for r in &rows {
        println!("{:<11} {:<9} {:>8.3} ± {:.3}", r.teammate, r.agent, r.mean, r.std);
    }
    Ok(())
}

/// 1 for configuration problems, 2 for instances over the size guard,
/// 3 for anything that failed while running.
fn exit_code(err: &anyhow::Error) -> u8 {
    use idid_core::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::TooLarge { .. }) => 2,
        Some(
            E::Config(_)
            | E::UnknownDomain(_)
            | E::InvalidParams(_)
            | E::InvalidModel(_)
            | E::DepthMismatch(..)
            | E::ZeroHorizon
            | E::EmptyModelSpace
            | E::Format(_),
        ) => 1,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(f) => cmd_solve(f),
        Command::Learn(f) => cmd_learn(f),
        Command::Oracle(f) => cmd_oracle(f),
        Command::Simulate(f) => cmd_simulate(f),
        Command::Compare(f) => cmd_compare(f),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
