use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Agent, DomainModel};
use crate::error::{Error, Result};
use crate::planner::{brute_force_oracle, FlatPolicy, OracleResult, PolicyTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TeammateKind {
    Random,
    Predefined,
    Optimal,
    Switching,
}

impl TeammateKind {
    pub fn name(self) -> &'static str {
        match self {
            TeammateKind::Random => "random",
            TeammateKind::Predefined => "predefined",
            TeammateKind::Optimal => "optimal",
            TeammateKind::Switching => "switching",
        }
    }
}

impl FromStr for TeammateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(TeammateKind::Random),
            "predefined" => Ok(TeammateKind::Predefined),
            "optimal" | "true-model" => Ok(TeammateKind::Optimal),
            "switching" => Ok(TeammateKind::Switching),
            _ => Err(Error::Config(format!("unknown teammate kind `{s}`"))),
        }
    }
}

/// How the teammate picks its actions. Pattern actions are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeammateScript {
    pub kind: TeammateKind,
    pub seed: u64,
    pub pattern: Vec<usize>,
    pub repetition: usize,
    /// First step played by the optimal policy (switching only).
    pub switch_step: usize,
}

impl TeammateScript {
    pub fn new(kind: TeammateKind) -> Self {
        Self { kind, seed: 0, pattern: vec![0], repetition: 1, switch_step: 0 }
    }

    pub fn validate(&self, n_actions: usize) -> Result<()> {
        if matches!(self.kind, TeammateKind::Predefined | TeammateKind::Switching) && self.pattern.is_empty() {
            return Err(Error::Config("predefined pattern is empty".into()));
        }
        if self.repetition == 0 {
            return Err(Error::Config("repetition must be at least 1".into()));
        }
        if let Some(&a) = self.pattern.iter().find(|&&a| a >= n_actions) {
            return Err(Error::Config(format!("pattern action {} out of range", a + 1)));
        }
        Ok(())
    }
}

/// Parses a pattern of 1-based action digits such as `1324`.
pub fn parse_pattern(s: &str) -> Result<Vec<usize>> {
    s.chars()
        .map(|c| match c.to_digit(10) {
            Some(d) if d >= 1 => Ok(d as usize - 1),
            _ => Err(Error::Config(format!("bad pattern character `{c}` in `{s}`"))),
        })
        .collect()
}

/// Each pattern action repeated `repetition` times, cycled to `steps`.
pub fn expand_pattern(pattern: &[usize], repetition: usize, steps: usize) -> Vec<usize> {
    pattern
        .iter()
        .flat_map(|&a| std::iter::repeat(a).take(repetition))
        .cycle()
        .take(steps)
        .collect()
}

/// The teammate side of the oracle at the longest horizon up to
/// `horizon` that fits the enumeration guard.
pub fn optimal_teammate(domain: &DomainModel, horizon: usize) -> Result<OracleResult> {
    let mut last = Err(Error::ZeroHorizon);
    for h in (1..=horizon).rev() {
        match brute_force_oracle(domain, h) {
            Err(e @ Error::TooLarge { .. }) => last = Err(e),
            other => return other,
        }
    }
    last
}

/// A policy tree replayed from its root every `depth` steps on the
/// teammate's own observations.
#[derive(Debug, Clone)]
pub struct CyclicPolicy {
    flat: FlatPolicy,
    actions: Vec<usize>,
    node: usize,
    age: usize,
}

impl CyclicPolicy {
    pub fn new(tree: &PolicyTree, n_obs: usize) -> Self {
        Self { flat: tree.flatten(n_obs), actions: tree.bfs_actions(), node: 0, age: 0 }
    }

    pub fn action(&self) -> usize {
        self.actions[self.node]
    }

    pub fn observe(&mut self, o: usize) {
        self.age += 1;
        if self.age == self.flat.depth() {
            self.age = 0;
            self.node = 0;
        } else {
            self.node = self.flat.child(self.node, o);
        }
    }
}

/// A teammate ready to play one episode.
#[derive(Debug, Clone)]
pub enum Teammate {
    Sequence(Vec<usize>),
    Policy(CyclicPolicy),
    /// A fixed prefix, then the policy started at its root.
    Switching { prefix: Vec<usize>, policy: CyclicPolicy },
}

impl Teammate {
    pub fn act(&self, t: usize) -> usize {
        match self {
            Teammate::Sequence(seq) => seq[t],
            Teammate::Policy(p) => p.action(),
            Teammate::Switching { prefix, policy } => prefix.get(t).copied().unwrap_or_else(|| policy.action()),
        }
    }

    pub fn observe(&mut self, t: usize, o: usize) {
        match self {
            Teammate::Sequence(_) => {}
            Teammate::Policy(p) => p.observe(o),
            Teammate::Switching { prefix, policy } => {
                if t >= prefix.len() {
                    policy.observe(o);
                }
            }
        }
    }
}

/// Builds the teammate for an episode of `steps` steps. `optimal` is the
/// teammate's optimal policy tree, required by the optimal and switching
/// kinds.
pub fn make_teammate(
    script: &TeammateScript,
    domain: &DomainModel,
    steps: usize,
    optimal: Option<&PolicyTree>,
) -> Result<Teammate> {
    let n_actions = domain.n_actions(Agent::J);
    script.validate(n_actions)?;
    let policy = || {
        optimal
            .map(|p| CyclicPolicy::new(p, domain.n_observations(Agent::J)))
            .ok_or_else(|| Error::Config("optimal teammate needs the oracle policy".into()))
    };
    Ok(match script.kind {
        TeammateKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(script.seed);
            Teammate::Sequence((0..steps).map(|_| rng.gen_range(0..n_actions)).collect())
        }
        TeammateKind::Predefined => Teammate::Sequence(expand_pattern(&script.pattern, script.repetition, steps)),
        TeammateKind::Optimal => Teammate::Policy(policy()?),
        TeammateKind::Switching => {
            let cut = script.switch_step.min(steps);
            Teammate::Switching { prefix: expand_pattern(&script.pattern, script.repetition, cut), policy: policy()? }
        }
    })
}
