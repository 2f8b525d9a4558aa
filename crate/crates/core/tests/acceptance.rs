//! Acceptance checks. Prints one PASS/FAIL line per criterion. Failures
//! only change the exit status when `ACCEPTANCE_STRICT=1` is set, so the
//! workspace test run still reports them without stopping.

mod common;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use idid_core::adhoc::{
    build_roster, compare, make_teammate, run_episode, trial_seeds, AgentConfig, AgentKind, CompareConfig, Planner,
    TeammateKind, TeammateScript,
};
use idid_core::domain::{build_domain, build_one_shot_grid, project, Agent, DomainModel, DomainTables};
use idid_core::idid::{solve_augmented_idid, solve_idid, Frame, Idid, LearnedPolicy, Level0Model};
use idid_core::mcesp::{generate_collaborative_set, learn_level0, LearnerConfig};
use idid_core::planner::{brute_force_oracle, enumerate_best_response, joint_value, Belief, PolicyTree};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn mabc() -> Arc<DomainModel> {
    Arc::new(build_domain("mabc", None).unwrap())
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timed(limit: Duration, check: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let out = check();
    let took = start.elapsed();
    let note = format!("{:.1}s (limit {}s)", took.as_secs_f64(), limit.as_secs());
    match out {
        Ok(d) if took <= limit => Ok(format!("{d}; {note}")),
        Ok(d) => Err(format!("{d}; too slow: {note}")),
        Err(d) => Err(format!("{d}; {note}")),
    }
}

fn oracle_value() -> Outcome {
    let r = brute_force_oracle(&mabc(), 3).map_err(|e| e.to_string())?;
    let v = r.report.value;
    verdict(within(v, 2.99, 0.01), format!("oracle value {v:.6}"))
}

fn true_model_prior() -> Outcome {
    let d = mabc();
    let oracle = brute_force_oracle(&d, 3).map_err(|e| e.to_string())?;
    let mut idid = Idid::traditional(d.clone(), Agent::I, 1, 3, 4).map_err(|e| e.to_string())?;
    idid.top_k = 1;
    let truth = LearnedPolicy {
        policy: oracle.policy_j.clone(),
        value: oracle.report.value,
        partner: oracle.policy_i.clone(),
    };
    let sol = solve_augmented_idid(&idid, &[truth]).map_err(|e| e.to_string())?;
    verdict(within(sol.value, 2.99, 0.01), format!("augmented value {:.6}", sol.value))
}

fn one_shot_grid() -> Outcome {
    let d = Arc::new(build_one_shot_grid());
    let mut values = Vec::new();
    for level in [1, 2] {
        let idid = Idid::traditional(d.clone(), Agent::I, level, 1, 0).map_err(|e| e.to_string())?;
        values.push(solve_idid(&idid).map_err(|e| e.to_string())?.value);
    }
    // The teammate's level-0 policies come from the learner.
    let set = generate_collaborative_set(&d, 1, 20, &LearnerConfig::default()).map_err(|e| e.to_string())?;
    let idid = Idid::traditional(d.clone(), Agent::I, 1, 1, 0).map_err(|e| e.to_string())?;
    let aug = solve_augmented_idid(&idid, &set.candidates).map_err(|e| e.to_string())?;
    let top = &set.candidates[0].policy;
    let joint = joint_value(&d, &aug.policy, top).map_err(|e| e.to_string())?.value;
    let detail = format!(
        "level 1 {}, level 2 {}, augmented joint {} ({} with {})",
        values[0],
        values[1],
        joint,
        d.action_labels(Agent::I)[aug.policy.action],
        d.action_labels(Agent::J)[top.action]
    );
    verdict(values[0] == 30.0 && values[1] == 30.0 && joint == 40.0, detail)
}

fn augmented_dominates() -> Outcome {
    let d = mabc();
    let idid = Idid::traditional(d.clone(), Agent::I, 1, 3, 4).map_err(|e| e.to_string())?;
    let plain = solve_idid(&idid).map_err(|e| e.to_string())?.value;
    let set = generate_collaborative_set(&d, 3, 20, &LearnerConfig::default()).map_err(|e| e.to_string())?;
    let aug = solve_augmented_idid(&idid, &set.candidates).map_err(|e| e.to_string())?.value;
    verdict(aug >= plain - 1e-9, format!("augmented {aug:.6} vs traditional {plain:.6}"))
}

fn pruning_invariance() -> Outcome {
    let d = mabc();
    let pruned = Idid::traditional(d.clone(), Agent::I, 1, 3, 4).map_err(|e| e.to_string())?;
    let full = Idid { prune: false, ..pruned.clone() };
    let a = solve_idid(&pruned).map_err(|e| e.to_string())?;
    let b = solve_idid(&full).map_err(|e| e.to_string())?;
    let smaller = a.model_counts.iter().zip(&b.model_counts).all(|(x, y)| x <= y)
        && a.model_counts.iter().sum::<usize>() < b.model_counts.iter().sum::<usize>();
    verdict(
        within(a.value, b.value, 1e-9) && smaller,
        format!("values {:.12} / {:.12}, counts {:?} / {:?}", a.value, b.value, a.model_counts, b.model_counts),
    )
}

fn bandit() -> Arc<DomainModel> {
    Arc::new(
        DomainModel::new(DomainTables {
            name: "bandit".into(),
            state_labels: vec!["s".into()],
            action_labels: [vec!["noop".into()], vec!["low".into(), "high".into()]],
            observation_labels: [vec!["o".into()], vec!["o".into()]],
            transition: vec![1.0, 1.0],
            observation: [vec![1.0, 1.0], vec![1.0, 1.0]],
            reward: vec![0.0, 5.0],
            initial: vec![1.0],
            discount: 1.0,
            local: [vec![0], vec![0]],
        })
        .unwrap(),
    )
}

fn learned_against(d: &Arc<DomainModel>, partner: &PolicyTree, start: PolicyTree, seed: u64) -> Result<PolicyTree, String> {
    let env = project(d.clone(), partner, Agent::J);
    let cfg = LearnerConfig { seed, ..Default::default() };
    let model = Level0Model {
        belief: Belief::new(d.initial().to_vec()).map_err(|e| e.to_string())?,
        frame: Frame::Learning { alpha: cfg.alpha, seed: start, other_policy: partner.clone() },
        solution: None,
    };
    Ok(learn_level0(&model, &env, &cfg).map_err(|e| e.to_string())?.policy)
}

fn learner_soundness() -> Outcome {
    let d = mabc();
    let partner = brute_force_oracle(&d, 3).map_err(|e| e.to_string())?.policy_i;
    let (_, best) = enumerate_best_response(&d, Agent::J, &partner).map_err(|e| e.to_string())?;
    let mut hits = 0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = PolicyTree::random(&mut rng, 2, 2, 3);
        let policy = learned_against(&d, &partner, start, seed)?;
        let v = joint_value(&d, &partner, &policy).map_err(|e| e.to_string())?.value;
        if (best - v).abs() <= 0.05 * best.abs() {
            hits += 1;
        }
    }
    let b = bandit();
    let mut exact = 0;
    for seed in 0..10u64 {
        if learned_against(&b, &PolicyTree::leaf(0), PolicyTree::leaf(0), seed)?.action == 1 {
            exact += 1;
        }
    }
    verdict(hits >= 8 && exact == 10, format!("MABC {hits}/10 within 5% of {best:.4}, bandit {exact}/10"))
}

fn harness_direction() -> Outcome {
    let d = mabc();
    let roster = build_roster(&d, &[AgentKind::AugIdid, AgentKind::OpatPo], &AgentConfig::default())
        .map_err(|e| e.to_string())?;
    let cfg = CompareConfig { trials: 5, steps: 20, ..Default::default() };
    let cmp = compare(&roster, &[TeammateKind::Random, TeammateKind::Predefined], &d, &cfg).map_err(|e| e.to_string())?;
    let mean = |agent: &str, tm: &str| {
        cmp.summaries.iter().find(|s| s.agent == agent && s.teammate == tm).map(|s| s.mean).unwrap()
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for tm in ["random", "predefined"] {
        let (a, b) = (mean("aug-idid", tm), mean("opat-po", tm));
        ok &= a > b;
        parts.push(format!("{tm}: aug-idid {a:.2} vs opat-po {b:.2}"));
    }

    let Some(Planner::Idid(agent)) = roster.agent(AgentKind::AugIdid) else { unreachable!() };
    let Some(truth) = agent.graph.find(&roster.oracle.policy_j) else {
        return Err(format!("{}; true model missing from the model space", parts.join(", ")));
    };
    let planner = roster.agent(AgentKind::AugIdid).unwrap();
    let mut mass = 0.0;
    for run in 0..10 {
        let (team_seed, episode_seed) = trial_seeds(0, run);
        let script = TeammateScript { seed: team_seed, ..TeammateScript::new(TeammateKind::Optimal) };
        let teammate = make_teammate(&script, &d, 20, Some(&roster.oracle.policy_j)).map_err(|e| e.to_string())?;
        let log = run_episode(planner, teammate, &d, 20, 3, episode_seed).map_err(|e| e.to_string())?;
        mass += log.model_beliefs.last().map_or(0.0, |row| row[truth]) / 10.0;
    }
    ok &= mass > 0.9;
    parts.push(format!("mean final true-model mass {mass:.3}"));
    verdict(ok, parts.join(", "))
}

fn property_suites() -> Outcome {
    use common::*;
    let mut failures = Vec::new();
    let mut note = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(format!("{name}: {e}"));
        }
    };
    note("belief", runner(64).run(&belief_inputs(), belief_stays_normalized).map_err(|e| e.to_string()));
    note("weights", runner(24).run(&weight_inputs(), weights_are_conserved).map_err(|e| e.to_string()));
    note("trees", runner(32).run(&tree_inputs(), trees_are_complete).map_err(|e| e.to_string()));
    note("q update", runner(256).run(&q_inputs(), q_update_is_convex).map_err(|e| e.to_string()));
    note("projection", runner(16).run(&projection_inputs(), projection_is_sound).map_err(|e| e.to_string()));
    verdict(failures.is_empty(), if failures.is_empty() { "five suites green".into() } else { failures.join("; ") })
}

fn main() -> ExitCode {
    let mins = |m: u64| Duration::from_secs(60 * m);
    let checks: Vec<(&str, Duration, fn() -> Outcome)> = vec![
        ("oracle value, MABC T=3", Duration::from_secs(60), oracle_value),
        ("augmented I-DID with the true model", mins(5), true_model_prior),
        ("one-shot grid joint rewards", mins(5), one_shot_grid),
        ("augmented >= traditional, MABC T=3", mins(5), augmented_dominates),
        ("pruning keeps the value", mins(5), pruning_invariance),
        ("learner soundness", mins(5), learner_soundness),
        ("ad hoc harness direction", mins(10), harness_direction),
        ("property suites", Duration::from_secs(120), property_suites),
    ];
    let mut failed = 0;
    for (k, (name, limit, check)) in checks.into_iter().enumerate() {
        match timed(limit, check) {
            Ok(d) => println!("PASS {} {name}: {d}", k + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {} {name}: {d}", k + 1);
            }
        }
    }
    println!("{failed} of 8 criteria failed");
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failed == 0 || !strict {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
