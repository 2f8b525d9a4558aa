use std::sync::Arc;

use idid_core::adhoc::*;
use idid_core::domain::{build_domain, Agent, DomainModel};
use idid_core::idid::{augmented_model_space, solve_augmented_idid, Idid};
use idid_core::mcesp::{generate_collaborative_set, LearnerConfig};
use idid_core::planner::brute_force_oracle;

fn mabc() -> Arc<DomainModel> {
    Arc::new(build_domain("mabc", None).unwrap())
}

fn small_agents() -> AgentConfig {
    AgentConfig { restarts: 4, rollouts: 50, ..Default::default() }
}

#[test]
fn empty_episode() {
    let d = mabc();
    let roster = build_roster(&d, &[AgentKind::OpatPo], &small_agents()).unwrap();
    let tm = make_teammate(&TeammateScript::new(TeammateKind::Predefined), &d, 0, None).unwrap();
    let log = run_episode(&roster.agents[0].1, tm, &d, 0, 3, 1).unwrap();
    assert!(log.steps.is_empty());
    assert_eq!(log.cumulative, 0.0);
}

#[test]
fn logs_are_consistent() {
    let d = mabc();
    let roster = build_roster(&d, &[AgentKind::Idid, AgentKind::OpatPo], &small_agents()).unwrap();
    for (_, planner) in &roster.agents {
        for seed in 0..4 {
            let script = TeammateScript { seed, ..TeammateScript::new(TeammateKind::Random) };
            let tm = make_teammate(&script, &d, 12, None).unwrap();
            let log = run_episode(planner, tm, &d, 12, 3, seed).unwrap();
            assert_eq!(log.steps.len(), 12);
            let total: f64 = log.steps.iter().map(|s| s.reward).sum();
            assert_eq!(log.cumulative, total);
            for row in &log.model_beliefs {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                assert!(row.iter().all(|p| *p >= 0.0));
            }
            if let Planner::Idid(_) = planner {
                assert_eq!(log.model_beliefs.len(), 12);
            }
        }
    }
}

#[test]
fn scripted_teammates_ignore_the_agent() {
    let d = mabc();
    let roster = build_roster(&d, &[AgentKind::Idid, AgentKind::OpatPo], &small_agents()).unwrap();
    for kind in [TeammateKind::Random, TeammateKind::Predefined] {
        let script = TeammateScript { seed: 5, pattern: vec![0, 1], repetition: 2, ..TeammateScript::new(kind) };
        let seqs: Vec<Vec<usize>> = roster
            .agents
            .iter()
            .map(|(_, p)| {
                let tm = make_teammate(&script, &d, 15, None).unwrap();
                run_episode(p, tm, &d, 15, 3, 8).unwrap().steps.iter().map(|s| s.action_j).collect()
            })
            .collect();
        assert_eq!(seqs[0], seqs[1]);
    }
}

#[test]
fn full_lookahead_replays_the_offline_policy() {
    let d = mabc();
    let set = generate_collaborative_set(&d, 3, 4, &LearnerConfig::default()).unwrap();
    let idid = Idid::traditional(d.clone(), Agent::I, 1, 3, 4).unwrap();
    let offline = solve_augmented_idid(&idid, &set.candidates).unwrap();
    let (space, _) = augmented_model_space(&idid, &set.candidates).unwrap();
    let planner = Planner::Idid(IdidAgent::from_space(d.clone(), &space, 3).unwrap());
    let oracle = brute_force_oracle(&d, 3).unwrap();
    for seed in 0..20 {
        for kind in [TeammateKind::Optimal, TeammateKind::Random] {
            let script = TeammateScript { seed, ..TeammateScript::new(kind) };
            let tm = make_teammate(&script, &d, 3, Some(&oracle.policy_j)).unwrap();
            let log = run_episode(&planner, tm, &d, 3, 3, seed).unwrap();
            let mut history = Vec::new();
            for s in &log.steps {
                assert_eq!(Some(s.action_i), offline.policy.act(&history), "seed {seed} {kind:?}");
                history.push(s.obs_i);
            }
        }
    }
}

#[test]
fn comparison_is_reproducible_across_worker_counts() {
    let d = mabc();
    let roster = build_roster(&d, &[AgentKind::AugIdid, AgentKind::OpatPo], &small_agents()).unwrap();
    let cfg = CompareConfig { trials: 3, steps: 8, seed: 11, ..Default::default() };
    let kinds = [TeammateKind::Random, TeammateKind::Switching];
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| compare(&roster, &kinds, &d, &cfg).unwrap())
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a.summaries, b.summaries);
    for (x, y) in a.cells.iter().zip(&b.cells) {
        assert_eq!(x.logs, y.logs);
    }
    assert_eq!(a.summaries.len(), 4);
    // Rows other than the baseline carry a test against it.
    assert!(a.summaries.iter().all(|s| s.test.is_some() == (s.agent != "opat-po")));
}

#[test]
fn summary_statistics_recompute_from_logs() {
    let d = mabc();
    let roster = build_roster(&d, &[AgentKind::OpatPo], &small_agents()).unwrap();
    let cfg = CompareConfig { trials: 4, steps: 6, ..Default::default() };
    let cmp = compare(&roster, &[TeammateKind::Optimal], &d, &cfg).unwrap();
    let returns: Vec<f64> = cmp.cells[0].logs.iter().map(|l| l.cumulative).collect();
    let (mean, std) = mean_std(&returns);
    assert_eq!(cmp.summaries[0].mean, mean);
    assert_eq!(cmp.summaries[0].std, std);
    let own = t_test(&returns, &returns, TestKind::Welch).unwrap();
    assert!((own.p - 1.0).abs() < 1e-12);
    assert!(compare(&roster, &[TeammateKind::Optimal], &d, &CompareConfig { trials: 1, ..cfg }).is_err());
}
