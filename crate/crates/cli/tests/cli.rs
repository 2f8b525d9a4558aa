use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn idid(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idid"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], out: &Path) {
    let o = idid(args, out);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("manifest.json").exists());
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn bytes(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

#[test]
fn one_shot_grid_values() {
    let tmp = TempDir::new().unwrap();
    for level in ["1", "2"] {
        let out = tmp.path().join(level);
        ok(&["solve", "--domain", "grid1shot", "--level", level], &out);
        let sol = json(&out.join("solution.json"));
        assert_eq!(sol["value"].as_f64(), Some(30.0));
        assert_eq!(sol["policy"]["action"], "MW");
    }
    let out = tmp.path().join("aug");
    ok(&["solve", "--domain", "grid1shot", "--level", "1", "--augmented"], &out);
    let sol = json(&out.join("solution.json"));
    assert_eq!(sol["policy"]["action"], "ME");
    assert_eq!(sol["joint_value_with_top_model"].as_f64(), Some(40.0));
    let out = tmp.path().join("aug1");
    ok(&["solve", "--domain", "grid1shot", "--level", "1", "--augmented", "--K", "1"], &out);
    assert_eq!(json(&out.join("solution.json"))["value"].as_f64(), Some(40.0));
}

#[test]
fn true_model_solve_matches_the_oracle() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("solve");
    ok(&["solve", "--domain", "mabc", "--horizon", "3", "--level", "1", "--augmented", "--true-model", "oracle"], &a);
    let b = tmp.path().join("oracle");
    ok(&["oracle", "--domain", "mabc", "--horizon", "3"], &b);
    let solved = json(&a.join("solution.json"))["value"].as_f64().unwrap();
    let oracle = json(&b.join("oracle.json"))["value"].as_f64().unwrap();
    assert!((oracle - 2.99).abs() <= 0.01);
    assert!((solved - oracle).abs() < 1e-9);
}

#[test]
fn oracle_values_and_guard() {
    let tmp = TempDir::new().unwrap();
    ok(&["oracle", "--domain", "grid1shot"], tmp.path());
    assert_eq!(json(&tmp.path().join("oracle.json"))["value"].as_f64(), Some(40.0));
    let o = idid(&["oracle", "--domain", "grid3", "--horizon", "3"], &tmp.path().join("g"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("5^13"));
}

#[test]
fn learn_is_reproducible_and_reaches_the_optimum() {
    let tmp = TempDir::new().unwrap();
    let args = ["learn", "--domain", "mabc", "--horizon", "3", "--restarts", "20", "--seed", "7"];
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&args, &a);
    ok(&args, &b);
    for f in ["candidates.json", "utilities.csv", "trace.csv"] {
        assert_eq!(bytes(&a, f), bytes(&b, f), "{f}");
    }
    let best = json(&a.join("candidates.json"))["candidates"][0]["value"].as_f64().unwrap();
    assert!((best - 2.99).abs() <= 0.01);
}

#[test]
fn learn_one_shot_finds_north() {
    let tmp = TempDir::new().unwrap();
    ok(&["learn", "--domain", "grid1shot"], tmp.path());
    let c = json(&tmp.path().join("candidates.json"));
    assert!(c["candidates"].as_array().unwrap().iter().any(|x| x["policy"]["action"] == "MN"));
}

#[test]
fn compare_grid_shape_and_determinism() {
    let tmp = TempDir::new().unwrap();
    let args = [
        "compare", "--domain", "mabc", "--agents", "aug-idid,opat-po", "--teammates", "random,predefined,optimal",
        "--trials", "2", "--steps", "20",
    ];
    let start = std::time::Instant::now();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&args, &a);
    assert!(start.elapsed().as_secs() < 60);
    let mut with_workers = args.to_vec();
    with_workers.extend(["--workers", "1"]);
    ok(&with_workers, &b);
    for f in ["summary.csv", "episodes.csv", "beliefs.csv"] {
        assert_eq!(bytes(&a, f), bytes(&b, f), "{f}");
    }
    let summary = String::from_utf8(bytes(&a, "summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 3 * 2);
}

#[test]
fn simulate_writes_a_belief_trace() {
    let tmp = TempDir::new().unwrap();
    ok(&["simulate", "--domain", "mabc", "--teammate", "true-model", "--trials", "3", "--steps", "10"], tmp.path());
    let sim = json(&tmp.path().join("simulate.json"));
    assert!(sim["true_model"].is_u64());
    assert_eq!(sim["final_true_model_mass"].as_array().unwrap().len(), 3);
    let beliefs = std::fs::read_to_string(tmp.path().join("beliefs.csv")).unwrap();
    assert!(beliefs.starts_with("agent,teammate,trial,step,model,mass"));
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"domain": "mabc", "horizon": 2}"#).unwrap();
    let a = tmp.path().join("a");
    ok(&["oracle", "--config", cfg.to_str().unwrap()], &a);
    assert_eq!(json(&a.join("oracle.json"))["horizon"], 2);
    let b = tmp.path().join("b");
    ok(&["oracle", "--config", cfg.to_str().unwrap(), "--horizon", "1"], &b);
    assert_eq!(json(&b.join("oracle.json"))["horizon"], 1);
    assert_eq!(json(&b.join("manifest.json"))["config"]["horizon"], 1);

    std::fs::write(&cfg, r#"{"horizn": 2}"#).unwrap();
    let o = idid(&["oracle", "--config", cfg.to_str().unwrap()], &tmp.path().join("c"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn domain_files_load() {
    let tmp = TempDir::new().unwrap();
    let file = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/domains/mabc.json");
    ok(&["oracle", "--domain", file, "--horizon", "3"], tmp.path());
    assert!((json(&tmp.path().join("oracle.json"))["value"].as_f64().unwrap() - 2.99).abs() <= 0.01);
}

#[test]
fn bad_input_exit_codes() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(idid(&["solve", "--domain", "tiger"], tmp.path()).status.code(), Some(1));
    assert_eq!(idid(&["solve", "--bogus"], tmp.path()).status.code(), Some(1));
    assert_eq!(idid(&["solve", "--true-model", "oracle"], tmp.path()).status.code(), Some(1));
    assert_eq!(idid(&["compare", "--trials", "1"], tmp.path()).status.code(), Some(1));
}
