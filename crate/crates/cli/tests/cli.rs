use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use devlab_core::montecarlo::{GoalConfig, ThresholdSource};
use devlab_core::random_walk::SurrogateThresholds;
use proptest::prelude::*;

fn devlab(args: &[&str], threads: usize) -> Output {
    Command::new(env!("CARGO_BIN_EXE_devlab"))
        .args(args)
        .env("DEVLAB_THREADS", threads.to_string())
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, cmd: &str, config: &str, out: &str, extra: &[&str], threads: usize) -> Output {
    let config = dir.join(config);
    let out = dir.join(out);
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    devlab(&args, threads)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const ADJ: &str = r#"[
  {"name": "a-always-1", "goal": {"id": "adjacent_ones", "mu": 0.1},
   "deviations": [{"player": 0, "kind": "always_action", "action": "1"}],
   "blame": {"id": "adjacent_ones_threshold"}, "horizon": 200, "trials": 3000},
  {"goal": {"id": "single_bit", "mu": 0.3}, "blame": {"id": "likelihood"}, "horizon": 1, "trials": 2000}
]"#;

#[test]
fn simulate_is_deterministic_and_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("adj.json"), ADJ).unwrap();
    let a = run_in(dir.path(), "simulate", "adj.json", "a", &["--seed", "42"], 1);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let b = run_in(dir.path(), "simulate", "adj.json", "b", &["--seed", "42"], 3);
    assert_eq!(code(&b), 0, "{}", stderr(&b));
    for file in ["report.jsonl", "aggregate.csv"] {
        let x = fs::read(dir.path().join("a").join(file)).unwrap();
        let y = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(x, y, "{file} differs across thread counts");
    }
    let jsonl = fs::read_to_string(dir.path().join("a/report.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 2);
    for line in jsonl.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["seed"], 42);
    }
    let csv = fs::read_to_string(dir.path().join("a/aggregate.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header, devlab_cli::output::AGGREGATE_HEADER.join(","));
    assert_eq!(csv.lines().count(), 3);

    let c = run_in(dir.path(), "simulate", "adj.json", "c", &["--seed", "43"], 1);
    assert_eq!(code(&c), 0);
    assert_ne!(
        fs::read(dir.path().join("a/report.jsonl")).unwrap(),
        fs::read(dir.path().join("c/report.jsonl")).unwrap()
    );
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("noid.json"),
        r#"{"goal": {"mu": 0.1}, "blame": {"id": "adjacent_ones_threshold"}, "horizon": 10, "trials": 10}"#,
    )
    .unwrap();
    let o = run_in(dir.path(), "simulate", "noid.json", "o", &[], 1);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("`id`"), "{}", stderr(&o));

    fs::write(dir.path().join("adj.json"), ADJ).unwrap();
    let o = run_in(dir.path(), "simulate", "adj.json", "o", &["--trials", "0"], 1);
    assert_eq!(code(&o), 2, "{}", stderr(&o));

    let o = run_in(dir.path(), "simulate", "missing.json", "o", &[], 1);
    assert_eq!(code(&o), 2);

    fs::write(
        dir.path().join("mismatch.json"),
        r#"{"goal": {"id": "single_bit", "mu": 0.1}, "blame": {"id": "random_walk_steps"}, "horizon": 1, "trials": 10}"#,
    )
    .unwrap();
    assert_eq!(code(&run_in(dir.path(), "simulate", "mismatch.json", "o", &[], 1)), 2);
}

#[test]
fn enumerate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("adj.json"),
        r#"{"goal": {"id": "adjacent_ones", "mu": 0.2}, "horizon": 8,
            "hypothesis": [{"player": 0, "kind": "always_action", "action": "1"},
                           {"player": 1, "kind": "always_action", "action": "1"}]}"#,
    )
    .unwrap();
    let o = run_in(dir.path(), "enumerate", "adj.json", "o", &[], 1);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let line = fs::read_to_string(dir.path().join("o/bounds.jsonl")).unwrap();
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(v["bounds"]["passed"], true);
    assert_eq!(v["horizon"], 8);

    let o = run_in(dir.path(), "enumerate", "adj.json", "o", &["--horizon", "40"], 1);
    assert_eq!(code(&o), 3, "{}", stderr(&o));

    fs::write(
        dir.path().join("bit.json"),
        r#"{"goal": {"id": "single_bit", "mu": 0.3}, "horizon": 1,
            "hypothesis": [{"player": 0, "kind": "always_action", "action": "1"},
                           {"player": 1, "kind": "always_action", "action": "1"}]}"#,
    )
    .unwrap();
    let o = run_in(dir.path(), "enumerate", "bit.json", "bit", &[], 1);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let line = fs::read_to_string(dir.path().join("bit/bounds.jsonl")).unwrap();
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    let eps = v["bounds"]["epsilon"].as_f64().unwrap();
    assert!((eps - 0.09).abs() < 1e-12, "{eps}");

    let o = run_in(dir.path(), "enumerate", "bit.json", "bit", &["--trials", "5"], 1);
    assert_eq!(code(&o), 2);
}

#[test]
fn calibrate_fragment_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cal.json"), r#"{"horizon": 1000, "alpha": 0.05, "trials": 800, "n0": 10}"#).unwrap();
    let a = run_in(dir.path(), "calibrate", "cal.json", "a", &["--seed", "5"], 1);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let b = run_in(dir.path(), "calibrate", "cal.json", "b", &["--seed", "5"], 2);
    assert_eq!(code(&b), 0);
    let fa = fs::read(dir.path().join("a/thresholds.json")).unwrap();
    assert_eq!(fa, fs::read(dir.path().join("b/thresholds.json")).unwrap());

    let fragment: GoalConfig = serde_json::from_slice(&fa).unwrap();
    assert!(matches!(fragment, GoalConfig::RandomWalk { thresholds: Some(ThresholdSource::Inline(_)), .. }));
    let again: GoalConfig = serde_json::from_str(&serde_json::to_string(&fragment).unwrap()).unwrap();
    assert_eq!(again, fragment);

    fs::write(
        dir.path().join("walk.json"),
        r#"{"goal": {"id": "random_walk", "thresholds": "a/thresholds.json"},
            "deviations": [{"player": 1, "kind": "always_action", "action": "+1"}],
            "blame": {"id": "random_walk_steps"}, "horizon": 1000, "trials": 50}"#,
    )
    .unwrap();
    let s = run_in(dir.path(), "simulate", "walk.json", "s", &[], 1);
    assert_eq!(code(&s), 0, "{}", stderr(&s));

    fs::write(dir.path().join("bad.json"), r#"{"horizon": 1000, "alpha": 0.7, "trials": 800}"#).unwrap();
    assert_eq!(code(&run_in(dir.path(), "calibrate", "bad.json", "x", &[], 1)), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fragments_reparse_equal(
        theta1 in 1e-6f64..1e3, theta2 in 1e-6f64..1e3, theta3 in -1e3f64..1e3, n0 in 3usize..10_000, start in 1i64..100
    ) {
        let fragment = GoalConfig::RandomWalk {
            start,
            thresholds: Some(ThresholdSource::Inline(SurrogateThresholds { theta1, theta2, theta3, n0 })),
        };
        let text = serde_json::to_string_pretty(&fragment).unwrap();
        let back: GoalConfig = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, fragment);
    }
}
