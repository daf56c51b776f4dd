//! End-to-end runs of the `treelab` binary.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn treelab(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treelab"))
        .args(args)
        .env("TREELAB_CACHE", cache)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(cache: &Path, args: &[&str]) -> String {
    let o = treelab(cache, args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o)
}

#[test]
fn count_examples() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ok(dir.path(), &["count", "--n", "4", "--m", "3"]), "H(4,3)=4\n");
    assert_eq!(ok(dir.path(), &["count", "--n", "4", "--h", "2"]), "E(4,2)=3\n");
    assert_eq!(ok(dir.path(), &["count", "--n", "11"]), "C(10)=16796\n");
    assert_eq!(ok(dir.path(), &["count", "--n", "4", "--h", "9"]), "E(4,9)=0\n");
    let log = ok(dir.path(), &["count", "--n", "4", "--m", "3", "--backend", "log"]);
    assert!(log.starts_with("H(4,3)="), "{log}");
}

#[test]
fn partition_function_and_law() {
    let dir = tempfile::tempdir().unwrap();
    let z = ok(dir.path(), &["zfun", "--n", "3", "--mu", "0"]);
    assert!(z.lines().any(|l| l == "Z=2"), "{z}");
    let law = ok(dir.path(), &["law", "--n", "4", "--mu", "0"]);
    let probs: Vec<f64> = law
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(probs.len(), 4);
    for (p, q) in probs.iter().zip([0.0, 0.2, 0.6, 0.2]) {
        assert!((p - q).abs() < 1e-15);
    }
    let json = ok(
        dir.path(),
        &[
            "law",
            "--n",
            "6",
            "--mu",
            "1",
            "--kind",
            "root-degree",
            "--format",
            "json",
        ],
    );
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(v.is_object() || v.is_array());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        treelab(dir.path(), &["asym", "--n", "100", "--mu", "1"]).status.code(),
        Some(0)
    );
    let bad_mu = treelab(dir.path(), &["zfun", "--n", "10", "--mu=-1"]);
    assert_eq!(bad_mu.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad_mu.stderr).starts_with("treelab: error["));
    assert_eq!(
        treelab(dir.path(), &["count", "--verify-tree", "(()"]).status.code(),
        Some(1)
    );
    assert_eq!(treelab(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        treelab(dir.path(), &["exp", "no-such-experiment"]).status.code(),
        Some(1)
    );
    assert_eq!(treelab(dir.path(), &["exp", "star"]).status.code(), Some(0));
    // An impossible tolerance makes a gated row fail.
    let cfg = dir.path().join("strict.json");
    std::fs::write(&cfg, r#"{"tolerance": 1e-12}"#).unwrap();
    let gated = treelab(
        dir.path(),
        &["exp", "height-lln", "--n", "200,400", "--config", cfg.to_str().unwrap()],
    );
    assert_eq!(gated.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&gated.stderr).contains("error[gate]"));
}

#[test]
fn sample_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let trees = ok(
        dir.path(),
        &["sample", "--n", "30", "--mu", "0.5", "--count", "20", "--seed", "4"],
    );
    assert_eq!(trees.lines().count(), 20);
    let mut child = Command::new(env!("CARGO_BIN_EXE_treelab"))
        .args(["count", "--verify-tree"])
        .env("TREELAB_CACHE", dir.path())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(trees.as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let stats = stdout(&o);
    assert_eq!(stats.lines().count(), 20);
    assert!(stats.lines().all(|l| l.starts_with("size=30 ")));
}

#[test]
fn seeds_determine_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = |seed: &'static str| ["sample", "--n", "50", "--mu", "0.3", "--count", "5", "--seed", seed];
    let a = ok(dir.path(), &args("9"));
    assert_eq!(a, ok(dir.path(), &args("9")));
    assert_ne!(a, ok(dir.path(), &args("10")));
    let mut workers = vec!["--workers", "1"];
    workers.extend(args("9"));
    assert_eq!(a, ok(dir.path(), &workers));
    let contour = ok(
        dir.path(),
        &["sample", "--n", "5", "--mu", "0", "--format", "contour", "--seed", "1"],
    );
    let steps = contour.trim().strip_prefix("0:").unwrap();
    assert_eq!(steps.len(), 9);
    assert!(steps.chars().all(|c| c == 'U' || c == 'D'));
}

#[test]
fn experiment_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let json = dir.path().join("r.json");
    ok(
        dir.path(),
        &["exp", "lambda-expansions", "--out", csv.to_str().unwrap()],
    );
    ok(
        dir.path(),
        &["exp", "lambda-expansions", "--out", json.to_str().unwrap()],
    );
    assert!(std::fs::read_to_string(&csv)
        .unwrap()
        .starts_with("# experiment=lambda-expansions\n"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["experiment"], "lambda-expansions");
    let listed = ok(dir.path(), &["exp", "--list"]);
    assert_eq!(listed.lines().count(), 14);
}

#[test]
fn cache_commands_use_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let built = ok(dir.path(), &["count", "--build", "--n-max", "50", "--m-max", "10"]);
    assert!(built.contains("fingerprint="));
    let listed = ok(dir.path(), &["cache", "list"]);
    assert_eq!(listed.lines().count(), 1);
    assert!(listed.contains("n_max=50"));
    ok(dir.path(), &["cache", "verify"]);
    ok(dir.path(), &["cache", "purge"]);
    assert_eq!(ok(dir.path(), &["cache", "list"]), "");
}
