//! Experiment configs, report formats and reproducibility.

use treelab::counting::Backend;
use treelab::experiments::{describe, run_experiment, ExperimentConfig, Verdict, DEFAULT_SEED, EXPERIMENTS};

fn small_width_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        seed: Some(seed),
        n: Some(vec![200, 400]),
        samples: Some(400),
        ..Default::default()
    }
}

#[test]
fn config_parsing() {
    let c =
        ExperimentConfig::from_json(r#"{"seed": 7, "n": [100, 200], "backend": "log-approx", "gamma": 0.5}"#).unwrap();
    assert_eq!(c.seed(), 7);
    assert_eq!(c.n, Some(vec![100, 200]));
    assert_eq!(c.backend, Some(Backend::LogApprox));
    assert_eq!(c.gamma, Some(0.5));
    assert!(c.mu.is_none());
    assert_eq!(ExperimentConfig::from_json("{}").unwrap().seed(), DEFAULT_SEED);
    assert!(ExperimentConfig::from_json(r#"{"sead": 7}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"n": "ten"}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"backend": "fast"}"#).is_err());
}

#[test]
fn every_name_is_described_and_unknown_names_fail() {
    for name in EXPERIMENTS {
        assert!(describe(name).is_some(), "{name}");
    }
    assert!(describe("nope").is_none());
    assert!(run_experiment("nope", &ExperimentConfig::default()).is_err());
}

#[test]
fn exhaustive_and_expansion_experiments_pass() {
    for name in ["bijection-exhaustive", "lambda-expansions", "star"] {
        let r = run_experiment(name, &ExperimentConfig::default()).unwrap();
        let bad: Vec<_> = r.failures().map(|f| f.quantity.clone()).collect();
        assert!(r.passed(), "{name}: {bad:?}");
        assert!(r.rows.iter().any(|row| row.pass == Verdict::Pass));
    }
}

#[test]
fn csv_layout() {
    let r = run_experiment("lambda-expansions", &ExperimentConfig::default()).unwrap();
    let csv = r.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "# experiment=lambda-expansions");
    assert_eq!(lines[1], format!("# seed={DEFAULT_SEED}"));
    let header = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        lines[header],
        "experiment,n,mu,quantity,measured,predicted,tolerance,stderr,pass,provenance"
    );
    assert_eq!(lines.len() - header - 1, r.rows.len());
    for l in &lines[header + 1..] {
        assert_eq!(l.split(',').count(), 10, "{l}");
        assert!(l.starts_with("lambda-expansions,"));
    }
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(json["experiment"], "lambda-expansions");
    assert_eq!(json["rows"].as_array().unwrap().len(), r.rows.len());
}

#[test]
fn monte_carlo_reports_are_reproducible() {
    let a = run_experiment("width-scaling", &small_width_config(5))
        .unwrap()
        .to_csv();
    let b = run_experiment("width-scaling", &small_width_config(5))
        .unwrap()
        .to_csv();
    let c = run_experiment("width-scaling", &small_width_config(6))
        .unwrap()
        .to_csv();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.contains("monte-carlo(400)"));
}

#[test]
fn cache_dir_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        cache_dir: Some(dir.path().to_path_buf()),
        ..small_width_config(1)
    };
    let first = run_experiment("width-scaling", &cfg).unwrap().to_csv();
    assert!(!treelab::counting::cache::list(dir.path()).unwrap().is_empty());
    assert_eq!(first, run_experiment("width-scaling", &cfg).unwrap().to_csv());
    assert_eq!(
        first,
        run_experiment("width-scaling", &small_width_config(1))
            .unwrap()
            .to_csv()
    );
}

#[test]
fn bad_parameters_are_errors() {
    let cfg = ExperimentConfig {
        n: Some(vec![]),
        ..Default::default()
    };
    assert!(run_experiment("height-lln", &cfg).is_err());
}
