use std::path::Path;

use ares::cli::run_with_args;
use ares::datasets::{make_synthetic, write_csv, SyntheticSpec};

const FAST: &str = r#""train": {"max_epochs": 8, "patience": 4, "batch_size": 64}"#;

const TOY: &str = r#"{"source": "synthetic", "preset": "gaussian_classes", "classes": 3, "dim": 6, "size": 300}"#;

fn toy_config(dir: &Path, extra: &str) -> String {
    config_with(dir, TOY, extra)
}

fn config_with(dir: &Path, dataset: &str, extra: &str) -> String {
    let path = dir.join("config.json");
    let json = format!(
        r#"{{"dataset": {dataset}, {FAST}, "seed": 4, "diagnostic": false, "output_dir": "{}"{extra}}}"#,
        dir.join("out").display()
    );
    std::fs::write(&path, json).unwrap();
    path.display().to_string()
}

fn run(args: &[&str]) -> i32 {
    let mut full = vec!["ares"];
    full.extend_from_slice(args);
    run_with_args(full)
}

/// 2 classes of 100 rows.
fn toy_csv(dir: &Path, name: &str, dim: usize) -> String {
    let data = make_synthetic(&SyntheticSpec::gaussian_classes(2, dim, 100), 1).unwrap();
    let path = dir.join(name);
    write_csv(&data, &path, "label").unwrap();
    path.display().to_string()
}

#[test]
fn train_writes_model_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = toy_config(dir.path(), "");
    let out = dir.path().join("out");
    assert_eq!(run(&["train", "--config", &config]), 0);
    assert!(out.join("model.bin").exists() && out.join("model.idx").exists());
    let first = std::fs::read(out.join("loss_history.csv")).unwrap();
    assert!(first.len() > 20);
    assert_eq!(run(&["train", "--config", &config]), 0);
    assert_eq!(std::fs::read(out.join("loss_history.csv")).unwrap(), first);
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = toy_config(dir.path(), r#", "learning_rat": 0.1"#);
    assert_eq!(run(&["train", "--config", &config]), 2);
    let err = ares::cli::RunConfig::from_file(Path::new(&config)).unwrap_err().to_string();
    assert!(err.contains("learning_rat"), "{err}");
}

#[test]
fn unsupported_density_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = toy_config(dir.path(), "");
    assert_eq!(run(&["train", "--config", &config, "--density", "nf"]), 2);
}

fn score_records(path: &Path) -> Vec<serde_json::Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn score_preserves_rows_and_honours_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = toy_config(dir.path(), "");
    let csv = toy_csv(dir.path(), "train.csv", 6);
    let out = dir.path().join("out");
    let model = out.join("model.bin").display().to_string();
    assert_eq!(run(&["train", "--config", &config, "--data", &csv]), 0);

    assert_eq!(run(&["score", "--config", &config, "--data", &csv, "--model", &model]), 0);
    let lof = score_records(&out.join("scores.jsonl"));
    assert_eq!(lof.len(), 200);
    for (i, r) in lof.iter().enumerate() {
        assert_eq!(r["id"], i);
    }

    assert_eq!(run(&["score", "--config", &config, "--data", &csv, "--model", &model, "--alpha", "0"]), 0);
    for r in score_records(&out.join("scores.jsonl")) {
        assert_eq!(r["total"], r["r"]);
    }

    let args = ["score", "--config", &config, "--data", &csv, "--model", &model, "--density", "gd-mahalanobis"];
    assert_eq!(run(&args), 0);
    let gd = score_records(&out.join("scores.jsonl"));
    assert!(gd.iter().zip(&lof).any(|(a, b)| a["total"] != b["total"]));

    let wide = toy_csv(dir.path(), "wide.csv", 7);
    assert_eq!(run(&["score", "--config", &config, "--data", &wide, "--model", &model]), 3);
}

#[test]
fn experiment_one_class_writes_three_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = toy_config(dir.path(), r#", "experiment": {"normality": "one_class"}"#);
    assert_eq!(run(&["experiment", "--config", &config, "--compare", "ares,ae"]), 0);
    let out = dir.path().join("out");
    let table = std::fs::read_to_string(out.join("per_run_auc.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 3);
    let results: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("results.json")).unwrap()).unwrap();
    let comparison = &results["comparisons"][0];
    assert_eq!((comparison["a"].as_str(), comparison["b"].as_str()), (Some("ares"), Some("ae")));
    // three runs cannot give a signed-rank p-value; the reason is recorded instead
    assert!(comparison["result"].is_null());
    let reason = comparison["error"].as_str().unwrap();
    assert!(reason.contains("at least 5") || reason.contains("all paired differences are zero"), "{reason}");
}

#[test]
fn compare_reports_p_value_with_enough_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = config_with(
        dir.path(),
        r#"{"source": "synthetic", "preset": "gaussian_classes", "classes": 6, "dim": 6, "size": 150}"#,
        r#", "experiment": {"normality": "multi_class"}"#,
    );
    assert_eq!(run(&["experiment", "--config", &config, "--compare", "ares,ae"]), 0);
    let text = std::fs::read_to_string(dir.path().join("out").join("results.json")).unwrap();
    let results: serde_json::Value = serde_json::from_str(&text).unwrap();
    let p = results["comparisons"][0]["result"]["p_value"].as_f64().unwrap();
    assert!(p > 0.0 && p <= 1.0);
}

#[test]
fn alpha_sweep_has_five_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = toy_config(dir.path(), r#", "experiment": {"normality": "multi_class", "arrangements": [0]}"#);
    assert_eq!(run(&["sweep", "--config", &config, "--sweep", "alpha=0.1,0.25,0.5,1,2"]), 0);
    let table = std::fs::read_to_string(dir.path().join("out").join("sweep_alpha.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    let alphas: Vec<&str> = rows.iter().map(|r| r.split(',').next().unwrap()).collect();
    assert_eq!(alphas, ["0.1", "0.25", "0.5", "1", "2"]);
}
