//! Exit codes and artifact layout of the compiled binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qamem"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qamem-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, body).unwrap();
    path
}

fn run_in(dir: &Path, config: &Path, extra: &[&str]) -> Output {
    bin()
        .arg("run")
        .arg(config)
        .arg("--output-dir")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn json_of(dir: &Path) -> serde_json::Value {
    let raw = std::fs::read_to_string(dir.join("out").join("results.json")).unwrap();
    serde_json::from_str(&raw).unwrap()
}

#[test]
fn list_presets_names_every_preset() {
    let out = bin().arg("list-presets").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "walk-fig4",
        "resonator-fig5-weak",
        "resonator-fig5-strong",
        "gus-sec7c",
    ] {
        assert!(text.contains(name), "missing {name} in:\n{text}");
    }
}

#[test]
fn unknown_config_path_is_a_config_error() {
    let out = bin().args(["run", "no-such-preset-or-file"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = scratch("badkey");
    let cfg = write_config(
        &dir,
        "[model.hopfield]\nn_neurons = 10\nm_patterns = 2\nfrobs = 3\n\n\
         [experiment.hopfield]\ncorrupt_frac = 0.1\ntrials = 5\n",
    );
    let out = run_in(&dir, &cfg, &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("frobs"));
}

#[test]
fn stochastic_run_without_seed_is_a_config_error() {
    let dir = scratch("noseed");
    let cfg = write_config(
        &dir,
        "[model.hopfield]\nn_neurons = 10\nm_patterns = 2\n\n\
         [experiment.hopfield]\ncorrupt_frac = 0.1\ntrials = 5\n",
    );
    let out = run_in(&dir, &cfg, &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn mismatched_model_and_experiment_is_a_config_error() {
    let dir = scratch("mismatch");
    let cfg = write_config(
        &dir,
        "seed = 1\n\n[model.hopfield]\nn_neurons = 10\nm_patterns = 2\n\n\
         [experiment.classify]\nn_inputs = 5\ndelta = 0.5\n",
    );
    let out = run_in(&dir, &cfg, &[]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn truncation_failure_is_a_run_error() {
    let dir = scratch("truncation");
    let cfg = write_config(
        &dir,
        "[model.resonator]\nn = 2\ndelta = 0.0\neta = 0.5\ngamma1 = 0.05\n\
         gamma_n = 0.2\nfock_dim = 18\n\n\
         [experiment.metastable]\ngap_threshold = 10.0\n",
    );
    let out = run_in(&dir, &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncation"));
}

#[test]
fn walk_preset_writes_curve_and_metrics() {
    let dir = scratch("walkfig4");
    let out = bin()
        .args(["run", "walk-fig4", "--output-dir"])
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let json = json_of(&dir);
    let pop = json["metrics"]["final_pop_011"].as_f64().unwrap();
    assert!(pop > 0.999, "final_pop_011 = {pop}");

    let csv = std::fs::read_to_string(dir.join("out").join("retrieval_curve.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.contains("time (1/gamma)"), "header: {header}");
    assert!(header.contains("pop_011 (probability)"), "header: {header}");
}

#[test]
fn resonator_metastable_run_reports_the_slow_manifold() {
    let dir = scratch("meta");
    let cfg = write_config(
        &dir,
        "[model.resonator]\nn = 2\ndelta = 0.0\neta = 0.5\ngamma1 = 0.05\n\
         gamma_n = 0.2\nfock_dim = 22\n\n\
         [experiment.metastable]\ngap_threshold = 10.0\n",
    );
    let out = run_in(&dir, &cfg, &[]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json = json_of(&dir);
    assert_eq!(json["metrics"]["n_slow_modes"], 2);
    assert!(json["metrics"]["gap_ratio"].as_f64().unwrap() > 10.0);
}

#[test]
fn seed_override_lands_in_the_echoed_config() {
    let dir = scratch("seedover");
    let cfg = write_config(
        &dir,
        "seed = 5\n\n[model.hopfield]\nn_neurons = 50\nm_patterns = 4\n\n\
         [experiment.hopfield]\ncorrupt_frac = 0.1\ntrials = 10\n",
    );
    let out = run_in(&dir, &cfg, &["--seed-override", "9"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json = json_of(&dir);
    assert_eq!(json["config"]["seed"], 9);
    assert_eq!(json["provenance"]["seed"], 9);
}
