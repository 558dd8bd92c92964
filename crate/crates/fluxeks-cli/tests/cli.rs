//! End-to-end exercises of the `fluxeks` binary: happy paths over tiny
//! corpora plus the documented exit codes for the main failure classes.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fluxeks"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::remove_dir_all(&dir).ok();
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// ~4 s of flux: two steps and a triangle, cheap to train on.
fn tiny_manifest_json() -> &'static str {
    r#"{
      "dt": 0.01,
      "segments": [
        {"kind": "step", "duration": 1.0, "amplitude": 1500.0, "offset": 0.0, "frequency": 0.0},
        {"kind": "step", "duration": 1.0, "amplitude": 3500.0, "offset": 0.0, "frequency": 0.0},
        {"kind": "triangular", "duration": 2.0, "amplitude": 2500.0, "offset": 0.0, "frequency": 0.5}
      ]
    }"#
}

fn write_tiny_signal_csv(dir: &Path) -> PathBuf {
    let mut csv = String::from("t,q\n");
    for k in 0..300 {
        let t = k as f64 * 0.01;
        let q = if k < 150 { 2000.0 } else { 3000.0 };
        csv.push_str(&format!("{t},{q}\n"));
    }
    let path = dir.join("signal.csv");
    std::fs::write(&path, csv).unwrap();
    path
}

#[test]
fn simulate_writes_probe_csv_and_manifest() {
    let dir = workdir("cli-simulate");
    let signal = write_tiny_signal_csv(&dir);
    let out = dir.join("probes.csv");
    let field = dir.join("field.csv");
    let status = bin()
        .args(["simulate", "--flux"])
        .arg(&signal)
        .args(["--probe", "0.82,0.089", "--probe", "0.5,0.05", "--out"])
        .arg(&out)
        .arg("--field-out")
        .arg(&field)
        .status()
        .unwrap();
    assert!(status.success());

    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,probe_0,probe_1");
    assert_eq!(lines.count(), 300);

    let grid = std::fs::read_to_string(&field).unwrap();
    assert!(grid.starts_with("y\\x,"));
    assert_eq!(grid.lines().count(), 51); // header + 50 rows

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("probes.csv.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["tool"], "fluxeks");
    assert_eq!(manifest["command"], "simulate");
    assert!(manifest["timestamp_epoch_s"].as_u64().unwrap() > 0);
}

#[test]
fn gen_data_counts_samples() {
    let dir = workdir("cli-gendata");
    let signal = write_tiny_signal_csv(&dir);
    let out = dir.join("dataset.csv");
    let status = bin()
        .args(["gen-data", "--signal"])
        .arg(&signal)
        .args(["--sensor", "0.82,0.089", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    // header + 300 transfer + 3600 sensitivity rows
    assert_eq!(text.lines().count(), 1 + 300 + 12 * 300);
    assert!(text.lines().next().unwrap().ends_with("tag"));
}

#[test]
fn train_invert_roundtrip_with_result_json() {
    let dir = workdir("cli-train-invert");
    let corpus = dir.join("corpus.json");
    std::fs::write(&corpus, tiny_manifest_json()).unwrap();
    let models = dir.join("models");
    let cache = dir.join("cache");

    let status = bin()
        .arg("--cache")
        .arg(&cache)
        .args(["train", "--corpus"])
        .arg(&corpus)
        .args(["--sensor", "0.82,0.089", "--max-iterations", "40", "--out"])
        .arg(&models)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(models.join("transfer.json").exists());
    assert!(models.join("sensitivity.json").exists());
    assert!(models.join("reports.json").exists());

    // Inverse model over a tiny window.
    let status = bin()
        .arg("--cache")
        .arg(&cache)
        .args(["train", "--kind", "inverse", "--corpus"])
        .arg(&corpus)
        .args([
            "--sensor",
            "0.82,0.089",
            "--max-iterations",
            "40",
            "--nf",
            "6",
            "--out",
        ])
        .arg(&models)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(models.join("inverse.json").exists());

    // Invert the same corpus signal (self-consistency run, low noise).
    let signal = dir.join("flux.csv");
    let rendered = {
        let out = bin()
            .args(["simulate", "--flux"])
            .arg(&corpus_to_signal(&corpus, &dir))
            .args(["--probe", "0.82,0.089", "--out"])
            .arg(dir.join("probes.csv"))
            .status()
            .unwrap();
        assert!(out.success());
        corpus_to_signal(&corpus, &dir)
    };
    std::fs::copy(&rendered, &signal).unwrap();

    let est = dir.join("estimates.csv");
    let result = dir.join("result.json");
    let output = bin()
        .args(["invert", "--algorithm", "ann_eks", "--flux"])
        .arg(&signal)
        .args(["--noise", "1", "--nf", "6", "--sensor", "0.82,0.089", "--models"])
        .arg(&models)
        .arg("--out")
        .arg(&est)
        .arg("--result")
        .arg(&result)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    assert!(summary["AE"].is_number());
    assert!(summary["mean_step_ms"].is_number());
    assert!(summary["p95_step_ms"].is_number());
    assert!(summary["steps"].as_u64().unwrap() > 0);

    let text = std::fs::read_to_string(&est).unwrap();
    assert!(text.starts_with("k,t,q_true,q_hat,T_meas"));

    // Using the models at the wrong sensor is a model mismatch: exit code 4.
    let output = bin()
        .args(["invert", "--algorithm", "ann_eks", "--flux"])
        .arg(&signal)
        .args(["--noise", "1", "--nf", "6", "--sensor", "0.5,0.05", "--models"])
        .arg(&models)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
}

/// Render the corpus manifest to a t,q CSV the CLI can consume.
fn corpus_to_signal(corpus: &Path, dir: &Path) -> PathBuf {
    let manifest =
        fluxeks::signals::SignalManifest::from_json(&std::fs::read_to_string(corpus).unwrap())
            .unwrap();
    let signal = manifest.render(0.01).unwrap();
    let path = dir.join("rendered.csv");
    std::fs::write(&path, signal.to_csv()).unwrap();
    path
}

#[test]
fn exit_codes_for_failure_classes() {
    let dir = workdir("cli-exits");
    // Unknown flag: clap's usage error.
    let output = bin().args(["simulate", "--no-such-flag"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));

    // Missing model file: I/O error.
    let output = bin()
        .args(["invert", "--algorithm", "ann_eks", "--flux", "builtin-test"])
        .args(["--models"])
        .arg(dir.join("nonexistent"))
        .args(["--steps", "30"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));

    // Unknown algorithm: parse error.
    let output = bin()
        .args(["invert", "--algorithm", "magic", "--flux", "builtin-test"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(6));

    // Bad config file: config error.
    let bad = dir.join("bad.conf");
    std::fs::write(&bad, "this is not key value\n").unwrap();
    let output = bin()
        .arg("--config")
        .arg(&bad)
        .args(["verify"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(6));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = workdir("cli-config");
    let signal = write_tiny_signal_csv(&dir);
    let conf = dir.join("run.conf");
    // Config points the probe... simulate reads mesh overrides from config.
    std::fs::write(&conf, "nx = 10\nny = 20\n").unwrap();
    let out = dir.join("probes.csv");
    let status = bin()
        .arg("--config")
        .arg(&conf)
        .args(["simulate", "--flux"])
        .arg(&signal)
        .args(["--probe", "0.5,0.05", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    // Field grid honors the config mesh: flag absent, config wins.
    let field = dir.join("field.csv");
    let status = bin()
        .arg("--config")
        .arg(&conf)
        .args(["simulate", "--flux"])
        .arg(&signal)
        .args(["--probe", "0.5,0.05", "--ny", "50", "--out"])
        .arg(&out)
        .arg("--field-out")
        .arg(&field)
        .status()
        .unwrap();
    assert!(status.success());
    let grid = std::fs::read_to_string(&field).unwrap();
    // Flag --ny 50 overrides config ny=20: 50 rows + header.
    assert_eq!(grid.lines().count(), 51);
}

#[test]
fn verify_passes_on_a_correct_build() {
    let output = bin().arg("verify").output().unwrap();
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(
        output.status.success(),
        "verify failed:\n{stdout}\n{}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(stdout.matches("[PASS]").count() >= 5, "{stdout}");
    assert!(!stdout.contains("[FAIL]"));
}
