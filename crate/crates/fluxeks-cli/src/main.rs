//! `fluxeks` — wall heat-flux estimation from interior temperature readings.
//!
//! Subcommands cover the full workflow: forward simulation, dataset
//! generation, surrogate and inverse-model training, online inversion, the
//! parameter studies, and a built-in verification suite.

mod config;
mod manifest;
mod verify;

use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use config::{resolve, ConfigFile};
use fluxeks::error::Error;
use fluxeks::mlp::{MlpModel, TrainConfig};
use fluxeks::physics::{
    node_index, probe_series_csv, run_transient, CellIndex, Mesh, PhysicalParams,
};
use fluxeks::pipeline::{
    estimate_csv, load_or_train_surrogates, run_ann_eks_on_measurements,
    run_cfd_eks_on_measurements, run_inverse_ann_on_measurements, simulate_measurements,
    train_inverse_ann, InverseAnnModel, InversionConfig, InversionResult,
};
use fluxeks::signals::{
    builtin_testing_manifest, builtin_training_manifest, FluxSignal, SegmentKind, SignalManifest,
};
use fluxeks::sweep::{
    ablation_csv, ablation_study, algorithm_comparison, comparison_csv, future_step_sweep,
    nf_sweep_csv, sensor_grid, sensor_heatmap_csv, sensor_location_sweep, StudyConfig,
};
use fluxeks::transfer::AnnTransferModel;
use manifest::RunManifest;

#[derive(Parser)]
#[command(
    name = "fluxeks",
    version,
    about = "Online wall heat-flux estimation from noisy interior temperature measurements"
)]
struct Cli {
    /// Flat key-value config file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for data-parallel sections (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Cache directory for sweeps and trained models
    /// (default: $FLUXEKS_CACHE_DIR or ./fluxeks-cache).
    #[arg(long, global = true)]
    cache: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the forward solver over a flux signal and record probes.
    Simulate(SimulateArgs),
    /// Generate surrogate training datasets from a flux signal.
    GenData(GenDataArgs),
    /// Train the surrogate pair or the inverse regression model.
    Train(TrainArgs),
    /// Estimate the wall flux from noisy measurements.
    Invert(InvertArgs),
    /// Parameter studies (ablation, sensor placement, lag, comparison).
    Sweep(SweepArgs),
    /// Run the built-in oracle suite and report pass/fail.
    Verify,
}

#[derive(Args)]
struct SimulateArgs {
    /// Flux source: builtin-train, builtin-test, or a t,q CSV file.
    #[arg(long, default_value = "builtin-train")]
    flux: String,
    /// Probe coordinates `x,y` in meters (repeatable).
    #[arg(long)]
    probe: Vec<String>,
    /// Output CSV (`t,probe_0,...`).
    #[arg(long)]
    out: PathBuf,
    /// Also dump the final temperature field as a CSV grid.
    #[arg(long)]
    field_out: Option<PathBuf>,
    /// Mesh override: number of cells along the flow.
    #[arg(long)]
    nx: Option<usize>,
    /// Mesh override: number of cells across the flow.
    #[arg(long)]
    ny: Option<usize>,
    /// Mesh override: time step in seconds.
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args)]
struct GenDataArgs {
    /// Flux source: builtin-train or a t,q CSV file.
    #[arg(long, default_value = "builtin-train")]
    signal: String,
    /// Sensor coordinates `x,y` in meters.
    #[arg(long)]
    sensor: Option<String>,
    /// Relative perturbation of the sensitivity samples.
    #[arg(long)]
    eps: Option<f64>,
    /// Output CSV with input, output, and tag columns.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Corpus: builtin-train or a manifest JSON file.
    #[arg(long, default_value = "builtin-train")]
    corpus: String,
    /// Sensor coordinates `x,y` in meters.
    #[arg(long)]
    sensor: Option<String>,
    /// What to train: `surrogates` (transfer + sensitivity) or `inverse`.
    #[arg(long, default_value = "surrogates")]
    kind: String,
    /// Output directory for model files.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    /// Past window length of the inverse model (defaults to --nf).
    #[arg(long)]
    np: Option<usize>,
    /// Future window length of the inverse model.
    #[arg(long)]
    nf: Option<usize>,
    /// Noise level injected into inverse-model training inputs.
    #[arg(long)]
    train_noise: Option<f64>,
}

#[derive(Args)]
struct InvertArgs {
    /// ann_eks, cfd_eks, or inverse_ann.
    #[arg(long)]
    algorithm: Option<String>,
    /// Flux source for the ground truth: builtin-test, builtin-train, or CSV.
    #[arg(long, default_value = "builtin-test")]
    flux: String,
    /// Sensor noise standard deviation in K.
    #[arg(long)]
    noise: Option<f64>,
    /// Future steps per smoothed estimate.
    #[arg(long)]
    nf: Option<usize>,
    /// Sensor coordinates `x,y` in meters.
    #[arg(long)]
    sensor: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory holding the trained models.
    #[arg(long)]
    models: Option<PathBuf>,
    /// Estimate stream CSV (`k,t,q_true,q_hat,T_meas`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Result summary JSON ({AE, mean_step_ms, p95_step_ms, steps}).
    #[arg(long)]
    result: Option<PathBuf>,
    /// Cap the number of measurements consumed (0 = all).
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    /// ablation, sensors, nf, or compare.
    #[arg(value_name = "TYPE")]
    sweep_type: String,
    /// Output directory for tables and summaries.
    #[arg(long)]
    out: PathBuf,
    /// Sensor coordinates `x,y` (baseline location).
    #[arg(long)]
    sensor: Option<String>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    nf: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Replicate count (seeds seed, seed+1, ...).
    #[arg(long)]
    replicates: Option<usize>,
    /// ablation: families to drop, e.g. `step` or `sin,para` (repeatable).
    #[arg(long)]
    exclude: Vec<String>,
    /// sensors: grid stride (1 = every interior cell).
    #[arg(long)]
    stride: Option<usize>,
    /// sensors: explicit locations `x,y` (repeatable; overrides --stride).
    #[arg(long)]
    location: Vec<String>,
    /// nf: largest lag to sweep (0..=max).
    #[arg(long)]
    nf_max: Option<usize>,
    /// compare: noise levels, e.g. `2,5,10,15`.
    #[arg(long)]
    noise_levels: Option<String>,
    /// compare: measurement window for the full-field smoother (0 skips it).
    #[arg(long)]
    cfd_steps: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => match ConfigFile::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(6);
            }
        },
        None => ConfigFile::default(),
    };
    if let Some(jobs) = cli.jobs.or_else(|| config.get("jobs")) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .ok();
    }
    let cache_dir = cli
        .cache
        .clone()
        .or_else(|| config.get_string("cache_dir").map(PathBuf::from))
        .or_else(|| std::env::var_os("FLUXEKS_CACHE_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("fluxeks-cache"));

    let outcome = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args, &config),
        Command::GenData(args) => cmd_gen_data(args, &config),
        Command::Train(args) => cmd_train(args, &config, &cache_dir),
        Command::Invert(args) => cmd_invert(args, &config),
        Command::Sweep(args) => cmd_sweep(args, &config, &cache_dir),
        Command::Verify => cmd_verify(),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// Distinct exit codes per failure category.
fn exit_code_for(e: &Error) -> u8 {
    match e.category() {
        "io" => 3,
        "model-mismatch" => 4,
        "training" => 5,
        "parse" | "json" => 6,
        "domain" | "dimension" => 7,
        _ => 70,
    }
}

fn parse_coords(text: &str) -> Result<(f64, f64), Error> {
    let (x, y) = text
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("expected `x,y`, got '{text}'")))?;
    let x = x
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad x coordinate in '{text}'")))?;
    let y = y
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad y coordinate in '{text}'")))?;
    Ok((x, y))
}

fn sensor_cell(arg: &Option<String>, config: &ConfigFile, mesh: &Mesh) -> Result<CellIndex, Error> {
    let text = arg
        .clone()
        .or_else(|| config.get_string("sensor"))
        .unwrap_or_else(|| "0.82,0.089".to_string());
    let (x, y) = parse_coords(&text)?;
    node_index(x, y, mesh)
}

/// Resolve a flux source string into a signal plus a provenance label.
fn load_signal(source: &str, dt: f64) -> Result<(FluxSignal, String), Error> {
    match source {
        "builtin-train" => Ok((
            builtin_training_manifest().render(dt)?,
            builtin_training_manifest().content_hash(),
        )),
        "builtin-test" => Ok((
            builtin_testing_manifest().render(dt)?,
            builtin_testing_manifest().content_hash(),
        )),
        path => {
            let text = std::fs::read_to_string(path)?;
            let signal = FluxSignal::from_csv(&text)?;
            Ok((signal, fluxeks::hash::fnv1a_hex(&text)))
        }
    }
}

fn load_manifest(source: &str) -> Result<SignalManifest, Error> {
    match source {
        "builtin-train" => Ok(builtin_training_manifest()),
        "builtin-test" => Ok(builtin_testing_manifest()),
        path => SignalManifest::from_json(&std::fs::read_to_string(path)?),
    }
}

fn cmd_simulate(args: &SimulateArgs, config: &ConfigFile) -> Result<ExitCode, Error> {
    let params = PhysicalParams::default();
    let base = Mesh::default();
    let nx = resolve(args.nx, config, "nx", base.nx);
    let ny = resolve(args.ny, config, "ny", base.ny);
    let dt = resolve(args.dt, config, "dt", base.dt);
    let mesh = Mesh::for_domain(nx, ny, dt, &params)?;

    let (signal, signal_hash) = load_signal(&args.flux, mesh.dt)?;
    let mut probes = Vec::new();
    for p in &args.probe {
        let (x, y) = parse_coords(p)?;
        probes.push(node_index(x, y, &mesh)?);
    }
    let run = run_transient(&signal, &mesh, &params, &probes)?;
    std::fs::write(&args.out, probe_series_csv(&run, mesh.dt))?;
    if let Some(field_out) = &args.field_out {
        std::fs::write(field_out, run.final_field.to_csv_grid(&mesh))?;
    }
    let mut manifest = RunManifest::new(
        "simulate",
        serde_json::json!({
            "flux": args.flux, "probes": args.probe, "nx": nx, "ny": ny, "dt": dt,
        }),
        &[],
    );
    manifest.add_inline_input("flux-signal", &signal_hash);
    manifest.write_for(&args.out)?;
    println!("wrote {} rows to {}", signal.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen_data(args: &GenDataArgs, config: &ConfigFile) -> Result<ExitCode, Error> {
    let params = PhysicalParams::default();
    let mesh = Mesh::default();
    let sensor = sensor_cell(&args.sensor, config, &mesh)?;
    let eps = resolve(args.eps, config, "eps", fluxeks::dataset::DEFAULT_EPS);
    let (signal, signal_hash) = load_signal(&args.signal, mesh.dt)?;
    let pair = fluxeks::dataset::generate_datasets(&signal, sensor, eps, &mesh, &params)?;
    let mut all = pair.transfer.clone();
    all.extend_from_slice(&pair.sensitivity);
    std::fs::write(&args.out, fluxeks::dataset::dataset_csv(&all))?;
    let mut manifest = RunManifest::new(
        "gen-data",
        serde_json::json!({
            "signal": args.signal, "sensor": [sensor.i, sensor.j], "eps": eps,
            "transfer_samples": pair.transfer.len(),
            "sensitivity_samples": pair.sensitivity.len(),
        }),
        &[],
    );
    manifest.add_inline_input("flux-signal", &signal_hash);
    manifest.write_for(&args.out)?;
    println!(
        "wrote {} transfer + {} sensitivity samples to {}",
        pair.transfer.len(),
        pair.sensitivity.len(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn train_config_from(args: &TrainArgs, config: &ConfigFile) -> TrainConfig {
    let mut tc = TrainConfig::default();
    tc.seed = resolve(args.seed, config, "seed", tc.seed);
    tc.max_iterations = resolve(args.max_iterations, config, "max_iterations", tc.max_iterations);
    tc.patience = resolve(args.patience, config, "patience", tc.patience);
    tc
}

fn cmd_train(args: &TrainArgs, config: &ConfigFile, cache_dir: &Path) -> Result<ExitCode, Error> {
    let params = PhysicalParams::default();
    let mesh = Mesh::default();
    let sensor = sensor_cell(&args.sensor, config, &mesh)?;
    let manifest_doc = load_manifest(&args.corpus)?;
    let tc = train_config_from(args, config);
    std::fs::create_dir_all(&args.out)?;

    match args.kind.as_str() {
        "surrogates" => {
            let training = load_or_train_surrogates(
                Some(cache_dir),
                &manifest_doc,
                sensor,
                &mesh,
                &params,
                &tc,
            )?;
            fluxeks::pipeline::save_surrogates(&training, &args.out)?;
            std::fs::write(args.out.join("corpus.manifest.json"), manifest_doc.to_json()?)?;
            let mut rm = RunManifest::new(
                "train",
                serde_json::json!({
                    "kind": "surrogates", "corpus": args.corpus,
                    "sensor": [sensor.i, sensor.j],
                    "max_iterations": tc.max_iterations, "patience": tc.patience,
                }),
                &[tc.seed],
            );
            rm.add_inline_input("corpus", &manifest_doc.content_hash());
            rm.write_for(&args.out.join("transfer.json"))?;
            println!(
                "surrogates trained: transfer test MSE {:?}, sensitivity test MSE {:?}",
                training.transfer_report.test_mse, training.sensitivity_report.test_mse
            );
        }
        "inverse" => {
            let n_f = resolve(args.nf, config, "nf", 18);
            let n_p = resolve(args.np, config, "np", n_f);
            let train_noise = resolve(args.train_noise, config, "train_noise", 0.0);
            let (model, report) = train_inverse_ann(
                &manifest_doc,
                sensor,
                n_p,
                n_f,
                &mesh,
                &params,
                train_noise,
                &tc,
            )?;
            model.save(&args.out.join("inverse.json"))?;
            let mut rm = RunManifest::new(
                "train",
                serde_json::json!({
                    "kind": "inverse", "corpus": args.corpus,
                    "sensor": [sensor.i, sensor.j],
                    "np": n_p, "nf": n_f, "train_noise": train_noise,
                }),
                &[tc.seed],
            );
            rm.add_inline_input("corpus", &manifest_doc.content_hash());
            rm.write_for(&args.out.join("inverse.json"))?;
            println!("inverse model trained: test MSE {:?}", report.test_mse);
        }
        other => {
            return Err(Error::Parse(format!(
                "unknown training kind '{other}' (expected surrogates|inverse)"
            )))
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_invert(args: &InvertArgs, config: &ConfigFile) -> Result<ExitCode, Error> {
    let params = PhysicalParams::default();
    let mesh = Mesh::default();
    let sensor = sensor_cell(&args.sensor, config, &mesh)?;
    let algorithm = args
        .algorithm
        .clone()
        .or_else(|| config.get_string("algorithm"))
        .unwrap_or_else(|| "ann_eks".to_string());
    let noise = resolve(args.noise, config, "noise", 5.0);
    let n_f = resolve(args.nf, config, "nf", 18);
    let seed = resolve(args.seed, config, "seed", 0);
    let cap = resolve(args.steps, config, "steps", 0usize);

    let (full_signal, signal_hash) = load_signal(&args.flux, mesh.dt)?;
    let signal = if cap > 0 && cap < full_signal.len() {
        full_signal.truncated(cap)
    } else {
        full_signal
    };

    let mut inv = InversionConfig::new(sensor);
    inv.mesh = mesh;
    inv.params = params;
    inv.noise_level = noise;
    inv.n_f = n_f;
    inv.seed = seed;

    let (_truth, measurements) = simulate_measurements(&signal, &inv)?;
    let models_dir = args
        .models
        .clone()
        .or_else(|| config.get_string("models").map(PathBuf::from));
    let mut model_files: Vec<PathBuf> = Vec::new();
    let result: InversionResult = match algorithm.as_str() {
        "ann_eks" => {
            let dir = models_dir
                .ok_or_else(|| Error::Parse("--models is required for ann_eks".into()))?;
            let transfer = MlpModel::load(&dir.join("transfer.json"))?;
            let sensitivity = MlpModel::load(&dir.join("sensitivity.json"))?;
            model_files.push(dir.join("transfer.json"));
            model_files.push(dir.join("sensitivity.json"));
            let models = AnnTransferModel::new(transfer, sensitivity)?;
            fluxeks::transfer::check_sensor_match(&models, sensor, &mesh)?;
            run_ann_eks_on_measurements(&measurements, &signal.samples, &models, &inv)?
        }
        "cfd_eks" => run_cfd_eks_on_measurements(&measurements, &signal.samples, &inv)?,
        "inverse_ann" => {
            let dir = models_dir
                .ok_or_else(|| Error::Parse("--models is required for inverse_ann".into()))?;
            let model = InverseAnnModel::load(&dir.join("inverse.json"))?;
            model_files.push(dir.join("inverse.json"));
            run_inverse_ann_on_measurements(&measurements, &signal.samples, &model, &inv)?
        }
        other => {
            return Err(Error::Parse(format!(
                "unknown algorithm '{other}' (expected ann_eks|cfd_eks|inverse_ann)"
            )))
        }
    };

    if let Some(out) = &args.out {
        std::fs::write(out, estimate_csv(&result, &signal.samples, &measurements, mesh.dt))?;
        let mut rm = RunManifest::new(
            "invert",
            serde_json::json!({
                "algorithm": algorithm, "flux": args.flux, "noise": noise,
                "nf": n_f, "sensor": [sensor.i, sensor.j], "steps_cap": cap,
            }),
            &[seed],
        );
        rm.add_inline_input("flux-signal", &signal_hash);
        for file in &model_files {
            rm.add_input("model", file);
        }
        rm.write_for(out)?;
    }
    let summary = result.summary_json();
    if let Some(result_path) = &args.result {
        std::fs::write(result_path, &summary)?;
    }
    println!("{summary}");
    Ok(if result.divergent {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn parse_families(text: &str) -> Result<Vec<SegmentKind>, Error> {
    text.split(',')
        .map(|p| SegmentKind::parse(p.trim()))
        .collect()
}

fn cmd_sweep(args: &SweepArgs, config: &ConfigFile, cache_dir: &Path) -> Result<ExitCode, Error> {
    let mesh = Mesh::default();
    let sensor = sensor_cell(&args.sensor, config, &mesh)?;
    let seed = resolve(args.seed, config, "seed", 1u64);
    let replicates = resolve(args.replicates, config, "replicates", 3usize).max(1);
    let mut study = StudyConfig::new(builtin_training_manifest(), builtin_testing_manifest(), sensor);
    study.noise_level = resolve(args.noise, config, "noise", 5.0);
    study.n_f = resolve(args.nf, config, "nf", 18);
    study.seeds = (0..replicates as u64).map(|k| seed + k).collect();
    study.train_config.max_iterations = resolve(
        args.max_iterations,
        config,
        "max_iterations",
        study.train_config.max_iterations,
    );
    study.cache_dir = Some(cache_dir.to_path_buf());
    std::fs::create_dir_all(&args.out)?;

    let summary_path = args.out.join("summary.json");
    match args.sweep_type.as_str() {
        "ablation" => {
            let mut exclusions = vec![Vec::new()];
            for e in &args.exclude {
                exclusions.push(parse_families(e)?);
            }
            let rows = ablation_study(&study, &exclusions)?;
            std::fs::write(args.out.join("ablation.csv"), ablation_csv(&rows))?;
            std::fs::write(
                &summary_path,
                serde_json::to_string_pretty(&serde_json::json!({
                    "study_hash": study.content_hash(),
                    "training_manifest": study.training_manifest.content_hash(),
                    "testing_manifest": study.testing_manifest.content_hash(),
                    "rows": rows,
                }))?,
            )?;
        }
        "sensors" => {
            let locations = if args.location.is_empty() {
                sensor_grid(&study.mesh, resolve(args.stride, config, "stride", 2))
            } else {
                let mut cells = Vec::new();
                for l in &args.location {
                    let (x, y) = parse_coords(l)?;
                    cells.push(node_index(x, y, &study.mesh)?);
                }
                cells
            };
            let cells = sensor_location_sweep(&study, &locations)?;
            std::fs::write(
                args.out.join("sensor-heatmap.csv"),
                sensor_heatmap_csv(&study.mesh, &cells),
            )?;
            std::fs::write(
                &summary_path,
                serde_json::to_string_pretty(&serde_json::json!({
                    "study_hash": study.content_hash(),
                    "cells": cells,
                }))?,
            )?;
        }
        "nf" => {
            let nf_max = resolve(args.nf_max, config, "nf_max", 30);
            let training = load_or_train_surrogates(
                Some(cache_dir),
                &study.training_manifest,
                sensor,
                &study.mesh,
                &study.params,
                &study.train_config,
            )?;
            let values: Vec<usize> = (0..=nf_max).collect();
            let sweep = future_step_sweep(&study, &values, &[(sensor, training.model)])?;
            std::fs::write(args.out.join("nf-sweep.csv"), nf_sweep_csv(&sweep))?;
            std::fs::write(
                &summary_path,
                serde_json::to_string_pretty(&serde_json::json!({
                    "study_hash": study.content_hash(),
                    "time_fit": {"intercept_ms": sweep.time_fit.0, "slope_ms_per_step": sweep.time_fit.1, "r2": sweep.time_fit.2},
                    "points": sweep.points,
                }))?,
            )?;
        }
        "compare" => {
            let levels: Vec<f64> = args
                .noise_levels
                .clone()
                .or_else(|| config.get_string("noise_levels"))
                .unwrap_or_else(|| "2,5,10,15".to_string())
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| Error::Parse("bad --noise-levels".into()))?;
            let cfd_steps = resolve(args.cfd_steps, config, "cfd_steps", 200usize);
            let training = load_or_train_surrogates(
                Some(cache_dir),
                &study.training_manifest,
                sensor,
                &study.mesh,
                &study.params,
                &study.train_config,
            )?;
            let (inverse, _) = train_inverse_ann(
                &study.training_manifest,
                sensor,
                study.n_f,
                study.n_f,
                &study.mesh,
                &study.params,
                0.0,
                &study.train_config,
            )?;
            let rows = algorithm_comparison(&study, &levels, &training.model, &inverse, cfd_steps)?;
            std::fs::write(args.out.join("comparison.csv"), comparison_csv(&rows))?;
            std::fs::write(
                &summary_path,
                serde_json::to_string_pretty(&serde_json::json!({
                    "study_hash": study.content_hash(),
                    "rows": rows,
                }))?,
            )?;
        }
        other => {
            return Err(Error::Parse(format!(
                "unknown sweep type '{other}' (expected ablation|sensors|nf|compare)"
            )))
        }
    }
    let mut rm = RunManifest::new(
        "sweep",
        serde_json::json!({
            "type": args.sweep_type,
            "sensor": [sensor.i, sensor.j],
            "noise": study.noise_level,
            "nf": study.n_f,
        }),
        &study.seeds,
    );
    rm.add_inline_input("study", &study.content_hash());
    rm.write_for(&summary_path)?;
    println!("sweep '{}' written to {}", args.sweep_type, args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify() -> Result<ExitCode, Error> {
    let checks = verify::run_all();
    let mut all_ok = true;
    for check in &checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!("[{status}] {} — {}", check.name, check.detail);
        all_ok &= check.passed;
    }
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
