//! Scratch tuning sweep over process-noise strengths (dev aid).
//!
//! Env knobs: CORPUS=full|small, ITERS=n, NF=n, NOISE=m,
//! QSTD/TSTD=comma lists, CACHE=dir.

use fluxeks::mlp::TrainConfig;
use fluxeks::physics::{CellIndex, Mesh, PhysicalParams};
use fluxeks::pipeline::{load_or_train_surrogates, run_ann_eks, InversionConfig};
use fluxeks::signals::{
    builtin_testing_manifest, builtin_training_manifest, FluxSegment, SignalManifest,
};

fn small_training_manifest() -> SignalManifest {
    SignalManifest {
        dt: 0.01,
        segments: vec![
            FluxSegment::step(1.0, 1200.0),
            FluxSegment::step(1.0, 4200.0),
            FluxSegment::step(1.0, 2300.0),
            FluxSegment::triangular(3.0, 3000.0, 0.5),
            FluxSegment::sinusoidal(3.0, 1800.0, 1800.0, 0.5),
            FluxSegment::parabolic(3.0, 4000.0),
        ],
    }
}

fn small_testing_manifest() -> SignalManifest {
    SignalManifest {
        dt: 0.01,
        segments: vec![
            FluxSegment::smooth(
                3.0,
                vec![(0.0, 800.0), (1.0, 2600.0), (2.0, 1300.0), (3.0, 2100.0)],
            ),
            FluxSegment::step(3.0, 3400.0),
            FluxSegment::triangular(3.0, 2600.0, 0.4),
        ],
    }
}

fn env_list(name: &str, default: &[f64]) -> Vec<f64> {
    std::env::var(name)
        .ok()
        .map(|s| s.split(',').map(|v| v.parse().unwrap()).collect())
        .unwrap_or_else(|| default.to_vec())
}

fn main() {
    let cache = std::path::PathBuf::from(
        std::env::var("CACHE").unwrap_or_else(|_| "target/tmp/fluxeks-test-cache".into()),
    );
    let full = std::env::var("CORPUS").map(|c| c == "full").unwrap_or(false);
    let iters: usize = std::env::var("ITERS").ok().and_then(|s| s.parse().ok()).unwrap_or(600);
    let nf: usize = std::env::var("NF").ok().and_then(|s| s.parse().ok()).unwrap_or(18);
    let noise: f64 = std::env::var("NOISE").ok().and_then(|s| s.parse().ok()).unwrap_or(5.0);

    let mesh = Mesh::default();
    let params = PhysicalParams::default();
    let sensor = CellIndex::new(20, 44);
    let tc = TrainConfig {
        max_iterations: iters,
        seed: 7,
        ..TrainConfig::default()
    };
    let (train_manifest, test_manifest) = if full {
        (builtin_training_manifest(), builtin_testing_manifest())
    } else {
        (small_training_manifest(), small_testing_manifest())
    };
    let t0 = std::time::Instant::now();
    let training =
        load_or_train_surrogates(Some(&cache), &train_manifest, sensor, &mesh, &params, &tc)
            .expect("train");
    eprintln!(
        "trained in {:.1}s: transfer mse {:?} ({} iters, {:?}), sens mse {:?} ({} iters, {:?})",
        t0.elapsed().as_secs_f64(),
        training.transfer_report.test_mse,
        training.transfer_report.iterations,
        training.transfer_report.stop,
        training.sensitivity_report.test_mse,
        training.sensitivity_report.iterations,
        training.sensitivity_report.stop,
    );
    let testing = test_manifest.render(mesh.dt).unwrap();

    println!("q_std,temp_std,m,nf,seed,ae");
    for &q_std in &env_list("QSTD", &[50.0, 200.0, 500.0]) {
        for &temp_std in &env_list("TSTD", &[0.01, 0.05, 0.2]) {
            let mut aes = Vec::new();
            for seed in [11u64, 12, 13] {
                let mut cfg = InversionConfig::new(sensor);
                cfg.noise_level = noise;
                cfg.n_f = nf;
                cfg.seed = seed;
                cfg.tuning.q_process_std = q_std;
                cfg.tuning.temp_process_std = temp_std;
                let r = run_ann_eks(&testing, &training.model, &cfg).expect("run");
                println!("{q_std},{temp_std},{noise},{nf},{seed},{}", r.ae);
                aes.push(r.ae);
            }
            let mean = aes.iter().sum::<f64>() / aes.len() as f64;
            eprintln!("q_std {q_std:7} temp_std {temp_std:5} m {noise} nf {nf}: mean AE {mean:.4}");
        }
    }
}
