//! Scratch: fine tuning grid + error localization (dev aid).

use fluxeks::mlp::TrainConfig;
use fluxeks::physics::{CellIndex, Mesh, PhysicalParams};
use fluxeks::pipeline::{average_error, load_or_train_surrogates, run_ann_eks, InversionConfig};
use fluxeks::signals::{builtin_testing_manifest, builtin_training_manifest};

fn main() {
    let cache = std::path::PathBuf::from("target/tmp/fluxeks-test-cache");
    let mesh = Mesh::default();
    let params = PhysicalParams::default();
    let sensor = CellIndex::new(20, 44);
    let iters: usize = std::env::var("ITERS").ok().and_then(|s| s.parse().ok()).unwrap_or(400);
    let tc = TrainConfig {
        max_iterations: iters,
        seed: 7,
        ..TrainConfig::default()
    };
    let training = load_or_train_surrogates(
        Some(&cache),
        &builtin_training_manifest(),
        sensor,
        &mesh,
        &params,
        &tc,
    )
    .expect("train");
    let testing = builtin_testing_manifest().render(mesh.dt).unwrap();

    // Error profile for the default tuning.
    let mut cfg = InversionConfig::new(sensor);
    cfg.noise_level = 5.0;
    cfg.n_f = 18;
    cfg.seed = 11;
    let r = run_ann_eks(&testing, &training.model, &cfg).unwrap();
    let by_k: std::collections::HashMap<usize, f64> = r.estimates.iter().copied().collect();
    let scale = testing.samples.iter().cloned().fold(0.0f64, f64::max);
    for window in [(18, 300), (300, 1000), (1000, 2500), (2500, 3500), (3500, 5982)] {
        let mut t = Vec::new();
        let mut e = Vec::new();
        for k in window.0..window.1 {
            if let Some(&q) = by_k.get(&k) {
                t.push(testing.samples[k]);
                e.push(q);
            }
        }
        let mut acc = 0.0;
        for (tt, ee) in t.iter().zip(&e) {
            let d = (tt - ee) / scale;
            acc += d * d;
        }
        let ae = (acc / t.len() as f64).sqrt();
        eprintln!("window {:>4}..{:>4}: windowed AE {ae:.4}", window.0, window.1);
    }
    eprintln!("full AE {:.4}", r.ae);
    let _ = average_error(&[1.0], &[1.0]);

    // Fine grid.
    for &q_std in &[10.0, 20.0, 30.0, 50.0, 80.0] {
        for &temp_std in &[0.005, 0.01, 0.03] {
            for &nf in &[18usize] {
                let mut aes = Vec::new();
                for seed in [11u64, 12, 13] {
                    let mut cfg = InversionConfig::new(sensor);
                    cfg.noise_level = 5.0;
                    cfg.n_f = nf;
                    cfg.seed = seed;
                    cfg.tuning.q_process_std = q_std;
                    cfg.tuning.temp_process_std = temp_std;
                    let r = run_ann_eks(&testing, &training.model, &cfg).unwrap();
                    aes.push(r.ae);
                }
                aes.sort_by(|a, b| a.partial_cmp(b).unwrap());
                eprintln!("q_std {q_std:4} temp_std {temp_std:5} nf {nf}: median {:.4} (all {:.4?})", aes[1], aes);
            }
        }
    }
}
