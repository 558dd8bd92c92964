//! Scratch: is the error lag-dominated? Compare fast vs slow waveforms at
//! zero and nominal noise (dev aid).

use fluxeks::mlp::TrainConfig;
use fluxeks::physics::{CellIndex, Mesh, PhysicalParams};
use fluxeks::pipeline::{load_or_train_surrogates, run_ann_eks, InversionConfig};
use fluxeks::signals::{builtin_training_manifest, FluxSegment, SignalManifest};

fn main() {
    let cache = std::path::PathBuf::from("target/tmp/fluxeks-test-cache");
    let mesh = Mesh::default();
    let params = PhysicalParams::default();
    let sensor = CellIndex::new(20, 44);
    let iters: usize = std::env::var("ITERS").ok().and_then(|s| s.parse().ok()).unwrap_or(200);
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

    let fast = fluxeks::signals::builtin_testing_manifest();
    let slow = SignalManifest {
        dt: 0.01,
        segments: vec![
            FluxSegment::smooth(
                20.0,
                vec![
                    (0.0, 600.0),
                    (5.0, 2900.0),
                    (10.0, 1400.0),
                    (15.0, 3800.0),
                    (20.0, 1700.0),
                ],
            ),
            FluxSegment::step(10.0, 3600.0),
            FluxSegment::step(10.0, 1500.0),
            FluxSegment::triangular(20.0, 4200.0, 0.1),
        ],
    };

    for (name, manifest) in [("fast", &fast), ("slow", &slow)] {
        let testing = manifest.render(mesh.dt).unwrap();
        for &m in &[0.0, 5.0] {
            let mut aes = Vec::new();
            for seed in [11u64, 12, 13] {
                let mut cfg = InversionConfig::new(sensor);
                cfg.noise_level = m;
                cfg.n_f = 18;
                cfg.seed = seed;
                let r = run_ann_eks(&testing, &training.model, &cfg).expect("run");
                if seed == 11 {
                    eprintln!(
                        "  {name} m={m} divergent={} reg={} vfail={}",
                        r.divergent, r.regularizations, r.validation_failures
                    );
                    for (k, q) in r.estimates.iter().step_by(250) {
                        eprintln!("    k={k} true={:.0} est={q:.0}", testing.samples[*k]);
                    }
                }
                aes.push(r.ae);
            }
            aes.sort_by(|x, y| x.partial_cmp(y).unwrap());
            eprintln!("{name} m={m}: AE median {:.4} (all {:.4?})", aes[1], aes);
        }
    }
}
