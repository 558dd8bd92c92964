//! Scratch: family-order and seed sensitivity of the trained filter (dev aid).

use fluxeks::mlp::TrainConfig;
use fluxeks::physics::{CellIndex, Mesh, PhysicalParams};
use fluxeks::pipeline::{load_or_train_surrogates, run_ann_eks, InversionConfig};
use fluxeks::signals::{builtin_testing_manifest, FluxSegment, SignalManifest};

fn families() -> [Vec<FluxSegment>; 4] {
    [
        vec![
            FluxSegment::step(5.66, 1200.0),
            FluxSegment::step(5.67, 5000.0),
            FluxSegment::step(5.66, 2400.0),
        ],
        vec![
            FluxSegment::triangular(5.67, 3000.0, 0.25),
            FluxSegment::triangular(5.66, 4800.0, 0.5),
            FluxSegment::triangular(5.66, 1600.0, 1.0),
        ],
        vec![
            FluxSegment::sinusoidal(5.66, 2200.0, 2200.0, 0.2),
            FluxSegment::sinusoidal(5.66, 1250.0, 1250.0, 0.4),
            FluxSegment::sinusoidal(5.66, 2500.0, 2500.0, 0.8),
        ],
        vec![
            FluxSegment::parabolic(5.66, 2800.0),
            FluxSegment::parabolic(5.66, 5000.0),
            FluxSegment::parabolic(5.66, 1400.0),
        ],
    ]
}

fn manifest(order: &[usize]) -> SignalManifest {
    let fams = families();
    let mut segments = Vec::new();
    for &f in order {
        segments.extend(fams[f].iter().cloned());
    }
    SignalManifest { dt: 0.01, segments }
}

fn main() {
    let cache = std::path::PathBuf::from("target/tmp/fluxeks-test-cache");
    let mesh = Mesh::default();
    let params = PhysicalParams::default();
    let sensor = CellIndex::new(20, 44);
    let testing = builtin_testing_manifest().render(mesh.dt).unwrap();

    for (name, order) in [
        ("para-step-tri-sin", vec![3usize, 0, 1, 2]),
    ] {
        for seed in [9u64] {
            let tc = TrainConfig {
                max_iterations: 400,
                seed,
                ..TrainConfig::default()
            };
            let m = manifest(&order);
            let training =
                load_or_train_surrogates(Some(&cache), &m, sensor, &mesh, &params, &tc).unwrap();
            for q_std in [35.0, 40.0, 50.0, 60.0] {
                for temp_std in [0.005, 0.01, 0.02] {
                    for m in [5.0, 10.0] {
                        let mut aes = Vec::new();
                        for run_seed in [1u64, 2, 3] {
                            let mut cfg = InversionConfig::new(sensor);
                            cfg.noise_level = m;
                            cfg.n_f = 18;
                            cfg.seed = run_seed;
                            cfg.tuning.q_process_std = q_std;
                            cfg.tuning.temp_process_std = temp_std;
                            let r = run_ann_eks(&testing, &training.model, &cfg).unwrap();
                            aes.push(r.ae);
                        }
                        aes.sort_by(|a, b| a.partial_cmp(b).unwrap());
                        eprintln!(
                            "{name} seed {seed} q{q_std} t{temp_std} m{m}: median {:.4} (all {:.4?})",
                            aes[1], aes
                        );
                    }
                }
            }
        }
    }
}
