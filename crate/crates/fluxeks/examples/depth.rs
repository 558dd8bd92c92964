//! Scratch: filter accuracy vs training depth (dev aid).

use fluxeks::mlp::TrainConfig;
use fluxeks::physics::{CellIndex, Mesh, PhysicalParams};
use fluxeks::pipeline::{load_or_train_surrogates, run_ann_eks, InversionConfig};
use fluxeks::signals::{builtin_testing_manifest, builtin_training_manifest};

fn main() {
    let cache = std::path::PathBuf::from("target/tmp/fluxeks-test-cache");
    let mesh = Mesh::default();
    let params = PhysicalParams::default();
    let sensor = CellIndex::new(20, 44);
    let testing = builtin_testing_manifest().render(mesh.dt).unwrap();

    let iters_list: Vec<usize> = std::env::var("DEPTHS")
        .unwrap_or_else(|_| "100,200,400".into())
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();

    for iters in iters_list {
        let tc = TrainConfig {
            max_iterations: iters,
            seed: 7,
            ..TrainConfig::default()
        };
        let t0 = std::time::Instant::now();
        let training = load_or_train_surrogates(
            Some(&cache),
            &builtin_training_manifest(),
            sensor,
            &mesh,
            &params,
            &tc,
        )
        .expect("train");
        eprintln!(
            "depth {iters}: {:.0}s, transfer mse {:.3e} ({:?}), sens mse {:.3e} ({:?})",
            t0.elapsed().as_secs_f64(),
            training.transfer_report.test_mse.unwrap(),
            training.transfer_report.stop,
            training.sensitivity_report.test_mse.unwrap(),
            training.sensitivity_report.stop,
        );

        // Jacobian snapshot at a mid-heating nominal state.
        let warm = fluxeks::signals::render_segment(
            &fluxeks::signals::FluxSegment::step(4.0, 2500.0),
            mesh.dt,
        )
        .unwrap();
        let fields = fluxeks::physics::simulate_fields(&warm, &mesh, &params).unwrap();
        let nominal =
            fluxeks::dataset::extract_local_state(&fields[300], sensor, 2500.0, &mesh).unwrap();
        let state = nalgebra::DVector::from_column_slice(&nominal.to_array());
        use fluxeks::transfer::TransferModel;
        let jac = training.model.jacobian(&state).unwrap();
        eprintln!(
            "  F q-column: [{:.2e} {:.2e} {:.2e} {:.2e} {:.2e}]",
            jac[(0, 5)],
            jac[(1, 5)],
            jac[(2, 5)],
            jac[(3, 5)],
            jac[(4, 5)]
        );
        let block = jac.view((0, 0), (5, 5)).into_owned();
        let eigs = block.complex_eigenvalues();
        let rho = eigs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        eprintln!("  temp-block spectral radius: {rho:.4}");

        for &(q_std, temp_std) in &[(50.0, 0.01), (50.0, 0.1), (200.0, 0.1), (200.0, 0.3)] {
            let mut aes = Vec::new();
            for seed in [11u64, 12, 13] {
                let mut cfg = InversionConfig::new(sensor);
                cfg.noise_level = 5.0;
                cfg.n_f = 18;
                cfg.seed = seed;
                cfg.tuning.q_process_std = q_std;
                cfg.tuning.temp_process_std = temp_std;
                let r = run_ann_eks(&testing, &training.model, &cfg).expect("run");
                aes.push(r.ae);
            }
            aes.sort_by(|a, b| a.partial_cmp(b).unwrap());
            eprintln!(
                "  q_std {q_std:5} temp_std {temp_std:4}: AE median {:.4} (all {:.4?})",
                aes[1], aes
            );
        }
    }
}
