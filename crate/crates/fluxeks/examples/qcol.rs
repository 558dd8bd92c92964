//! Scratch: where does the flux information live? (dev aid)

use fluxeks::dataset::{extract_local_state, generate_datasets};
use fluxeks::mlp::TrainConfig;
use fluxeks::physics::{simulate_fields, CellIndex, Mesh, PhysicalParams};
use fluxeks::pipeline::{load_or_train_surrogates, run_ann_eks, InversionConfig};
use fluxeks::signals::{builtin_testing_manifest, builtin_training_manifest};
use fluxeks::transfer::{AnnTransferModel, TransferModel};
use nalgebra::{DMatrix, DVector};

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

    // Nominal state mid-heating.
    let warm =
        fluxeks::signals::render_segment(&fluxeks::signals::FluxSegment::step(4.0, 2500.0), mesh.dt)
            .unwrap();
    let fields = simulate_fields(&warm, &mesh, &params).unwrap();
    let nominal = extract_local_state(&fields[300], sensor, 2500.0, &mesh).unwrap();
    let state = DVector::from_column_slice(&nominal.to_array());

    let jac_sens = training.model.jacobian(&state).unwrap();
    eprintln!(
        "sensitivity-net q-col: {:?}",
        (0..5).map(|r| jac_sens[(r, 5)]).collect::<Vec<_>>()
    );

    // Transfer net's own q column.
    let mut fake_sens = training.transfer_mlp.clone();
    fake_sens.provenance.role = "sensitivity".into();
    let via_transfer = AnnTransferModel::new(training.transfer_mlp.clone(), fake_sens).unwrap();
    let jac_tr = via_transfer.jacobian(&state).unwrap();
    eprintln!(
        "transfer-net    q-col: {:?}",
        (0..5).map(|r| jac_tr[(r, 5)]).collect::<Vec<_>>()
    );

    // Corpus-level linear regression T'_out ~ [locals, q, 1].
    let signal = builtin_training_manifest().render(mesh.dt).unwrap();
    let pair = generate_datasets(&signal, sensor, 1e-4, &mesh, &params).unwrap();
    let n = pair.transfer.len();
    let mut a = DMatrix::zeros(n, 7);
    for (r, s) in pair.transfer.iter().enumerate() {
        for c in 0..6 {
            a[(r, c)] = s.input[c];
        }
        a[(r, 6)] = 1.0;
    }
    let mut betas = Vec::new();
    for out in 0..5 {
        let y = DVector::from_iterator(n, pair.transfer.iter().map(|s| s.output[out]));
        let sol = (&a.transpose() * &a)
            .lu()
            .solve(&(&a.transpose() * &y))
            .unwrap();
        betas.push(sol[5]);
    }
    eprintln!("corpus OLS      q-col: {betas:?}");

    // Filter with the Jacobian routed through the transfer net.
    let testing = builtin_testing_manifest().render(mesh.dt).unwrap();
    for &(q_std, temp_std) in &[(50.0, 0.01), (50.0, 0.1), (200.0, 0.1), (500.0, 0.1)] {
        let mut aes = Vec::new();
        for seed in [11u64, 12, 13] {
            let mut cfg = InversionConfig::new(sensor);
            cfg.noise_level = 5.0;
            cfg.n_f = 18;
            cfg.seed = seed;
            cfg.tuning.q_process_std = q_std;
            cfg.tuning.temp_process_std = temp_std;
            let r = run_ann_eks(&testing, &via_transfer, &cfg).expect("run");
            aes.push(r.ae);
        }
        aes.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eprintln!("via-transfer q_std {q_std:5} temp_std {temp_std:4}: AE median {:.4} (all {:.4?})", aes[1], aes);
    }
}
