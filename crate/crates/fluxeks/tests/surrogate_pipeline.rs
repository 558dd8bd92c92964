//! End-to-end checks of the surrogate stack against the forward solver:
//! dataset → trained networks → reduced-model smoothing. Uses the same
//! cached full-corpus models as the acceptance suite.

mod common;

use common::test_cache_dir;
use fluxeks::dataset::{extract_local_state, local_cells, perturbation_step, DEFAULT_EPS};
use fluxeks::mlp::TrainConfig;
use fluxeks::physics::{simulate_fields, CellIndex, Mesh, PhysicalParams, Stepper};
use fluxeks::pipeline::{
    load_or_train_inverse, load_or_train_surrogates, run_ann_eks, run_cfd_eks_on_measurements,
    run_inverse_ann, InversionConfig, SurrogateTraining,
};
use fluxeks::signals::{builtin_training_manifest, render_segment, FluxSegment};
use fluxeks::transfer::TransferModel;
use nalgebra::DVector;
use std::sync::OnceLock;

const SENSOR: CellIndex = CellIndex { i: 20, j: 44 };

fn baseline() -> &'static SurrogateTraining {
    static CELL: OnceLock<SurrogateTraining> = OnceLock::new();
    CELL.get_or_init(|| {
        let mesh = Mesh::default();
        let params = PhysicalParams::default();
        load_or_train_surrogates(
            Some(&test_cache_dir()),
            &builtin_training_manifest(),
            SENSOR,
            &mesh,
            &params,
            &TrainConfig::default(),
        )
        .expect("surrogate training succeeds")
    })
}

#[test]
fn surrogates_fit_their_test_splits() {
    let t = baseline();
    let transfer_mse = t.transfer_report.test_mse.unwrap();
    let sensitivity_mse = t.sensitivity_report.test_mse.unwrap();
    assert!(transfer_mse < 1e-6, "transfer test mse {transfer_mse}");
    assert!(sensitivity_mse < 1e-6, "sensitivity test mse {sensitivity_mse}");
    assert!(t.transfer_report.test_regression_r.unwrap() > 0.999);
    assert!(t.sensitivity_report.test_regression_r.unwrap() > 0.999);
}

#[test]
fn transfer_surrogate_tracks_forward_solver_on_held_out_flux() {
    let t = baseline();
    let mesh = Mesh::default();
    let params = PhysicalParams::default();
    // A waveform the corpus never contained.
    let signal = render_segment(&FluxSegment::triangular(4.0, 2200.0, 0.3), mesh.dt).unwrap();
    let fields = simulate_fields(&signal, &mesh, &params).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..signal.len() {
        let state = extract_local_state(&fields[k], SENSOR, signal.samples[k], &mesh).unwrap();
        let predicted = t.model.transfer_reduced(&state).unwrap();
        let actual = extract_local_state(&fields[k + 1], SENSOR, signal.samples[k], &mesh).unwrap();
        for (p, a) in predicted.temps.iter().zip(&actual.temps) {
            worst = worst.max((p - a).abs());
        }
    }
    eprintln!("worst one-step local temperature error: {worst} K");
    assert!(worst < 0.5, "one-step surrogate error {worst} K");
}

#[test]
fn one_step_prediction_close_to_solver_from_cold_start() {
    let t = baseline();
    let mesh = Mesh::default();
    let params = PhysicalParams::default();
    let q = 2500.0;
    let state = DVector::from_vec(vec![300.0, 300.0, 300.0, 300.0, 300.0, q]);
    let predicted = t.model.transfer(&state).unwrap();
    let stepper = Stepper::new(&mesh, &params).unwrap();
    let mut field = fluxeks::physics::TemperatureField::uniform(&mesh, params.t_in);
    stepper.step_in_place(&mut field, q);
    let actual = extract_local_state(&field, SENSOR, q, &mesh).unwrap();
    for (i, (p, a)) in predicted.as_slice()[..5].iter().zip(&actual.temps).enumerate() {
        eprintln!("component {i}: surrogate {p}, solver {a}");
        assert!((p - a).abs() < 0.5, "component {i}: {p} vs {a}");
    }
}

#[test]
fn reduced_jacobian_agrees_with_solver_restricted_jacobian() {
    let t = baseline();
    let mesh = Mesh::default();
    let params = PhysicalParams::default();
    let stepper = Stepper::new(&mesh, &params).unwrap();
    let cells = local_cells(SENSOR, &mesh).unwrap();

    // Nominal mid-heating states off the training trajectory.
    let warmup = render_segment(&FluxSegment::step(6.0, 2000.0), mesh.dt).unwrap();
    let fields = simulate_fields(&warmup, &mesh, &params).unwrap();

    for &k in &[200usize, 400, 599] {
        let base_field = &fields[k];
        let q = warmup.samples[k];
        let nominal = extract_local_state(base_field, SENSOR, q, &mesh).unwrap();
        let state = DVector::from_column_slice(&nominal.to_array());

        // Solver-restricted Jacobian: perturb each reduced component inside
        // the full field, advance one step, difference the local outputs.
        let mut restricted = [[0.0f64; 6]; 5];
        for c in 0..6 {
            let value = nominal.to_array()[c];
            let h = perturbation_step(value, DEFAULT_EPS);
            let mut outputs = Vec::new();
            for sign in [1.0, -1.0] {
                let (mut field, q_step) = if c < 5 {
                    let mut f = base_field.clone();
                    f.set(cells[c].i, cells[c].j, value + sign * h);
                    (f, q)
                } else {
                    (base_field.clone(), value + sign * h)
                };
                stepper.step_in_place(&mut field, q_step);
                outputs.push(extract_local_state(&field, SENSOR, q_step, &mesh).unwrap());
            }
            for r in 0..5 {
                restricted[r][c] = (outputs[0].temps[r] - outputs[1].temps[r]) / (2.0 * h);
            }
        }

        let learned = t.model.jacobian(&state).unwrap();
        let scale = restricted
            .iter()
            .flatten()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        let mut checked = 0;
        for r in 0..5 {
            for c in 0..6 {
                let truth = restricted[r][c];
                let got = learned[(r, c)];
                // Entries below the surrogate's resolvable scale carry no
                // usable sign/magnitude information; compare dominant ones.
                if truth.abs() >= 0.05 * scale {
                    checked += 1;
                    assert!(
                        got.signum() == truth.signum(),
                        "sign flip at ({r},{c}) step {k}: solver {truth}, surrogate {got}"
                    );
                    let rel = (got - truth).abs() / truth.abs();
                    assert!(
                        rel < 0.2,
                        "entry ({r},{c}) step {k} off by {rel:.3}: solver {truth}, surrogate {got}"
                    );
                }
            }
        }
        assert!(checked >= 8, "too few dominant entries compared: {checked}");
    }
}

#[test]
fn wall_row_flux_sensitivity_is_positive() {
    // The wall cell feels the flux within one step; the learned model must
    // agree on that sign at heated nominal states.
    let t = baseline();
    let mesh = Mesh::default();
    let params = PhysicalParams::default();
    let warm = render_segment(&FluxSegment::step(6.0, 2500.0), mesh.dt).unwrap();
    let fields = simulate_fields(&warm, &mesh, &params).unwrap();
    for &k in &[150usize, 300, 450, 599] {
        let nominal = extract_local_state(&fields[k], SENSOR, warm.samples[k], &mesh).unwrap();
        let state = DVector::from_column_slice(&nominal.to_array());
        let jac = t.model.jacobian(&state).unwrap();
        // Component 4 is the wall cell under the default stencil.
        assert!(
            jac[(4, 5)] > 0.0,
            "wall-row flux sensitivity at step {k}: {}",
            jac[(4, 5)]
        );
    }
}

#[test]
fn zero_noise_constant_flux_converges_for_both_models() {
    // Reduced model.
    let t = baseline();
    let signal = render_segment(&FluxSegment::step(8.0, 2500.0), 0.01).unwrap();
    let mut config = InversionConfig::new(SENSOR);
    config.noise_level = 0.0;
    config.n_f = 10;
    let result = run_ann_eks(&signal, &t.model, &config).unwrap();
    let tail: Vec<f64> = result.estimates.iter().rev().take(50).map(|(_, q)| *q).collect();
    let tail_mean = tail.iter().sum::<f64>() / tail.len() as f64;
    eprintln!("reduced-model tail estimate: {tail_mean}");
    assert!(
        (tail_mean - 2500.0).abs() / 2500.0 < 0.01,
        "reduced-model tail {tail_mean}"
    );
    assert_eq!(result.validation_failures, 0);
    // Lag bookkeeping: one estimate per measurement beyond the warm-up.
    assert_eq!(result.steps, signal.len() - config.n_f);

    // Full-field model on a coarse mesh (41-dimensional state).
    let params = PhysicalParams::default();
    let mesh = Mesh::for_domain(5, 8, 0.01, &params).unwrap();
    let sensor = CellIndex::new(3, 5);
    let small_signal = render_segment(&FluxSegment::step(3.0, 2500.0), mesh.dt).unwrap();
    let run = fluxeks::physics::run_transient(&small_signal, &mesh, &params, &[sensor]).unwrap();
    let mut cfg = InversionConfig::new(sensor);
    cfg.mesh = mesh;
    cfg.params = params;
    cfg.noise_level = 0.0;
    cfg.n_f = 5;
    let result =
        run_cfd_eks_on_measurements(&run.probe_series[0], &small_signal.samples, &cfg).unwrap();
    let tail: Vec<f64> = result.estimates.iter().rev().take(30).map(|(_, q)| *q).collect();
    let tail_mean = tail.iter().sum::<f64>() / tail.len() as f64;
    eprintln!("full-model tail estimate: {tail_mean}");
    assert!(
        (tail_mean - 2500.0).abs() / 2500.0 < 0.01,
        "full-model tail {tail_mean}"
    );
    assert_eq!(result.validation_failures, 0);
}

#[test]
fn inverse_regression_interpolates_its_own_corpus() {
    let mesh = Mesh::default();
    let params = PhysicalParams::default();
    let manifest = builtin_training_manifest();
    let model = load_or_train_inverse(
        Some(&test_cache_dir()),
        &manifest,
        SENSOR,
        18,
        18,
        &mesh,
        &params,
        0.0,
        &TrainConfig::default(),
    )
    .unwrap();
    // Zero-noise scoring on the training signal itself.
    let signal = manifest.render(mesh.dt).unwrap();
    let mut config = InversionConfig::new(SENSOR);
    config.noise_level = 0.0;
    config.n_f = 18;
    let result = run_inverse_ann(&signal, &model, &config).unwrap();
    eprintln!("inverse self-AE: {}", result.ae);
    assert!(result.ae < 0.02, "AE {}", result.ae);
}

#[test]
fn garbage_measurements_flag_divergence_instead_of_panicking() {
    let t = baseline();
    let signal = render_segment(&FluxSegment::step(3.0, 2500.0), 0.01).unwrap();
    let mut config = InversionConfig::new(SENSOR);
    config.noise_level = 5.0;
    config.n_f = 6;
    // Wild, physically impossible measurement stream.
    let garbage: Vec<f64> = (0..signal.len())
        .map(|k| if k % 2 == 0 { 5e4 } else { -4e4 })
        .collect();
    let result = fluxeks::pipeline::run_ann_eks_on_measurements(
        &garbage,
        &signal.samples,
        &t.model,
        &config,
    )
    .unwrap();
    assert!(result.divergent);
}
