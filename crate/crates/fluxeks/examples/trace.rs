//! Scratch: dump estimate traces for inspection (dev aid).

use fluxeks::mlp::TrainConfig;
use fluxeks::physics::{CellIndex, Mesh, PhysicalParams};
use fluxeks::pipeline::{load_or_train_surrogates, run_ann_eks, InversionConfig};
use fluxeks::signals::{FluxSegment, SignalManifest};

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

fn main() {
    let cache = std::path::PathBuf::from("target/tmp/fluxeks-test-cache");
    let mesh = Mesh::default();
    let params = PhysicalParams::default();
    let sensor = CellIndex::new(20, 44);
    let tc = TrainConfig {
        max_iterations: 600,
        seed: 7,
        ..TrainConfig::default()
    };
    let training = load_or_train_surrogates(
        Some(&cache),
        &small_training_manifest(),
        sensor,
        &mesh,
        &params,
        &tc,
    )
    .expect("train");

    // Constant-flux run, zero noise.
    let signal = fluxeks::signals::render_segment(&FluxSegment::step(6.0, 2500.0), 0.01).unwrap();
    let mut cfg = InversionConfig::new(sensor);
    cfg.noise_level = 0.0;
    cfg.n_f = 10;
    let r = run_ann_eks(&signal, &training.model, &cfg).unwrap();
    println!("# constant 2500, zero noise");
    for (k, q) in r.estimates.iter().step_by(25) {
        println!("{k},{q:.1}");
    }

    // Testing signal at m=5 with the best grid tuning.
    let testing = SignalManifest {
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
    .render(0.01)
    .unwrap();
    let mut cfg = InversionConfig::new(sensor);
    cfg.noise_level = 5.0;
    cfg.n_f = 18;
    cfg.seed = 11;
    cfg.tuning.q_process_std = 200.0;
    cfg.tuning.temp_process_std = 0.2;
    let r = run_ann_eks(&testing, &training.model, &cfg).unwrap();
    println!("# testing m=5 q_std=200 temp_std=0.2, AE {}", r.ae);
    for (k, q) in r.estimates.iter().step_by(20) {
        println!("{k},{},{q:.1}", testing.samples[*k]);
    }
}
