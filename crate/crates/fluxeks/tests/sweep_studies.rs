//! Scaled-down runs of the parameter studies: orderings and bookkeeping on a
//! short corpus, so the suite stays within minutes. Full-scale behavior is
//! exercised by the acceptance suite.

mod common;

use common::{small_testing_manifest, small_training_manifest, test_cache_dir};
use fluxeks::mlp::TrainConfig;
use fluxeks::physics::{CellIndex, Mesh, PhysicalParams};
use fluxeks::pipeline::load_or_train_surrogates;
use fluxeks::signals::SegmentKind;
use fluxeks::sweep::{
    ablation_csv, ablation_study, future_step_sweep, nf_sweep_csv, sensor_grid,
    sensor_heatmap_csv, sensor_location_sweep, StudyConfig,
};

const SENSOR: CellIndex = CellIndex { i: 20, j: 44 };

fn study() -> StudyConfig {
    let mut study = StudyConfig::new(small_training_manifest(), small_testing_manifest(), SENSOR);
    study.seeds = vec![11, 12];
    study.train_config = TrainConfig {
        max_iterations: 300,
        seed: 7,
        ..TrainConfig::default()
    };
    study.cache_dir = Some(test_cache_dir());
    study
}

#[test]
fn nf_sweep_reports_monotone_cost_and_lag_benefit() {
    let study = study();
    let training = load_or_train_surrogates(
        study.cache_dir.as_deref(),
        &study.training_manifest,
        SENSOR,
        &study.mesh,
        &study.params,
        &study.train_config,
    )
    .unwrap();
    let values = [0usize, 6, 12, 18];
    let sweep = future_step_sweep(&study, &values, &[(SENSOR, training.model)]).unwrap();
    assert_eq!(sweep.points.len(), values.len());
    let ae_at = |nf: usize| sweep.points.iter().find(|p| p.n_f == nf).unwrap().ae;
    assert!(
        ae_at(0) > ae_at(18),
        "smoothing should beat filtering: {} vs {}",
        ae_at(0),
        ae_at(18)
    );
    let (_, slope, r2) = sweep.time_fit;
    assert!(slope > 0.0, "per-step cost must grow with lag, slope {slope}");
    assert!(r2 > 0.8, "cost growth should be near-linear, r2 {r2}");
    let csv = nf_sweep_csv(&sweep);
    assert!(csv.starts_with("sensor_i,sensor_j,n_f,ae,mean_step_ms,divergent"));
    assert_eq!(csv.lines().count(), 1 + values.len());
}

#[test]
fn sweep_cells_are_cached_and_resumed() {
    let mut study = study();
    study.seeds = vec![11];
    let dir = tempfile::tempdir().unwrap();
    // Use a private cache so this test controls the hit pattern, but reuse
    // the shared model cache to avoid retraining.
    let shared_models = test_cache_dir();
    for entry in std::fs::read_dir(&shared_models).unwrap().flatten() {
        let name = entry.file_name();
        if name.to_string_lossy().starts_with("surrogates-") {
            let dst = dir.path().join(name);
            std::fs::create_dir_all(&dst).unwrap();
            for f in std::fs::read_dir(entry.path()).unwrap().flatten() {
                std::fs::copy(f.path(), dst.join(f.file_name())).unwrap();
            }
        }
    }
    study.cache_dir = Some(dir.path().to_path_buf());

    let training = load_or_train_surrogates(
        study.cache_dir.as_deref(),
        &study.training_manifest,
        SENSOR,
        &study.mesh,
        &study.params,
        &study.train_config,
    )
    .unwrap();
    let t0 = std::time::Instant::now();
    let first = future_step_sweep(&study, &[0, 8], &[(SENSOR, training.model.clone())]).unwrap();
    let cold = t0.elapsed();
    let cells_before = std::fs::read_dir(dir.path())
        .unwrap()
        .flatten()
        .filter(|e| e.file_name().to_string_lossy().starts_with("cell-"))
        .count();
    assert_eq!(cells_before, 2, "each (sensor, nf) cell persists");

    let t1 = std::time::Instant::now();
    let second = future_step_sweep(&study, &[0, 8], &[(SENSOR, training.model)]).unwrap();
    let warm = t1.elapsed();
    assert_eq!(first.points.len(), second.points.len());
    for (a, b) in first.points.iter().zip(&second.points) {
        assert_eq!(a.ae, b.ae, "cached cell must reproduce exactly");
    }
    assert!(
        warm < cold / 5,
        "second run should come from cache: cold {cold:?}, warm {warm:?}"
    );
}

#[test]
fn ablation_full_corpus_wins_and_csv_marks_divergence() {
    let study = study();
    let rows = ablation_study(
        &study,
        &[
            vec![],
            vec![SegmentKind::Step],
        ],
    )
    .unwrap();
    assert_eq!(rows.len(), 2);
    // Scoring covers the three testing families plus overall.
    assert_eq!(rows[0].family_ae.len(), 3);
    let step_full = rows[0].family(SegmentKind::Step).unwrap();
    let step_ablated = rows[1].family(SegmentKind::Step).unwrap();
    assert!(
        step_ablated > step_full,
        "removing steps must hurt the step family: {step_full} vs {step_ablated}"
    );
    let csv = ablation_csv(&rows);
    assert!(csv.lines().next().unwrap().contains("overall"));
    assert!(csv.contains("none"));
    assert!(csv.contains("step"));
}

#[test]
fn sensor_sweep_orderings_and_divergent_corner() {
    let study = study();
    // Near-wall vs mid-height at the same x; a bottom near-inlet corner.
    let near_wall = CellIndex::new(20, 46);
    let mid = CellIndex::new(20, 25);
    let corner = CellIndex::new(2, 3);
    let cells = sensor_location_sweep(&study, &[near_wall, mid, corner]).unwrap();
    let get = |c: CellIndex| cells.iter().find(|s| s.sensor == c).unwrap();
    let near = get(near_wall);
    let middle = get(mid);
    let deep = get(corner);
    eprintln!(
        "sensor sweep: near-wall {:.4} ({}), mid {:.4} ({}), corner {:.4} ({})",
        near.ae, near.divergent, middle.ae, middle.divergent, deep.ae, deep.divergent
    );
    assert!(!near.divergent, "near-wall sensor must work");
    assert!(
        near.ae < middle.ae || middle.divergent,
        "closer to the heated wall should score better: {} vs {}",
        near.ae,
        middle.ae
    );
    assert!(
        deep.divergent || deep.ae > middle.ae.max(near.ae),
        "a bottom near-inlet sensor receives almost no flux information"
    );

    let grid_csv = sensor_heatmap_csv(&study.mesh, &cells);
    assert!(grid_csv.starts_with("j\\i"));
    assert_eq!(grid_csv.lines().count(), 1 + study.mesh.ny);

    // The full stride grid enumerates interior cells only.
    let grid = sensor_grid(&study.mesh, 3);
    assert!(grid.iter().all(|c| c.i >= 1 && c.i + 1 < study.mesh.nx));
}
