//! Full-scale corpus accounting: sample counts that the rest of the pipeline
//! silently depends on.

mod common;

use fluxeks::dataset::{generate_datasets, DEFAULT_EPS};
use fluxeks::physics::{node_index, run_transient, Mesh, PhysicalParams};
use fluxeks::signals::{builtin_training_signal, DEFAULT_DT, TRAINING_STEPS};

#[test]
fn training_signal_drives_one_sample_per_probe_per_step() {
    let params = PhysicalParams::default();
    let mesh = Mesh::default();
    let signal = builtin_training_signal(DEFAULT_DT).unwrap();
    assert_eq!(signal.len(), TRAINING_STEPS);
    let probe = node_index(0.82, 0.089, &mesh).unwrap();
    let run = run_transient(&signal, &mesh, &params, &[probe]).unwrap();
    assert_eq!(run.probe_series[0].len(), TRAINING_STEPS);
}

#[test]
fn full_corpus_dataset_counts() {
    let params = PhysicalParams::default();
    let mesh = Mesh::default();
    let signal = builtin_training_signal(DEFAULT_DT).unwrap();
    let sensor = node_index(0.82, 0.089, &mesh).unwrap();
    let pair = generate_datasets(&signal, sensor, DEFAULT_EPS, &mesh, &params).unwrap();
    // One transfer sample per step; twelve perturbed samples per step.
    assert_eq!(pair.transfer.len(), 6794);
    assert_eq!(pair.sensitivity.len(), 81_528);
    assert_eq!(pair.sensitivity.len(), 12 * pair.transfer.len());
}
