//! Training data for the surrogate models.
//!
//! The surrogate works on a 6-component local state: the sensor-cell
//! temperature, four more cells sampling the transport path between the
//! heated wall and the sensor, and the wall flux. Two datasets are generated
//! from one forward run:
//!
//! * **transfer** samples — the unperturbed local state at step k paired with
//!   the five local temperatures at k+1; one per step.
//! * **sensitivity** samples — the same pairing with exactly one state
//!   component nudged up or down before the step, sampling the transition
//!   map where finite-difference Jacobians will later probe it; twelve per
//!   step (six components × two signs).
//!
//! The two sets feed two separately trained networks, so the twelve-fold
//! volume imbalance never biases a single model.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{simulate_fields, CellIndex, Mesh, PhysicalParams, Stepper, TemperatureField};
use crate::seed::rng_for;
use crate::signals::FluxSignal;

/// Number of state components (five temperatures plus the flux).
pub const STATE_DIM: usize = 6;
/// Number of predicted components (the five local temperatures).
pub const OUTPUT_DIM: usize = 5;
/// Sensitivity samples generated per time step.
pub const SENSITIVITY_PER_STEP: usize = 2 * STATE_DIM;

/// Default relative perturbation for sensitivity sampling.
pub const DEFAULT_EPS: f64 = 1e-4;
/// Absolute perturbation floor for near-zero components.
pub const EPS_FLOOR: f64 = 1e-6;

pub const INPUT_NAMES: [&str; STATE_DIM] = ["t_s", "t_c1", "t_c2", "t_c3", "t_c4", "q"];
pub const OUTPUT_NAMES: [&str; OUTPUT_DIM] = ["t_s'", "t_c1'", "t_c2'", "t_c3'", "t_c4'"];

/// Local state around the sensor: the five stencil-cell temperatures (sensor
/// first, then the transport-path cells of [`local_cells`]) and the current
/// wall flux.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    /// Stencil temperatures; `temps[0]` is the sensor cell.
    pub temps: [f64; OUTPUT_DIM],
    pub q: f64,
}

impl ReducedState {
    /// Sensor-cell temperature (the measured component).
    pub fn sensor_temp(&self) -> f64 {
        self.temps[0]
    }

    pub fn to_array(self) -> [f64; STATE_DIM] {
        [
            self.temps[0],
            self.temps[1],
            self.temps[2],
            self.temps[3],
            self.temps[4],
            self.q,
        ]
    }

    pub fn from_array(a: [f64; STATE_DIM]) -> Self {
        ReducedState {
            temps: [a[0], a[1], a[2], a[3], a[4]],
            q: a[5],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// The cells referenced by a reduced state, in component order: the sensor
/// first, then four cells sampling the transport path between the sensor and
/// the heated wall.
///
/// The flux enters the domain at the top face, so the informative direction
/// is upward: the stencil takes the two cells directly above the sensor plus
/// the two directly below the wall (including the wall cell itself, where
/// the flux acts within a single step). A sensor close to the wall has fewer
/// distinct cells above it; the stencil then backfills from below so the
/// state always has five distinct temperatures.
pub fn local_cells(sensor: CellIndex, mesh: &Mesh) -> Result<[CellIndex; OUTPUT_DIM]> {
    if sensor.i >= mesh.nx || sensor.j >= mesh.ny {
        return Err(Error::Domain(format!(
            "sensor ({}, {}) outside the {}x{} mesh",
            sensor.i, sensor.j, mesh.nx, mesh.ny
        )));
    }
    if sensor.i == 0 || sensor.i + 1 >= mesh.nx {
        return Err(Error::Domain(format!(
            "sensor ({}, {}) sits on an inlet/outlet column; the local state is degenerate there",
            sensor.i, sensor.j
        )));
    }
    let wall = mesh.ny - 1;
    let j = sensor.j;
    let mut rows: Vec<usize> = Vec::with_capacity(OUTPUT_DIM);
    rows.push(j);
    for candidate in [j + 1, j + 2, wall.saturating_sub(1), wall] {
        if candidate <= wall && !rows.contains(&candidate) {
            rows.push(candidate);
        }
    }
    let mut below = j;
    while rows.len() < OUTPUT_DIM && below > 0 {
        below -= 1;
        if !rows.contains(&below) {
            rows.push(below);
        }
    }
    if rows.len() < OUTPUT_DIM {
        return Err(Error::Domain(format!(
            "sensor ({}, {}) cannot host a {OUTPUT_DIM}-cell stencil on a mesh with ny = {}",
            sensor.i, sensor.j, mesh.ny
        )));
    }
    Ok([
        CellIndex::new(sensor.i, rows[0]),
        CellIndex::new(sensor.i, rows[1]),
        CellIndex::new(sensor.i, rows[2]),
        CellIndex::new(sensor.i, rows[3]),
        CellIndex::new(sensor.i, rows[4]),
    ])
}

/// Read the local state out of a full field.
pub fn extract_local_state(
    field: &TemperatureField,
    sensor: CellIndex,
    q: f64,
    mesh: &Mesh,
) -> Result<ReducedState> {
    let cells = local_cells(sensor, mesh)?;
    let t = |c: CellIndex| field.get(c.i, c.j);
    Ok(ReducedState {
        temps: [t(cells[0]), t(cells[1]), t(cells[2]), t(cells[3]), t(cells[4])],
        q,
    })
}

/// Provenance tag of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleTag {
    Transfer,
    Sensitivity,
}

/// One input/output pair in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub input: [f64; STATE_DIM],
    pub output: [f64; OUTPUT_DIM],
    pub tag: SampleTag,
}

/// The two datasets produced by one forward run.
#[derive(Debug, Clone)]
pub struct DatasetPair {
    pub transfer: Vec<Sample>,
    pub sensitivity: Vec<Sample>,
}

/// Perturbation step for one component value: relative with an absolute floor.
pub fn perturbation_step(value: f64, eps: f64) -> f64 {
    (eps * value.abs()).max(EPS_FLOOR)
}

/// Run the forward solver over `signal` and harvest both datasets.
///
/// Per step k this records one transfer sample and twelve sensitivity
/// samples. A perturbed temperature component is written back into the full
/// field at its own cell only (the rest of the field keeps its nominal
/// values); a perturbed flux replaces the step's boundary flux.
pub fn generate_datasets(
    signal: &FluxSignal,
    sensor: CellIndex,
    eps: f64,
    mesh: &Mesh,
    params: &PhysicalParams,
) -> Result<DatasetPair> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let cells = local_cells(sensor, mesh)?;
    let stepper = Stepper::new(mesh, params)?;
    let fields = simulate_fields(signal, mesh, params)?;
    let n = signal.len();

    let mut transfer = Vec::with_capacity(n);
    for k in 0..n {
        let input = extract_local_state(&fields[k], sensor, signal.samples[k], mesh)?;
        let next = extract_local_state(&fields[k + 1], sensor, signal.samples[k], mesh)?;
        transfer.push(Sample {
            input: input.to_array(),
            output: next.temps,
            tag: SampleTag::Transfer,
        });
    }

    // Perturbation work is independent per step once the nominal trajectory
    // exists; chunks are collected in index order to keep output deterministic.
    let sensitivity: Vec<Sample> = (0..n)
        .into_par_iter()
        .map(|k| {
            let base = &fields[k];
            let q_k = signal.samples[k];
            let nominal = extract_local_state(base, sensor, q_k, mesh).expect("sensor validated");
            let mut out = Vec::with_capacity(SENSITIVITY_PER_STEP);
            for c in 0..STATE_DIM {
                let value = nominal.to_array()[c];
                let h = perturbation_step(value, eps);
                for sign in [1.0, -1.0] {
                    let perturbed_value = value + sign * h;
                    let mut input = nominal.to_array();
                    input[c] = perturbed_value;
                    let (mut field, q_step) = if c < OUTPUT_DIM {
                        let mut f = base.clone();
                        f.set(cells[c].i, cells[c].j, perturbed_value);
                        (f, q_k)
                    } else {
                        (base.clone(), perturbed_value)
                    };
                    stepper.step_in_place(&mut field, q_step);
                    let next =
                        extract_local_state(&field, sensor, q_step, mesh).expect("sensor validated");
                    out.push(Sample {
                        input,
                        output: next.temps,
                        tag: SampleTag::Sensitivity,
                    });
                }
            }
            out
        })
        .flatten()
        .collect();

    Ok(DatasetPair {
        transfer,
        sensitivity,
    })
}

/// Per-channel z-score transform, fit once and persisted with each model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub in_mean: Vec<f64>,
    pub in_std: Vec<f64>,
    pub out_mean: Vec<f64>,
    pub out_std: Vec<f64>,
}

impl Standardizer {
    /// Fit per-channel means and population standard deviations.
    pub fn fit_arrays(
        inputs: &[Vec<f64>],
        outputs: &[Vec<f64>],
        in_names: &[&str],
        out_names: &[&str],
    ) -> Result<Standardizer> {
        if inputs.len() < 2 {
            return Err(Error::Domain(format!(
                "standardizer needs at least 2 samples, got {}",
                inputs.len()
            )));
        }
        if inputs.len() != outputs.len() {
            return Err(Error::Dimension("inputs and outputs differ in sample count".into()));
        }
        let fit_side = |rows: &[Vec<f64>], names: &[&str]| -> Result<(Vec<f64>, Vec<f64>)> {
            let dim = rows[0].len();
            let n = rows.len() as f64;
            let mut mean = vec![0.0; dim];
            for row in rows {
                if row.len() != dim {
                    return Err(Error::Dimension("ragged sample rows".into()));
                }
                for (m, v) in mean.iter_mut().zip(row) {
                    *m += v;
                }
            }
            for m in &mut mean {
                *m /= n;
            }
            let mut var = vec![0.0; dim];
            for row in rows {
                for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                    let d = v - m;
                    *s += d * d;
                }
            }
            let mut std = vec![0.0; dim];
            for (c, s) in var.iter().enumerate() {
                let sd = (s / n).sqrt();
                if !(sd > 0.0) {
                    let name = names.get(c).copied().unwrap_or("?");
                    return Err(Error::Domain(format!(
                        "channel {name} is constant; it cannot be standardized"
                    )));
                }
                std[c] = sd;
            }
            Ok((mean, std))
        };
        let (in_mean, in_std) = fit_side(inputs, in_names)?;
        let (out_mean, out_std) = fit_side(outputs, out_names)?;
        Ok(Standardizer {
            in_mean,
            in_std,
            out_mean,
            out_std,
        })
    }

    pub fn apply_input(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(&self.in_mean)
            .zip(&self.in_std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn invert_input(&self, std: &[f64]) -> Vec<f64> {
        std.iter()
            .zip(&self.in_mean)
            .zip(&self.in_std)
            .map(|((z, m), s)| z * s + m)
            .collect()
    }

    pub fn apply_output(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(&self.out_mean)
            .zip(&self.out_std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn invert_output(&self, std: &[f64]) -> Vec<f64> {
        std.iter()
            .zip(&self.out_mean)
            .zip(&self.out_std)
            .map(|((z, m), s)| z * s + m)
            .collect()
    }
}

/// Fit a standardizer over a reduced-state sample set.
pub fn fit_standardizer(samples: &[Sample]) -> Result<Standardizer> {
    let inputs: Vec<Vec<f64>> = samples.iter().map(|s| s.input.to_vec()).collect();
    let outputs: Vec<Vec<f64>> = samples.iter().map(|s| s.output.to_vec()).collect();
    Standardizer::fit_arrays(&inputs, &outputs, &INPUT_NAMES, &OUTPUT_NAMES)
}

/// Seeded random partition into train/validation/test.
pub fn split_dataset(
    samples: &[Sample],
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<(Vec<Sample>, Vec<Sample>, Vec<Sample>)> {
    let (f1, f2, f3) = fractions;
    if (f1 + f2 + f3 - 1.0).abs() > 1e-9 || f1 < 0.0 || f2 < 0.0 || f3 < 0.0 {
        return Err(Error::Domain(format!(
            "split fractions must be nonnegative and sum to 1, got ({f1}, {f2}, {f3})"
        )));
    }
    let n = samples.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(seed, "dataset-split"));
    let n1 = (f1 * n as f64).round() as usize;
    let n2 = ((f2 * n as f64).round() as usize).min(n - n1);
    let take = |idx: &[usize]| idx.iter().map(|&i| samples[i]).collect::<Vec<_>>();
    Ok((
        take(&order[..n1]),
        take(&order[n1..n1 + n2]),
        take(&order[n1 + n2..]),
    ))
}

/// Dataset rows as CSV: six inputs, five outputs, and the tag.
pub fn dataset_csv(samples: &[Sample]) -> String {
    let mut out = String::new();
    for name in INPUT_NAMES {
        out.push_str(name);
        out.push(',');
    }
    for name in OUTPUT_NAMES {
        out.push_str(name);
        out.push(',');
    }
    out.push_str("tag\n");
    for s in samples {
        for v in s.input {
            out.push_str(&format!("{v},"));
        }
        for v in s.output {
            out.push_str(&format!("{v},"));
        }
        out.push_str(match s.tag {
            SampleTag::Transfer => "transfer\n",
            SampleTag::Sensitivity => "sensitivity\n",
        });
    }
    out
}
