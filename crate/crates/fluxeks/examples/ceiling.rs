//! Scratch: best-case reduced filter — transition linearized on the true
//! trajectory with solver-exact restricted Jacobians (dev aid).
//!
//! If even this cannot score well, the 6-component architecture is the
//! limit; if it can, the gap is the learned closure.

use fluxeks::dataset::{local_cells, perturbation_step};
use fluxeks::error::Result;
use fluxeks::kalman::{FixedLagSmoother, GaussianState, NoiseModel, SmootherOptions};
use fluxeks::physics::{simulate_fields, CellIndex, Mesh, PhysicalParams, Stepper};
use fluxeks::pipeline::{add_noise, average_error};
use fluxeks::signals::builtin_testing_manifest;
use fluxeks::transfer::TransferModel;
use nalgebra::{DMatrix, DVector, RowDVector};
use std::cell::RefCell;

struct OracleReduced {
    /// Per-step true local state (inputs at k) and next-step locals.
    truth: Vec<[f64; 6]>,
    next: Vec<[f64; 5]>,
    jac: Vec<DMatrix<f64>>,
    k: RefCell<usize>,
}

impl TransferModel for OracleReduced {
    fn dim(&self) -> usize {
        6
    }
    fn transfer(&self, state: &DVector<f64>) -> Result<DVector<f64>> {
        let k = *self.k.borrow();
        let t = &self.truth[k];
        let j = &self.jac[k];
        let dx = DVector::from_iterator(6, (0..6).map(|i| state[i] - t[i]));
        let lin = j * &dx;
        let mut out = DVector::zeros(6);
        for r in 0..5 {
            out[r] = self.next[k][r] + lin[r];
        }
        out[5] = state[5];
        Ok(out)
    }
    fn jacobian(&self, _state: &DVector<f64>) -> Result<DMatrix<f64>> {
        let k = *self.k.borrow();
        let mut jq = DMatrix::zeros(6, 6);
        jq.view_mut((0, 0), (5, 6)).copy_from(&self.jac[k]);
        jq[(5, 5)] = 1.0;
        *self.k.borrow_mut() += 1;
        Ok(jq)
    }
    fn measurement_row(&self) -> RowDVector<f64> {
        let mut h = RowDVector::zeros(6);
        h[0] = 1.0;
        h
    }
}

fn main() {
    let mesh = Mesh::default();
    let params = PhysicalParams::default();
    let sensor = CellIndex::new(20, 44);
    let cells = match std::env::var("STENCIL").as_deref() {
        // +y members reach toward the heated wall.
        Ok("wall") => [
            sensor,
            CellIndex::new(sensor.i + 1, sensor.j),
            CellIndex::new(sensor.i - 1, sensor.j),
            CellIndex::new(sensor.i, sensor.j + 1),
            CellIndex::new(sensor.i, mesh.ny - 1),
        ],
        // x-neighbors plus a two-cell ladder toward the wall.
        Ok("ladder-x") => [
            sensor,
            CellIndex::new(sensor.i + 1, sensor.j),
            CellIndex::new(sensor.i - 1, sensor.j),
            CellIndex::new(sensor.i, sensor.j + 2),
            CellIndex::new(sensor.i, sensor.j + 4),
        ],
        // Full vertical ladder from sensor to one below the wall.
        Ok("ladder") => [
            sensor,
            CellIndex::new(sensor.i, sensor.j + 1),
            CellIndex::new(sensor.i, sensor.j + 2),
            CellIndex::new(sensor.i, sensor.j + 3),
            CellIndex::new(sensor.i, sensor.j + 4),
        ],
        // Ladder skipping one cell, reaching the wall cell itself.
        Ok("ladder-wall") => [
            sensor,
            CellIndex::new(sensor.i, sensor.j + 1),
            CellIndex::new(sensor.i, sensor.j + 2),
            CellIndex::new(sensor.i, sensor.j + 4),
            CellIndex::new(sensor.i, mesh.ny - 1),
        ],
        _ => local_cells(sensor, &mesh).unwrap(),
    };
    eprintln!("stencil: {cells:?}");
    let stepper = Stepper::new(&mesh, &params).unwrap();
    let testing = builtin_testing_manifest().render(mesh.dt).unwrap();
    let fields = simulate_fields(&testing, &mesh, &params).unwrap();
    let n = testing.len();

    let grab = |f: &fluxeks::physics::TemperatureField, q: f64| -> [f64; 6] {
        [
            f.get(cells[0].i, cells[0].j),
            f.get(cells[1].i, cells[1].j),
            f.get(cells[2].i, cells[2].j),
            f.get(cells[3].i, cells[3].j),
            f.get(cells[4].i, cells[4].j),
            q,
        ]
    };

    // True local trajectory + restricted one-step Jacobians along it.
    let mut truth = Vec::with_capacity(n);
    let mut next = Vec::with_capacity(n);
    let mut jacs = Vec::with_capacity(n);
    for k in 0..n {
        let x = grab(&fields[k], testing.samples[k]);
        let xn = grab(&fields[k + 1], testing.samples[k]);
        truth.push(x);
        next.push([xn[0], xn[1], xn[2], xn[3], xn[4]]);
        let mut jac = DMatrix::zeros(5, 6);
        for c in 0..6 {
            let v = x[c];
            let h = perturbation_step(v, 1e-4);
            let mut outs = Vec::new();
            for sign in [1.0, -1.0] {
                let (mut f, q) = if c < 5 {
                    let mut f = fields[k].clone();
                    f.set(cells[c].i, cells[c].j, v + sign * h);
                    (f, testing.samples[k])
                } else {
                    (fields[k].clone(), v + sign * h)
                };
                stepper.step_in_place(&mut f, q);
                outs.push(grab(&f, q));
            }
            for r in 0..5 {
                jac[(r, c)] = (outs[0][r] - outs[1][r]) / (2.0 * h);
            }
        }
        jacs.push(jac);
    }

    let sensor_truth: Vec<f64> = (0..n).map(|k| fields[k + 1].get(sensor.i, sensor.j)).collect();

    for &(q_std, temp_std, nf, m) in &[
        (50.0, 0.01, 18usize, 5.0),
        (50.0, 0.1, 18, 5.0),
        (200.0, 0.1, 18, 5.0),
        (500.0, 0.1, 18, 5.0),
        (200.0, 0.1, 30, 5.0),
        (500.0, 0.1, 40, 5.0),
        (200.0, 0.1, 18, 0.0),
    ] {
        let model = OracleReduced {
            truth: truth.clone(),
            next: next.clone(),
            jac: jacs.clone(),
            k: RefCell::new(0),
        };
        let tp = temp_std * temp_std;
        let noise = NoiseModel::diagonal(&[tp, tp, tp, tp, tp, q_std * q_std], (m * m + 0.04) as f64).unwrap();
        let t0 = params.t_in;
        let initial = GaussianState::diagonal(
            DVector::from_vec(vec![t0, t0, t0, t0, t0, 0.0]),
            &[1.0, 1.0, 1.0, 1.0, 1.0, 1e6],
        )
        .unwrap();
        let ys = add_noise(&sensor_truth, m, 11).unwrap();
        let mut smoother =
            FixedLagSmoother::new(model, noise, initial, SmootherOptions::with_lag(nf)).unwrap();
        let mut est = Vec::new();
        for &y in &ys {
            if let Some(e) = smoother.step(y).unwrap() {
                est.push((e.step, e.q));
            }
        }
        let t: Vec<f64> = est.iter().filter(|(k, _)| *k >= nf).map(|(k, _)| testing.samples[*k]).collect();
        let e: Vec<f64> = est.iter().filter(|(k, _)| *k >= nf).map(|(_, q)| *q).collect();
        let ae = average_error(&t, &e).unwrap();
        eprintln!("oracle-F reduced: q_std {q_std:5} temp_std {temp_std:5} nf {nf:2} m {m}: AE {ae:.4}");
        if std::env::var("TRACE").is_ok() {
            for (k, q) in est.iter().step_by(200) {
                eprintln!("   k={k} true={:.0} est={q:.0}", testing.samples[*k]);
            }
        }
    }
}
