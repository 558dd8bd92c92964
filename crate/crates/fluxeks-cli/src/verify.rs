//! Built-in self checks: quick, self-contained oracles that exercise the
//! solver, the estimator, and the network Jacobians without any trained
//! models or external files.

use fluxeks::error::Result;
use fluxeks::kalman::{
    rts_backward, run_filter, FixedLagSmoother, GaussianState, NoiseModel, RtsAnchor,
    SmootherOptions,
};
use fluxeks::mlp::{MlpModel, ModelProvenance};
use fluxeks::physics::{
    advance_step, bulk_outlet_rise, run_transient, Mesh, PhysicalParams, TemperatureField,
};
use fluxeks::signals::{render_segment, FluxSegment};
use fluxeks::transfer::TransferModel;
use nalgebra::{DMatrix, DVector, RowDVector};

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub fn run_all() -> Vec<Check> {
    vec![
        forward_dense_equivalence(),
        energy_balance(),
        linear_kf_equivalence(),
        zero_lag_identity(),
        jacobian_finite_difference(),
    ]
}

/// Column-marched solver vs a direct dense solve of the same implicit system
/// on a small mesh.
fn forward_dense_equivalence() -> Check {
    let params = PhysicalParams::default();
    let mesh = Mesh::for_domain(4, 6, 0.01, &params).expect("mesh");
    let n = mesh.cell_count();
    let r = params.diffusivity() * mesh.dt / (mesh.dy * mesh.dy);
    let mut a = DMatrix::zeros(n, n);
    let mut load = DVector::zeros(n);
    let q = 2500.0;
    for i in 0..mesh.nx {
        for j in 0..mesh.ny {
            let idx = i * mesh.ny + j;
            let y = (j as f64 + 0.5) * mesh.dy;
            let u = 6.0 * params.u_m * (y / params.height) * (1.0 - y / params.height);
            let c = u * mesh.dt / mesh.dx;
            let nb = if j == 0 || j == mesh.ny - 1 { 1.0 } else { 2.0 };
            a[(idx, idx)] = 1.0 + c + nb * r;
            if j > 0 {
                a[(idx, idx - 1)] = -r;
            }
            if j + 1 < mesh.ny {
                a[(idx, idx + 1)] = -r;
            }
            if i > 0 {
                a[(idx, idx - mesh.ny)] = -c;
            } else {
                load[idx] += c * params.t_in;
            }
            if j == mesh.ny - 1 {
                load[idx] += q * mesh.dt / (params.rho * params.c_p * mesh.dy);
            }
        }
    }
    let lu = a.lu();
    let mut dense = DVector::from_element(n, params.t_in);
    let mut marched = TemperatureField::uniform(&mesh, params.t_in);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        dense = lu.solve(&(&dense + &load)).expect("dense solve");
        marched = advance_step(&marched, q, &mesh, &params).expect("march");
        for (d, m) in dense.iter().zip(marched.as_slice()) {
            worst = worst.max((d - m).abs() / d.abs().max(1.0));
        }
    }
    Check {
        name: "forward solver matches dense implicit solve",
        passed: worst < 1e-10,
        detail: format!("max relative difference {worst:.3e} over 10 steps"),
    }
}

/// Steady heating balance: bulk outlet rise vs q·L/(ρ c_p u_m h).
fn energy_balance() -> Check {
    let params = PhysicalParams::default();
    let mesh = Mesh::default();
    let q = 2500.0;
    let signal = match render_segment(&FluxSegment::step(900.0, q), mesh.dt) {
        Ok(s) => s,
        Err(e) => {
            return Check {
                name: "steady-state energy balance",
                passed: false,
                detail: e.to_string(),
            }
        }
    };
    let run = run_transient(&signal, &mesh, &params, &[]).expect("transient");
    let rise = bulk_outlet_rise(&run.final_field, &mesh, &params);
    let expected = params.steady_bulk_rise(q);
    let rel = (rise - expected).abs() / expected;
    Check {
        name: "steady-state energy balance",
        passed: rel < 0.02,
        detail: format!("bulk rise {rise:.1} K vs analytic {expected:.1} K ({:.2}%)", rel * 100.0),
    }
}

struct Linear2 {
    a: DMatrix<f64>,
    h: RowDVector<f64>,
}

impl TransferModel for Linear2 {
    fn dim(&self) -> usize {
        2
    }
    fn transfer(&self, state: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(&self.a * state)
    }
    fn jacobian(&self, _state: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(self.a.clone())
    }
    fn measurement_row(&self) -> RowDVector<f64> {
        self.h.clone()
    }
}

fn linear2() -> Linear2 {
    Linear2 {
        a: DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 0.98]),
        h: RowDVector::from_vec(vec![1.0, 0.0]),
    }
}

/// Filter + smoother vs a hand-rolled scalar-measurement Kalman recursion.
fn linear_kf_equivalence() -> Check {
    let model = linear2();
    let q = [1e-4, 4e-3];
    let r = 0.25;
    let noise = NoiseModel::diagonal(&q, r).expect("noise");
    let initial =
        GaussianState::diagonal(DVector::from_vec(vec![0.0, 0.0]), &[1.0, 1.0]).expect("init");
    let ys: Vec<f64> = (0..60).map(|k| 0.02 * k as f64 + (0.3 * k as f64).sin()).collect();
    let records = run_filter(&model, &noise, &initial, &ys).expect("filter");

    // Independent 2x2 recursion.
    let a = [[1.0, 0.1], [0.0, 0.98]];
    let mut x = [0.0f64, 0.0];
    let mut p = [[1.0, 0.0], [0.0, 1.0]];
    let mut worst: f64 = 0.0;
    let mut hand: Vec<([f64; 2], [[f64; 2]; 2], [f64; 2], [[f64; 2]; 2])> = Vec::new();
    for (k, &y) in ys.iter().enumerate() {
        let xp = [a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]];
        let mut pp = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut apat = 0.0;
                for m in 0..2 {
                    for nn in 0..2 {
                        apat += a[i][m] * p[m][nn] * a[j][nn];
                    }
                }
                pp[i][j] = apat + if i == j { q[i] } else { 0.0 };
            }
        }
        let s = pp[0][0] + r;
        let kg = [pp[0][0] / s, pp[1][0] / s];
        let innov = y - xp[0];
        let xc = [xp[0] + kg[0] * innov, xp[1] + kg[1] * innov];
        let mut pc = pp;
        for i in 0..2 {
            for j in 0..2 {
                pc[i][j] -= kg[i] * pp[0][j];
            }
        }
        // Match the library's symmetrization.
        let sym = [
            [pc[0][0], 0.5 * (pc[0][1] + pc[1][0])],
            [0.5 * (pc[0][1] + pc[1][0]), pc[1][1]],
        ];
        hand.push((xp, pp, xc, sym));
        let rec = &records[k];
        for i in 0..2 {
            worst = worst.max((rec.predicted.mean[i] - xp[i]).abs());
            worst = worst.max((rec.corrected.mean[i] - xc[i]).abs());
            for j in 0..2 {
                worst = worst.max((rec.predicted.cov[(i, j)] - pp[i][j]).abs());
                worst = worst.max((rec.corrected.cov[(i, j)] - sym[i][j]).abs());
            }
        }
        x = xc;
        p = sym;
    }

    // Backward pass comparison.
    let smoothed = rts_backward(&records, RtsAnchor::Predicted).expect("rts");
    let n = ys.len();
    let mut sx = hand[n - 1].2;
    let mut sp = hand[n - 1].3;
    for k in (0..n - 1).rev() {
        let (_, pp_next, _, _) = hand[k + 1];
        let det = pp_next[0][0] * pp_next[1][1] - pp_next[0][1] * pp_next[1][0];
        let inv = [
            [pp_next[1][1] / det, -pp_next[0][1] / det],
            [-pp_next[1][0] / det, pp_next[0][0] / det],
        ];
        let pc = hand[k].3;
        let mut pat = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for m in 0..2 {
                    pat[i][j] += pc[i][m] * a[j][m];
                }
            }
        }
        let mut g = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for m in 0..2 {
                    g[i][j] += pat[i][m] * inv[m][j];
                }
            }
        }
        let dx = [sx[0] - hand[k + 1].0[0], sx[1] - hand[k + 1].0[1]];
        let xs = [
            hand[k].2[0] + g[0][0] * dx[0] + g[0][1] * dx[1],
            hand[k].2[1] + g[1][0] * dx[0] + g[1][1] * dx[1],
        ];
        let mut dp = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                dp[i][j] = sp[i][j] - hand[k + 1].1[i][j];
            }
        }
        let mut gdp = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for m in 0..2 {
                    for nn in 0..2 {
                        gdp[i][j] += g[i][m] * dp[m][nn] * g[j][nn];
                    }
                }
            }
        }
        let mut ps = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                ps[i][j] = hand[k].3[i][j] + gdp[i][j];
            }
        }
        let ps = [
            [ps[0][0], 0.5 * (ps[0][1] + ps[1][0])],
            [0.5 * (ps[0][1] + ps[1][0]), ps[1][1]],
        ];
        for i in 0..2 {
            worst = worst.max((smoothed.states[k].mean[i] - xs[i]).abs());
            for j in 0..2 {
                worst = worst.max((smoothed.states[k].cov[(i, j)] - ps[i][j]).abs());
            }
        }
        sx = xs;
        sp = ps;
    }

    Check {
        name: "linear Kalman filter/smoother equivalence",
        passed: worst < 1e-10,
        detail: format!("max absolute difference {worst:.3e} over {n} steps"),
    }
}

/// With zero lag the smoother must reproduce the filter bit-for-bit.
fn zero_lag_identity() -> Check {
    let noise = NoiseModel::diagonal(&[1e-4, 4e-3], 0.25).expect("noise");
    let initial =
        GaussianState::diagonal(DVector::from_vec(vec![0.0, 0.0]), &[1.0, 1.0]).expect("init");
    let ys: Vec<f64> = (0..40).map(|k| (0.2 * k as f64).cos()).collect();
    let records = run_filter(&linear2(), &noise, &initial, &ys).expect("filter");
    let mut smoother = FixedLagSmoother::new(
        linear2(),
        noise,
        initial,
        SmootherOptions::with_lag(0),
    )
    .expect("smoother");
    let mut exact = true;
    for (k, &y) in ys.iter().enumerate() {
        let est = smoother.step(y).expect("step").expect("emitted");
        exact &= est.mean == records[k].corrected.mean;
    }
    Check {
        name: "zero-lag smoother equals filter exactly",
        passed: exact,
        detail: if exact { "bit-identical".into() } else { "mismatch".into() },
    }
}

/// Backprop Jacobian vs central finite differences on random networks.
fn jacobian_finite_difference() -> Check {
    let std = fluxeks::dataset::Standardizer {
        in_mean: vec![0.0; 4],
        in_std: vec![1.0; 4],
        out_mean: vec![0.0; 3],
        out_std: vec![1.0; 3],
    };
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let model = MlpModel::new(&[4, 8, 3], std.clone(), ModelProvenance::adhoc("verify"), seed)
            .expect("model");
        let input = [0.3, -0.8, 1.1, 0.2];
        let analytic = model.jacobian_wrt_weights(&input).expect("jacobian");
        let base = model.params();
        let h = 1e-6;
        let scale = analytic.amax().max(1e-3);
        for c in 0..model.param_count() {
            let mut plus = base.clone();
            plus[c] += h;
            let mut minus = base.clone();
            minus[c] -= h;
            let mut mp = model.clone();
            mp.set_params(&plus).expect("params");
            let mut mm = model.clone();
            mm.set_params(&minus).expect("params");
            let yp = mp.forward(&input).expect("forward");
            let ym = mm.forward(&input).expect("forward");
            for o in 0..3 {
                let fd = (yp[o] - ym[o]) / (2.0 * h);
                worst = worst.max((analytic[(o, c)] - fd).abs() / scale);
            }
        }
    }
    Check {
        name: "network Jacobian matches finite differences",
        passed: worst < 1e-5,
        detail: format!("max relative error {worst:.3e} over 10 random networks"),
    }
}
