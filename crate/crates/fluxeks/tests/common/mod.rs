//! Shared oracles and fixtures for the integration tests.
//!
//! Everything here is deliberately independent of the library's own solution
//! paths: the dense forward oracle assembles and inverts the full implicit
//! system instead of marching columns, and the Kalman oracle is a textbook
//! filter/smoother on plain 2×2 arrays.

#![allow(dead_code)]

use fluxeks::mlp::TrainConfig;
use fluxeks::physics::{Mesh, PhysicalParams, TemperatureField};
use fluxeks::signals::{FluxSegment, SignalManifest};
use nalgebra::{DMatrix, DVector};
use std::path::PathBuf;

/// Cache directory shared by all test binaries of this crate, so expensive
/// surrogate trainings happen once per configuration.
pub fn test_cache_dir() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("fluxeks-test-cache");
    std::fs::create_dir_all(&dir).expect("create test cache dir");
    dir
}

// ---------------------------------------------------------------------------
// Dense forward oracle
// ---------------------------------------------------------------------------

/// Full implicit system for one time step: builds the (nx·ny)² matrix with
/// upwind advection (new time level), central cross-stream diffusion, the
/// inlet ghost value, and the top/bottom face fluxes, then LU-solves it.
pub struct DenseImplicitOracle {
    mesh: Mesh,
    params: PhysicalParams,
    matrix: DMatrix<f64>,
    /// Right-hand-side loading independent of the field: inlet ghost terms
    /// and, scaled by q, the top-face flux terms.
    inlet_load: DVector<f64>,
    flux_load: DVector<f64>,
}

impl DenseImplicitOracle {
    pub fn new(mesh: &Mesh, params: &PhysicalParams) -> DenseImplicitOracle {
        let n = mesh.nx * mesh.ny;
        let r = params.diffusivity() * mesh.dt / (mesh.dy * mesh.dy);
        let mut a = DMatrix::zeros(n, n);
        let mut inlet = DVector::zeros(n);
        let mut flux = DVector::zeros(n);
        for i in 0..mesh.nx {
            for j in 0..mesh.ny {
                let idx = i * mesh.ny + j;
                let y = (j as f64 + 0.5) * mesh.dy;
                let u = 6.0 * params.u_m * (y / params.height) * (1.0 - y / params.height);
                let c = u * mesh.dt / mesh.dx;
                let neighbors = if j == 0 || j == mesh.ny - 1 { 1.0 } else { 2.0 };
                a[(idx, idx)] = 1.0 + c + neighbors * r;
                if j > 0 {
                    a[(idx, idx - 1)] = -r;
                }
                if j + 1 < mesh.ny {
                    a[(idx, idx + 1)] = -r;
                }
                if i > 0 {
                    a[(idx, idx - mesh.ny)] = -c;
                } else {
                    inlet[idx] = c * params.t_in;
                }
                if j == mesh.ny - 1 {
                    flux[idx] = mesh.dt / (params.rho * params.c_p * mesh.dy);
                }
            }
        }
        DenseImplicitOracle {
            mesh: *mesh,
            params: *params,
            matrix: a,
            inlet_load: inlet,
            flux_load: flux,
        }
    }

    /// One implicit step by direct dense solve.
    pub fn step(&self, field: &TemperatureField, q: f64) -> TemperatureField {
        let t_old = DVector::from_column_slice(field.as_slice());
        let rhs = t_old + &self.inlet_load + &self.flux_load * q;
        let solved = self
            .matrix
            .clone()
            .lu()
            .solve(&rhs)
            .expect("dense implicit system is nonsingular");
        TemperatureField::from_values(&self.mesh, solved.as_slice().to_vec()).unwrap()
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }
}

// ---------------------------------------------------------------------------
// Textbook 2-state Kalman filter / RTS smoother on plain arrays
// ---------------------------------------------------------------------------

pub type M2 = [[f64; 2]; 2];
pub type V2 = [f64; 2];

pub fn mat_mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[0.0; 2]; 2];
    for r in 0..2 {
        for cc in 0..2 {
            for k in 0..2 {
                c[r][cc] += a[r][k] * b[k][cc];
            }
        }
    }
    c
}

pub fn mat_vec(a: &M2, v: &V2) -> V2 {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

pub fn mat_add(a: &M2, b: &M2) -> M2 {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

pub fn mat_sub(a: &M2, b: &M2) -> M2 {
    [
        [a[0][0] - b[0][0], a[0][1] - b[0][1]],
        [a[1][0] - b[1][0], a[1][1] - b[1][1]],
    ]
}

pub fn transpose(a: &M2) -> M2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

pub fn inverse2(a: &M2) -> M2 {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    assert!(det.abs() > 1e-300, "singular 2x2 matrix");
    [
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ]
}

#[derive(Debug, Clone)]
pub struct OracleStep {
    pub x_pred: V2,
    pub p_pred: M2,
    pub x_corr: V2,
    pub p_corr: M2,
}

/// Forward Kalman filter with scalar measurement y = h·x + v.
pub fn oracle_filter(
    a: &M2,
    h: &V2,
    q: &M2,
    r: f64,
    x0: &V2,
    p0: &M2,
    measurements: &[f64],
) -> Vec<OracleStep> {
    let mut x = *x0;
    let mut p = *p0;
    let mut steps = Vec::with_capacity(measurements.len());
    for &y in measurements {
        let x_pred = mat_vec(a, &x);
        let p_pred = mat_add(&mat_mul(&mat_mul(a, &p), &transpose(a)), q);
        let ph = [
            p_pred[0][0] * h[0] + p_pred[0][1] * h[1],
            p_pred[1][0] * h[0] + p_pred[1][1] * h[1],
        ];
        let s = h[0] * ph[0] + h[1] * ph[1] + r;
        let k = [ph[0] / s, ph[1] / s];
        let innov = y - (h[0] * x_pred[0] + h[1] * x_pred[1]);
        let x_corr = [x_pred[0] + k[0] * innov, x_pred[1] + k[1] * innov];
        let khp = [
            [k[0] * ph[0], k[0] * ph[1]],
            [k[1] * ph[0], k[1] * ph[1]],
        ];
        let p_corr = mat_sub(&p_pred, &khp);
        steps.push(OracleStep {
            x_pred,
            p_pred,
            x_corr,
            p_corr,
        });
        x = x_corr;
        p = p_corr;
    }
    steps
}

/// Fixed-interval RTS smoothing over filter steps (standard recursion,
/// anchored on the next predicted mean).
pub fn oracle_rts(a: &M2, steps: &[OracleStep]) -> Vec<(V2, M2)> {
    let n = steps.len();
    let mut out = vec![([0.0; 2], [[0.0; 2]; 2]); n];
    out[n - 1] = (steps[n - 1].x_corr, steps[n - 1].p_corr);
    for k in (0..n - 1).rev() {
        let g = mat_mul(
            &mat_mul(&steps[k].p_corr, &transpose(a)),
            &inverse2(&steps[k + 1].p_pred),
        );
        let dx = [
            out[k + 1].0[0] - steps[k + 1].x_pred[0],
            out[k + 1].0[1] - steps[k + 1].x_pred[1],
        ];
        let gdx = mat_vec(&g, &dx);
        let x = [steps[k].x_corr[0] + gdx[0], steps[k].x_corr[1] + gdx[1]];
        let dp = mat_sub(&out[k + 1].1, &steps[k + 1].p_pred);
        let p = mat_add(&steps[k].p_corr, &mat_mul(&mat_mul(&g, &dp), &transpose(&g)));
        out[k] = (x, p);
    }
    out
}

/// Fixed-lag estimate for step k using measurements up to k + lag: filter
/// forward (already done), then a backward pass over the window [k, k+lag].
pub fn oracle_fixed_lag(a: &M2, steps: &[OracleStep], lag: usize) -> Vec<(usize, V2)> {
    let n = steps.len();
    let mut out = Vec::new();
    for k in 0..n.saturating_sub(lag) {
        let window = &steps[k..=k + lag];
        let smoothed = oracle_rts(a, window);
        out.push((k, smoothed[0].0));
    }
    out
}

// ---------------------------------------------------------------------------
// Scaled-down corpus for pipeline tests
// ---------------------------------------------------------------------------

/// A short four-family training corpus (about 1200 samples at dt = 0.01)
/// whose shape mirrors the built-in one.
pub fn small_training_manifest() -> SignalManifest {
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

/// A short testing signal with one smooth, one step, and one triangular
/// section (about 900 samples).
pub fn small_testing_manifest() -> SignalManifest {
    SignalManifest {
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
}

/// Training knobs for the scaled-down tests: enough accuracy to be
/// meaningful, bounded runtime.
pub fn small_train_config() -> TrainConfig {
    TrainConfig {
        max_iterations: 600,
        seed: 7,
        ..TrainConfig::default()
    }
}
