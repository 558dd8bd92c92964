//! One-step state transition models behind a common contract.
//!
//! The estimator only needs three things from a transition model: the map
//! itself, its Jacobian at a point, and the measurement row selecting the
//! sensor temperature. Two realizations are provided:
//!
//! * [`CfdTransferModel`] — the full field state (every cell temperature plus
//!   the flux, 1251 components on the default mesh), advanced by the
//!   finite-volume solver. Exact, and expensive: its Jacobian needs two
//!   solver steps per state component.
//! * [`AnnTransferModel`] — the 6-component local state, advanced by the
//!   transfer network, with the Jacobian differenced through the separately
//!   trained sensitivity network.
//!
//! In both, the flux component is carried through unchanged (a random-walk
//! flux model, with drift absorbed by process noise), which makes the last
//! Jacobian row exactly `[0, …, 0, 1]`.

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::dataset::{local_cells, perturbation_step, ReducedState, DEFAULT_EPS, STATE_DIM};
use crate::error::{Error, Result};
use crate::mlp::MlpModel;
use crate::physics::{CellIndex, Mesh, PhysicalParams, Stepper, TemperatureField};

/// Contract shared by every state transition model.
pub trait TransferModel {
    /// State dimension.
    fn dim(&self) -> usize;

    /// Advance the state one time step.
    fn transfer(&self, state: &DVector<f64>) -> Result<DVector<f64>>;

    /// Jacobian of [`TransferModel::transfer`] at `state`.
    fn jacobian(&self, state: &DVector<f64>) -> Result<DMatrix<f64>>;

    /// Row vector mapping a state to the scalar measurement.
    fn measurement_row(&self) -> RowDVector<f64>;
}

/// Central-difference Jacobian of an arbitrary vector map.
///
/// Component j is perturbed by ±eps·|x_j| with an absolute floor for
/// near-zero components, and each column is divided by the perturbation that
/// was actually representable, which keeps linear maps (and carried-through
/// components) exact.
pub fn numeric_jacobian<F>(f: F, state: &DVector<f64>, eps: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let n = state.len();
    let probe = f(state)?;
    let mut jac = DMatrix::zeros(probe.len(), n);
    for j in 0..n {
        let col = numeric_jacobian_column(&f, state, eps, j)?;
        jac.set_column(j, &col);
    }
    Ok(jac)
}

/// One column of the central-difference Jacobian.
pub fn numeric_jacobian_column<F>(
    f: &F,
    state: &DVector<f64>,
    eps: f64,
    j: usize,
) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let h = perturbation_step(state[j], eps);
    let mut plus = state.clone();
    let mut minus = state.clone();
    plus[j] = state[j] + h;
    minus[j] = state[j] - h;
    let span = plus[j] - minus[j];
    let fp = f(&plus)?;
    let fm = f(&minus)?;
    Ok((fp - fm) / span)
}

/// Full-state transition driven by the finite-volume solver.
#[derive(Debug, Clone)]
pub struct CfdTransferModel {
    stepper: Stepper,
    sensor_flat: usize,
    eps: f64,
}

impl CfdTransferModel {
    pub fn new(mesh: &Mesh, params: &PhysicalParams, sensor: CellIndex) -> Result<CfdTransferModel> {
        if sensor.i >= mesh.nx || sensor.j >= mesh.ny {
            return Err(Error::Domain(format!(
                "sensor ({}, {}) outside the {}x{} mesh",
                sensor.i, sensor.j, mesh.nx, mesh.ny
            )));
        }
        Ok(CfdTransferModel {
            stepper: Stepper::new(mesh, params)?,
            sensor_flat: sensor.flat(mesh),
            eps: DEFAULT_EPS,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        self.stepper.mesh()
    }

    /// Pack a field and flux into the full state vector.
    pub fn pack(&self, field: &TemperatureField, q: f64) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        v.as_mut_slice()[..field.as_slice().len()].copy_from_slice(field.as_slice());
        v[self.dim() - 1] = q;
        v
    }

    /// Uniform-temperature initial state with zero flux.
    pub fn initial_state(&self) -> DVector<f64> {
        let mesh = self.stepper.mesh();
        let field = TemperatureField::uniform(mesh, self.stepper.params().t_in);
        self.pack(&field, 0.0)
    }

    fn step_state(&self, state: &DVector<f64>) -> Result<DVector<f64>> {
        let mesh = self.stepper.mesh();
        let n_cells = mesh.cell_count();
        let q = state[n_cells];
        if !q.is_finite() {
            return Err(Error::NonFinite("flux component is not finite".into()));
        }
        let mut field = TemperatureField::from_values(mesh, state.as_slice()[..n_cells].to_vec())?;
        self.stepper.step_in_place(&mut field, q);
        let mut out = DVector::zeros(self.dim());
        out.as_mut_slice()[..n_cells].copy_from_slice(field.as_slice());
        out[n_cells] = q;
        Ok(out)
    }
}

impl TransferModel for CfdTransferModel {
    fn dim(&self) -> usize {
        self.stepper.mesh().cell_count() + 1
    }

    fn transfer(&self, state: &DVector<f64>) -> Result<DVector<f64>> {
        if state.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "state has {} components, model expects {}",
                state.len(),
                self.dim()
            )));
        }
        self.step_state(state)
    }

    fn jacobian(&self, state: &DVector<f64>) -> Result<DMatrix<f64>> {
        use rayon::prelude::*;
        if state.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "state has {} components, model expects {}",
                state.len(),
                self.dim()
            )));
        }
        let n = self.dim();
        let cols: Result<Vec<DVector<f64>>> = (0..n)
            .into_par_iter()
            .map(|j| numeric_jacobian_column(&|s| self.step_state(s), state, self.eps, j))
            .collect();
        let cols = cols?;
        let mut jac = DMatrix::zeros(n, n);
        for (j, col) in cols.iter().enumerate() {
            jac.set_column(j, col);
        }
        Ok(jac)
    }

    fn measurement_row(&self) -> RowDVector<f64> {
        let mut h = RowDVector::zeros(self.dim());
        h[self.sensor_flat] = 1.0;
        h
    }
}

/// Reduced-state transition served by the two surrogate networks.
#[derive(Debug, Clone)]
pub struct AnnTransferModel {
    transfer_mlp: MlpModel,
    sensitivity_mlp: MlpModel,
    eps: f64,
}

impl AnnTransferModel {
    /// Pair the two networks, refusing combinations that were not trained
    /// together (different corpora or sensors).
    pub fn new(transfer_mlp: MlpModel, sensitivity_mlp: MlpModel) -> Result<AnnTransferModel> {
        for (mlp, role) in [(&transfer_mlp, "transfer"), (&sensitivity_mlp, "sensitivity")] {
            if mlp.input_dim() != STATE_DIM || mlp.output_dim() != STATE_DIM - 1 {
                return Err(Error::ModelMismatch(format!(
                    "{role} model is {}→{}, expected {}→{}",
                    mlp.input_dim(),
                    mlp.output_dim(),
                    STATE_DIM,
                    STATE_DIM - 1
                )));
            }
            if mlp.provenance.role != role {
                return Err(Error::ModelMismatch(format!(
                    "model in the {role} slot declares role '{}'",
                    mlp.provenance.role
                )));
            }
        }
        if transfer_mlp.provenance.manifest_hash != sensitivity_mlp.provenance.manifest_hash {
            return Err(Error::ModelMismatch(format!(
                "transfer model trained on corpus {} but sensitivity model on {}",
                transfer_mlp.provenance.manifest_hash, sensitivity_mlp.provenance.manifest_hash
            )));
        }
        if transfer_mlp.provenance.sensor != sensitivity_mlp.provenance.sensor {
            return Err(Error::ModelMismatch(
                "transfer and sensitivity models were trained around different sensors".into(),
            ));
        }
        Ok(AnnTransferModel {
            transfer_mlp,
            sensitivity_mlp,
            eps: DEFAULT_EPS,
        })
    }

    pub fn sensor(&self) -> Option<(usize, usize)> {
        self.transfer_mlp.provenance.sensor
    }

    pub fn manifest_hash(&self) -> &str {
        &self.transfer_mlp.provenance.manifest_hash
    }

    /// Advance a typed reduced state.
    pub fn transfer_reduced(&self, state: &ReducedState) -> Result<ReducedState> {
        let v = DVector::from_column_slice(&state.to_array());
        let out = self.transfer(&v)?;
        Ok(ReducedState::from_array([
            out[0], out[1], out[2], out[3], out[4], out[5],
        ]))
    }

    fn eval_through(&self, mlp: &MlpModel, state: &DVector<f64>) -> Result<DVector<f64>> {
        if state.len() != STATE_DIM {
            return Err(Error::Dimension(format!(
                "state has {} components, reduced model expects {STATE_DIM}",
                state.len()
            )));
        }
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("reduced state contains a non-finite component".into()));
        }
        let z = mlp.standardizer.apply_input(state.as_slice());
        let y = mlp.forward(&z)?;
        let temps = mlp.standardizer.invert_output(&y);
        let mut out = DVector::zeros(STATE_DIM);
        out.as_mut_slice()[..STATE_DIM - 1].copy_from_slice(&temps);
        out[STATE_DIM - 1] = state[STATE_DIM - 1];
        Ok(out)
    }

    /// The transition as seen by the sensitivity network; only used inside
    /// the Jacobian, mirroring the split-dataset training.
    pub fn sensitivity_transfer(&self, state: &DVector<f64>) -> Result<DVector<f64>> {
        self.eval_through(&self.sensitivity_mlp, state)
    }
}

impl TransferModel for AnnTransferModel {
    fn dim(&self) -> usize {
        STATE_DIM
    }

    fn transfer(&self, state: &DVector<f64>) -> Result<DVector<f64>> {
        self.eval_through(&self.transfer_mlp, state)
    }

    fn jacobian(&self, state: &DVector<f64>) -> Result<DMatrix<f64>> {
        numeric_jacobian(|s| self.sensitivity_transfer(s), state, self.eps)
    }

    fn measurement_row(&self) -> RowDVector<f64> {
        let mut h = RowDVector::zeros(STATE_DIM);
        h[0] = 1.0;
        h
    }
}

/// Check that a sensor matches the stencil a model pair was trained around.
pub fn check_sensor_match(model: &AnnTransferModel, sensor: CellIndex, mesh: &Mesh) -> Result<()> {
    local_cells(sensor, mesh)?;
    match model.sensor() {
        Some((i, j)) if i == sensor.i && j == sensor.j => Ok(()),
        Some((i, j)) => Err(Error::ModelMismatch(format!(
            "models were trained around sensor ({i}, {j}), not ({}, {})",
            sensor.i, sensor.j
        ))),
        None => Err(Error::ModelMismatch(
            "models carry no sensor provenance".into(),
        )),
    }
}
