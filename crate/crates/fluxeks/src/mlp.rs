//! Small fully connected networks trained with Levenberg-Marquardt.
//!
//! Everything here operates in standardized space; the [`Standardizer`]
//! stored inside each model is applied by callers at the physical boundary.
//! Hidden layers use tanh, the output layer is linear, and training is
//! full-batch: each candidate step solves the damped normal equations
//! `(JᵀJ + λI)δ = Jᵀr` with `J` the exact backprop Jacobian of the network
//! outputs with respect to every weight and bias.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Sample, Standardizer};
use crate::error::{Error, Result};
use crate::seed::rng_for;

/// Where a model came from, recorded to catch mismatched use later.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelProvenance {
    /// What the model predicts: "transfer", "sensitivity", or "inverse".
    pub role: String,
    /// Content hash of the signal manifest (plus any window geometry) the
    /// training data came from.
    pub manifest_hash: String,
    /// Sensor cell the training data was extracted around, if any.
    pub sensor: Option<(usize, usize)>,
}

impl ModelProvenance {
    pub fn new(role: &str, manifest_hash: &str, sensor: Option<(usize, usize)>) -> Self {
        ModelProvenance {
            role: role.to_string(),
            manifest_hash: manifest_hash.to_string(),
            sensor,
        }
    }

    /// Placeholder for models built in tests or ad hoc experiments.
    pub fn adhoc(role: &str) -> Self {
        ModelProvenance::new(role, "adhoc", None)
    }
}

/// A multi-layer perceptron plus the standardizer of its training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    /// `weights[l]` maps activations of layer l to preactivations of l+1.
    weights: Vec<DMatrix<f64>>,
    biases: Vec<DVector<f64>>,
    pub standardizer: Standardizer,
    pub provenance: ModelProvenance,
}

impl MlpModel {
    /// Seeded random model with weights uniform in ±1/√fan_in.
    pub fn new(
        layer_sizes: &[usize],
        standardizer: Standardizer,
        provenance: ModelProvenance,
        seed: u64,
    ) -> Result<MlpModel> {
        if layer_sizes.len() < 2 || layer_sizes.iter().any(|&n| n == 0) {
            return Err(Error::Dimension(format!(
                "layer sizes {layer_sizes:?} do not describe a network"
            )));
        }
        let mut rng = rng_for(seed, "mlp-init");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in layer_sizes.windows(2) {
            let (n_in, n_out) = (w[0], w[1]);
            let bound = 1.0 / (n_in as f64).sqrt();
            weights.push(DMatrix::from_fn(n_out, n_in, |_, _| {
                rng.random_range(-bound..=bound)
            }));
            biases.push(DVector::from_fn(n_out, |_, _| rng.random_range(-bound..=bound)));
        }
        Ok(MlpModel {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            standardizer,
            provenance,
        })
    }

    /// Build a model from explicit parameters (mostly for tests).
    pub fn from_parts(
        layer_sizes: &[usize],
        weights: Vec<DMatrix<f64>>,
        biases: Vec<DVector<f64>>,
        standardizer: Standardizer,
        provenance: ModelProvenance,
    ) -> Result<MlpModel> {
        let model = MlpModel {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            standardizer,
            provenance,
        };
        model.check_shape()?;
        Ok(model)
    }

    fn check_shape(&self) -> Result<()> {
        if self.weights.len() + 1 != self.layer_sizes.len() || self.biases.len() != self.weights.len()
        {
            return Err(Error::Dimension("layer count mismatch".into()));
        }
        for (l, w) in self.layer_sizes.windows(2).enumerate() {
            if self.weights[l].shape() != (w[1], w[0]) || self.biases[l].len() != w[1] {
                return Err(Error::Dimension(format!("layer {l} has inconsistent shape")));
            }
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Total number of trainable parameters: Σ (n_in + 1)·n_out.
    pub fn param_count(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| (w[0] + 1) * w[1])
            .sum()
    }

    /// Flatten all parameters, layer by layer, weights (row-major) then biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            for r in 0..w.nrows() {
                for c in 0..w.ncols() {
                    out.push(w[(r, c)]);
                }
            }
            out.extend(b.iter());
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::Dimension(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        let mut k = 0;
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            for r in 0..w.nrows() {
                for c in 0..w.ncols() {
                    w[(r, c)] = params[k];
                    k += 1;
                }
            }
            for r in 0..b.len() {
                b[r] = params[k];
                k += 1;
            }
        }
        Ok(())
    }

    /// Evaluate the network on a standardized input.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "input has {} components, network expects {}",
                input.len(),
                self.input_dim()
            )));
        }
        let mut a = DVector::from_column_slice(input);
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = w * a + b;
            if l < last {
                z.apply(|v| *v = v.tanh());
            }
            a = z;
        }
        Ok(a.as_slice().to_vec())
    }

    /// Forward pass keeping every layer's activation, for backprop.
    fn forward_traced(&self, input: &[f64]) -> Vec<DVector<f64>> {
        let mut acts = Vec::with_capacity(self.layer_sizes.len());
        acts.push(DVector::from_column_slice(input));
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = w * acts.last().unwrap() + b;
            if l < last {
                z.apply(|v| *v = v.tanh());
            }
            acts.push(z);
        }
        acts
    }

    /// Write ∂y_o/∂θ for one output into a flat parameter-ordered buffer.
    /// The buffer must be zeroed (or fully overwritten by a previous call
    /// pattern) beforehand; every position is assigned here.
    fn output_gradient_into(&self, acts: &[DVector<f64>], o: usize, grad: &mut [f64]) {
        let n_layers = self.weights.len();
        // g = ∂y_o/∂z at the current layer, starting from the linear output.
        let mut g = DVector::zeros(self.output_dim());
        g[o] = 1.0;
        let mut base = self.param_count();
        for l in (0..n_layers).rev() {
            let a_prev = &acts[l];
            let n_in = self.layer_sizes[l];
            let n_out = self.layer_sizes[l + 1];
            base -= (n_in + 1) * n_out;
            let (w_part, b_part) = grad[base..base + (n_in + 1) * n_out].split_at_mut(n_in * n_out);
            for r in 0..n_out {
                let gr = g[r];
                let row = &mut w_part[r * n_in..(r + 1) * n_in];
                if gr == 0.0 {
                    row.fill(0.0);
                } else {
                    for (dst, a) in row.iter_mut().zip(a_prev.iter()) {
                        *dst = gr * a;
                    }
                }
                b_part[r] = gr;
            }
            if l > 0 {
                let mut g_prev = self.weights[l].tr_mul(&g);
                // acts[l] is already post-tanh for hidden layers.
                for (gp, a) in g_prev.iter_mut().zip(acts[l].iter()) {
                    *gp *= 1.0 - a * a;
                }
                g = g_prev;
            }
        }
    }

    /// Exact Jacobian of every output with respect to every parameter,
    /// shaped (output_dim × param_count), computed by one backward pass per
    /// output.
    pub fn jacobian_wrt_weights(&self, input: &[f64]) -> Result<DMatrix<f64>> {
        if input.len() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "input has {} components, network expects {}",
                input.len(),
                self.input_dim()
            )));
        }
        let acts = self.forward_traced(input);
        let out_dim = self.output_dim();
        let p = self.param_count();
        let mut jac = DMatrix::zeros(out_dim, p);
        let mut grad = vec![0.0; p];
        for o in 0..out_dim {
            self.output_gradient_into(&acts, o, &mut grad);
            for (c, v) in grad.iter().enumerate() {
                jac[(o, c)] = *v;
            }
        }
        Ok(jac)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<MlpModel> {
        let model: MlpModel = serde_json::from_str(text)?;
        model.check_shape()?;
        Ok(model)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<MlpModel> {
        let text = std::fs::read_to_string(path)?;
        MlpModel::from_json(&text)
    }
}

/// Standardized input/target pairs ready for training.
#[derive(Debug, Clone, Default)]
pub struct TrainingSet {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl TrainingSet {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<TrainingSet> {
        if inputs.len() != targets.len() {
            return Err(Error::Dimension("inputs and targets differ in length".into()));
        }
        Ok(TrainingSet { inputs, targets })
    }

    /// Standardize reduced-state samples into a training set.
    pub fn from_samples(samples: &[Sample], standardizer: &Standardizer) -> TrainingSet {
        TrainingSet {
            inputs: samples
                .iter()
                .map(|s| standardizer.apply_input(&s.input))
                .collect(),
            targets: samples
                .iter()
                .map(|s| standardizer.apply_output(&s.output))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Knobs of the Levenberg-Marquardt loop.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Cap on accepted iterations.
    pub max_iterations: usize,
    /// Stop after this many consecutive accepted iterations without a
    /// validation improvement.
    pub patience: usize,
    pub lambda0: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    /// Damping beyond this counts as convergence (no finite descent step).
    pub lambda_max: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_iterations: 400,
            patience: 6,
            lambda0: 1e-3,
            lambda_up: 10.0,
            lambda_down: 10.0,
            lambda_max: 1e12,
            seed: 9,
        }
    }
}

/// Why training stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    MaxIterations,
    Patience,
    /// λ exceeded its cap without finding a descent step: the optimum (at
    /// this precision) has been reached.
    DampingExhausted,
}

/// Outcome summary of one training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    /// Accepted iterations.
    pub iterations: usize,
    pub train_mse: f64,
    pub validation_mse: f64,
    /// Filled by [`finalize_report`] once a test split is available.
    pub test_mse: Option<f64>,
    pub test_regression_r: Option<f64>,
    pub stop: StopReason,
    /// (λ0, up factor, down factor) actually used.
    pub lambda_schedule: (f64, f64, f64),
}

/// Mean squared error of the model over a set, in standardized units.
pub fn evaluate_mse(model: &MlpModel, set: &TrainingSet) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::Domain("cannot evaluate on an empty set".into()));
    }
    let mut sse = 0.0;
    let mut count = 0usize;
    for (x, t) in set.inputs.iter().zip(&set.targets) {
        let y = model.forward(x)?;
        for (yi, ti) in y.iter().zip(t) {
            let d = ti - yi;
            sse += d * d;
        }
        count += t.len();
    }
    Ok(sse / count as f64)
}

/// Pearson correlation between flattened predictions and targets.
pub fn regression_r(model: &MlpModel, set: &TrainingSet) -> Result<f64> {
    if set.len() < 2 {
        return Err(Error::Domain("regression R needs at least 2 samples".into()));
    }
    let mut preds = Vec::new();
    let mut targs = Vec::new();
    for (x, t) in set.inputs.iter().zip(&set.targets) {
        preds.extend(model.forward(x)?);
        targs.extend_from_slice(t);
    }
    let n = preds.len() as f64;
    let pm = preds.iter().sum::<f64>() / n;
    let tm = targs.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vp = 0.0;
    let mut vt = 0.0;
    for (p, t) in preds.iter().zip(&targs) {
        cov += (p - pm) * (t - tm);
        vp += (p - pm) * (p - pm);
        vt += (t - tm) * (t - tm);
    }
    let denom = (vp * vt).sqrt();
    if denom == 0.0 {
        return Err(Error::Numerical("regression R undefined for constant series".into()));
    }
    Ok((cov / denom).clamp(-1.0, 1.0))
}

/// Fill the test-split fields of a report.
pub fn finalize_report(report: &mut TrainReport, model: &MlpModel, test: &TrainingSet) -> Result<()> {
    report.test_mse = Some(evaluate_mse(model, test)?);
    report.test_regression_r = Some(regression_r(model, test)?);
    Ok(())
}

const CHUNK: usize = 512;

/// Residuals (target − prediction) stacked over the whole set, plus the SSE.
fn residuals(model: &MlpModel, set: &TrainingSet) -> Result<(Vec<f64>, f64)> {
    let out_dim = model.output_dim();
    let mut r = vec![0.0; set.len() * out_dim];
    let chunks: Vec<(usize, Vec<f64>)> = set
        .inputs
        .par_chunks(CHUNK)
        .zip(set.targets.par_chunks(CHUNK))
        .enumerate()
        .map(|(ci, (xs, ts))| {
            let mut local = Vec::with_capacity(xs.len() * out_dim);
            for (x, t) in xs.iter().zip(ts) {
                let y = model.forward(x).expect("dims checked");
                for (ti, yi) in t.iter().zip(&y) {
                    local.push(ti - yi);
                }
            }
            (ci, local)
        })
        .collect();
    for (ci, local) in chunks {
        let start = ci * CHUNK * out_dim;
        r[start..start + local.len()].copy_from_slice(&local);
    }
    let sse = r.iter().map(|v| v * v).sum();
    Ok((r, sse))
}

/// Accumulate JᵀJ and Jᵀr over the set. Chunks are reduced in index order so
/// the result is bit-reproducible regardless of thread scheduling. The
/// per-chunk Jacobian is assembled transposed (parameters × rows) so each
/// (sample, output) gradient lands in one contiguous column.
fn normal_equations(
    model: &MlpModel,
    set: &TrainingSet,
    residual: &[f64],
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let p = model.param_count();
    let out_dim = model.output_dim();
    let mut parts: Vec<(usize, DMatrix<f64>, DVector<f64>)> = set
        .inputs
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, xs)| {
            let rows = xs.len() * out_dim;
            let mut jt = DMatrix::zeros(p, rows);
            let mut r_chunk = DVector::zeros(rows);
            for (s, x) in xs.iter().enumerate() {
                let acts = model.forward_traced(x);
                for o in 0..out_dim {
                    let col = s * out_dim + o;
                    model.output_gradient_into(
                        &acts,
                        o,
                        jt.column_mut(col).as_mut_slice(),
                    );
                    r_chunk[col] = residual[(ci * CHUNK + s) * out_dim + o];
                }
            }
            let jtj = &jt * jt.transpose();
            let jtr = &jt * &r_chunk;
            (ci, jtj, jtr)
        })
        .collect();
    parts.sort_by_key(|(ci, ..)| *ci);
    let mut jtj = DMatrix::zeros(p, p);
    let mut jtr = DVector::zeros(p);
    for (_, a, b) in parts {
        jtj += a;
        jtr += b;
    }
    Ok((jtj, jtr))
}

/// Full-batch Levenberg-Marquardt with validation-based early stopping.
///
/// Accepted steps strictly reduce the training SSE; a rejected step raises λ
/// and retries from the same point. The returned model carries the parameters
/// with the best validation MSE seen, which is not necessarily the last
/// accepted state.
pub fn train_levenberg_marquardt(
    mut model: MlpModel,
    train: &TrainingSet,
    validation: &TrainingSet,
    config: &TrainConfig,
) -> Result<(MlpModel, TrainReport)> {
    if train.is_empty() || validation.is_empty() {
        return Err(Error::Training("train and validation sets must be nonempty".into()));
    }
    if config.patience == 0 {
        return Err(Error::Training("patience must be at least 1".into()));
    }
    if !(config.lambda0 > 0.0) {
        return Err(Error::Training("initial damping must be positive".into()));
    }
    for x in &train.inputs {
        if x.len() != model.input_dim() {
            return Err(Error::Dimension("training input width mismatch".into()));
        }
    }

    let p = model.param_count();
    let (mut residual, mut sse) = residuals(&model, train)?;
    if !sse.is_finite() {
        return Err(Error::Training("initial loss is not finite".into()));
    }
    let mut lambda = config.lambda0;
    let mut best_val = evaluate_mse(&model, validation)?;
    let mut best_params = model.params();
    let mut stall = 0usize;
    let mut accepted = 0usize;
    let mut stop = StopReason::MaxIterations;

    'outer: while accepted < config.max_iterations {
        let (jtj, jtr) = normal_equations(&model, train, &residual)?;
        // Inner damping loop: retry the step from the same point with larger
        // λ until the training SSE drops.
        loop {
            let mut damped = jtj.clone();
            for d in 0..p {
                damped[(d, d)] += lambda;
            }
            let step = match Cholesky::new(damped) {
                Some(chol) => chol.solve(&jtr),
                None => {
                    lambda *= config.lambda_up;
                    if lambda > config.lambda_max {
                        return Err(Error::Training(
                            "normal equations singular even at maximum damping".into(),
                        ));
                    }
                    continue;
                }
            };
            let current = model.params();
            let candidate: Vec<f64> = current.iter().zip(step.iter()).map(|(a, d)| a + d).collect();
            let mut trial = model.clone();
            trial.set_params(&candidate)?;
            let (trial_residual, trial_sse) = residuals(&trial, train)?;
            if trial_sse.is_finite() && trial_sse < sse {
                model = trial;
                residual = trial_residual;
                sse = trial_sse;
                lambda = (lambda / config.lambda_down).max(1e-15);
                accepted += 1;
                let val = evaluate_mse(&model, validation)?;
                if val < best_val {
                    best_val = val;
                    best_params = model.params();
                    stall = 0;
                } else {
                    stall += 1;
                    if stall >= config.patience {
                        stop = StopReason::Patience;
                        break 'outer;
                    }
                }
                break;
            }
            lambda *= config.lambda_up;
            if lambda > config.lambda_max {
                stop = StopReason::DampingExhausted;
                break 'outer;
            }
        }
    }

    model.set_params(&best_params)?;
    let train_mse = evaluate_mse(&model, train)?;
    let report = TrainReport {
        iterations: accepted,
        train_mse,
        validation_mse: best_val,
        test_mse: None,
        test_regression_r: None,
        stop,
        lambda_schedule: (config.lambda0, config.lambda_up, config.lambda_down),
    };
    Ok((model, report))
}
