//! Extended Kalman filtering with fixed-lag RTS smoothing.
//!
//! The filter is generic over [`TransferModel`], so the same recursion runs
//! against the full-field solver model and the 6-component surrogate model.
//! Measurements are scalar (one sensor), which keeps the gain computation a
//! vector solve.
//!
//! Fixed-lag smoothing delays each estimate by `n_f` steps: when the
//! measurement for step `k + n_f` arrives, a backward pass over the window
//! refines the estimate for step `k` using everything observed since. The
//! backward state recursion only needs the per-step smoother gains, which
//! are computed once when a step enters the window; smoothed covariances are
//! optional because the online flux estimate does not need them.

use nalgebra::{Cholesky, DMatrix, DVector, RowDVector};
use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::transfer::TransferModel;

/// State mean and covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

/// Relative symmetry tolerance for covariance checks.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Diagonal floor added before the Cholesky positive-semidefiniteness check.
pub const PSD_FLOOR: f64 = 1e-12;

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<GaussianState> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::Dimension(format!(
                "covariance is {}x{} for a {}-dimensional mean",
                cov.nrows(),
                cov.ncols(),
                mean.len()
            )));
        }
        Ok(GaussianState { mean, cov })
    }

    /// Diagonal-covariance belief.
    pub fn diagonal(mean: DVector<f64>, variances: &[f64]) -> Result<GaussianState> {
        if variances.len() != mean.len() {
            return Err(Error::Dimension("variance count != state dimension".into()));
        }
        let cov = DMatrix::from_diagonal(&DVector::from_column_slice(variances));
        GaussianState::new(mean, cov)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Force exact symmetry: P ← (P + Pᵀ)/2.
    pub fn symmetrize(&mut self) {
        let t = self.cov.transpose();
        self.cov += t;
        self.cov *= 0.5;
    }

    /// Symmetry to [`SYMMETRY_TOL`] (relative) and positive semidefiniteness
    /// via Cholesky of P + floor·I.
    pub fn validate(&self) -> Result<()> {
        if self.mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("state mean contains a non-finite value".into()));
        }
        let scale = self.cov.amax().max(1.0);
        for r in 0..self.cov.nrows() {
            for c in (r + 1)..self.cov.ncols() {
                if (self.cov[(r, c)] - self.cov[(c, r)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::Numerical(format!(
                        "covariance asymmetric at ({r}, {c})"
                    )));
                }
            }
        }
        let mut floored = self.cov.clone();
        for d in 0..floored.nrows() {
            floored[(d, d)] += PSD_FLOOR;
        }
        if Cholesky::new(floored).is_none() {
            return Err(Error::Numerical("covariance is not positive semidefinite".into()));
        }
        Ok(())
    }
}

/// Process and measurement noise.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    /// Process covariance, dim × dim.
    pub q: DMatrix<f64>,
    /// Scalar measurement variance.
    pub r: f64,
}

impl NoiseModel {
    pub fn new(q: DMatrix<f64>, r: f64) -> Result<NoiseModel> {
        if q.nrows() != q.ncols() {
            return Err(Error::Dimension("process covariance must be square".into()));
        }
        if !(r > 0.0) {
            return Err(Error::Domain(format!("measurement variance must be positive, got {r}")));
        }
        let probe = GaussianState::new(DVector::zeros(q.nrows()), q.clone())?;
        probe.validate()?;
        Ok(NoiseModel { q, r })
    }

    /// Diagonal process noise.
    pub fn diagonal(variances: &[f64], r: f64) -> Result<NoiseModel> {
        NoiseModel::new(
            DMatrix::from_diagonal(&DVector::from_column_slice(variances)),
            r,
        )
    }
}

/// Everything the smoother needs to remember about one filter step.
#[derive(Debug, Clone)]
pub struct StepRecord {
    /// Absolute step index (the measurement that produced this record).
    pub step: usize,
    /// Belief after predict, before the measurement update.
    pub predicted: GaussianState,
    /// Belief after the measurement update.
    pub corrected: GaussianState,
    /// Jacobian of the transition that *arrived* at this record.
    pub arriving_jacobian: DMatrix<f64>,
    /// Smoother gain G linking the previous record to this one, cached when
    /// the record is pushed. `None` for the first record of a stream.
    pub gain_from_prev: Option<DMatrix<f64>>,
}

/// Prediction: mean through the transition, covariance through its
/// linearization plus process noise. Also returns the Jacobian and the
/// cross term P̃Fᵀ (reused by the smoother gain).
fn predict_full<M: TransferModel>(
    belief: &GaussianState,
    model: &M,
    noise: &NoiseModel,
) -> Result<(GaussianState, DMatrix<f64>, DMatrix<f64>)> {
    let mean = model.transfer(&belief.mean)?;
    if mean.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("transition produced a non-finite state".into()));
    }
    let f = model.jacobian(&belief.mean)?;
    let fp = &f * &belief.cov;
    let mut cov = &fp * f.transpose();
    cov += &noise.q;
    let mut predicted = GaussianState::new(mean, cov)?;
    predicted.symmetrize();
    // P̃Fᵀ = (F P̃)ᵀ because P̃ is symmetric.
    Ok((predicted, f, fp.transpose()))
}

/// One filter prediction. Returns the predicted belief and the Jacobian used.
pub fn predict<M: TransferModel>(
    belief: &GaussianState,
    model: &M,
    noise: &NoiseModel,
) -> Result<(GaussianState, DMatrix<f64>)> {
    let (predicted, f, _) = predict_full(belief, model, noise)?;
    Ok((predicted, f))
}

/// Scalar measurement update.
pub fn correct(
    predicted: &GaussianState,
    measurement: f64,
    h: &RowDVector<f64>,
    noise: &NoiseModel,
) -> Result<GaussianState> {
    if h.len() != predicted.dim() {
        return Err(Error::Dimension("measurement row does not match state dimension".into()));
    }
    if !measurement.is_finite() {
        return Err(Error::NonFinite(format!("measurement {measurement} is not finite")));
    }
    let ph_t = &predicted.cov * h.transpose();
    let s = (h * &ph_t)[0] + noise.r;
    if !(s > 0.0) {
        return Err(Error::Numerical(format!(
            "innovation variance {s} is not positive"
        )));
    }
    let gain = &ph_t / s;
    let innovation = measurement - (h * &predicted.mean)[0];
    let mean = &predicted.mean + &gain * innovation;
    // P̃ = P̂ − K (H P̂); H P̂ = (P̂ Hᵀ)ᵀ by symmetry of P̂.
    let cov = &predicted.cov - &gain * ph_t.transpose();
    let mut corrected = GaussianState::new(mean, cov)?;
    corrected.symmetrize();
    Ok(corrected)
}

/// Which forward quantity the backward innovation subtracts.
///
/// The standard RTS recursion anchors on the *predicted* mean of the next
/// step; anchoring on the corrected mean is kept selectable for comparison
/// experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RtsAnchor {
    #[default]
    Predicted,
    Corrected,
}

/// Result of a backward smoothing pass.
#[derive(Debug, Clone)]
pub struct RtsOutput {
    /// Smoothed states, same order as the input records.
    pub states: Vec<GaussianState>,
    /// How many gain solves needed a diagonal regularization.
    pub regularized: usize,
}

/// Smoother gain G = P̃_k Fᵀ (P̂_next)⁻¹, solved through the Cholesky of
/// P̂_next; a failed factorization falls back to a floored retry and is
/// counted by the caller.
fn smoother_gain(
    corrected_cov: &DMatrix<f64>,
    arriving_jacobian: &DMatrix<f64>,
    predicted_next_cov: &DMatrix<f64>,
    regularized: &mut usize,
) -> Result<DMatrix<f64>> {
    // Gᵀ = P̂⁻¹ (F P̃), using the symmetry of both covariances.
    let rhs = arriving_jacobian * corrected_cov;
    let chol = match Cholesky::new(predicted_next_cov.clone()) {
        Some(c) => c,
        None => {
            *regularized += 1;
            let mut floored = predicted_next_cov.clone();
            for d in 0..floored.nrows() {
                floored[(d, d)] += PSD_FLOOR;
            }
            Cholesky::new(floored).ok_or_else(|| {
                Error::Numerical("predicted covariance singular even after regularization".into())
            })?
        }
    };
    Ok(chol.solve(&rhs).transpose())
}

/// Fixed-interval RTS smoothing over a slice of forward records.
///
/// The final record keeps its filtered belief; earlier records are refined
/// backwards. Record k+1 must carry the Jacobian of the transition from k to
/// k+1 (`arriving_jacobian`), which is how [`run_filter`] stores them.
pub fn rts_backward(records: &[StepRecord], anchor: RtsAnchor) -> Result<RtsOutput> {
    let n = records.len();
    let mut regularized = 0usize;
    let mut states: Vec<GaussianState> = Vec::with_capacity(n);
    if n == 0 {
        return Ok(RtsOutput {
            states,
            regularized,
        });
    }
    states.resize(n, records[n - 1].corrected.clone());
    states[n - 1] = records[n - 1].corrected.clone();
    for k in (0..n - 1).rev() {
        let next = &records[k + 1];
        let gain = smoother_gain(
            &records[k].corrected.cov,
            &next.arriving_jacobian,
            &next.predicted.cov,
            &mut regularized,
        )?;
        let anchor_mean = match anchor {
            RtsAnchor::Predicted => &next.predicted.mean,
            RtsAnchor::Corrected => &next.corrected.mean,
        };
        let mean = &records[k].corrected.mean + &gain * (&states[k + 1].mean - anchor_mean);
        let cov_innov = &states[k + 1].cov - &next.predicted.cov;
        let cov = &records[k].corrected.cov + &gain * cov_innov * gain.transpose();
        let mut smoothed = GaussianState::new(mean, cov)?;
        smoothed.symmetrize();
        states[k] = smoothed;
    }
    Ok(RtsOutput {
        states,
        regularized,
    })
}

/// Filter a whole measurement stream offline, keeping every step record.
pub fn run_filter<M: TransferModel>(
    model: &M,
    noise: &NoiseModel,
    initial: &GaussianState,
    measurements: &[f64],
) -> Result<Vec<StepRecord>> {
    let h = model.measurement_row();
    let mut belief = initial.clone();
    let mut records = Vec::with_capacity(measurements.len());
    let mut regularized = 0usize;
    for (k, &y) in measurements.iter().enumerate() {
        let (predicted, f, cross) = predict_full(&belief, model, noise)?;
        let corrected = correct(&predicted, y, &h, noise)?;
        let gain_from_prev = if records.is_empty() {
            None
        } else {
            Some(gain_from_cross(&cross, &predicted.cov, &mut regularized)?)
        };
        records.push(StepRecord {
            step: k,
            predicted,
            corrected: corrected.clone(),
            arriving_jacobian: f,
            gain_from_prev,
        });
        belief = corrected;
    }
    Ok(records)
}

/// G from the cached cross term P̃Fᵀ and the next predicted covariance.
fn gain_from_cross(
    cross: &DMatrix<f64>,
    predicted_next_cov: &DMatrix<f64>,
    regularized: &mut usize,
) -> Result<DMatrix<f64>> {
    let chol = match Cholesky::new(predicted_next_cov.clone()) {
        Some(c) => c,
        None => {
            *regularized += 1;
            let mut floored = predicted_next_cov.clone();
            for d in 0..floored.nrows() {
                floored[(d, d)] += PSD_FLOOR;
            }
            Cholesky::new(floored).ok_or_else(|| {
                Error::Numerical("predicted covariance singular even after regularization".into())
            })?
        }
    };
    // Gᵀ = P̂⁻¹ (P̃Fᵀ)ᵀ
    Ok(chol.solve(&cross.transpose()).transpose())
}

/// Options of the streaming fixed-lag smoother.
#[derive(Debug, Clone, Copy)]
pub struct SmootherOptions {
    /// Future steps per estimate (`n_f`). Zero degrades to pure filtering.
    pub lag: usize,
    pub anchor: RtsAnchor,
    /// Also run the covariance backward recursion each sweep. Off saves two
    /// matrix products per window record, which matters for the full-field
    /// model; the flux estimate itself never needs it.
    pub smooth_covariances: bool,
    /// Check symmetry/PSD of every produced covariance and count violations.
    pub validate_covariances: bool,
    /// Lower bound projected onto the flux component after each update.
    /// Early in a run the sensor has not yet felt the flux at all, and an
    /// unconstrained estimate can wander into regimes a data-driven model
    /// knows nothing about; a physical bound keeps it recoverable.
    pub q_floor: Option<f64>,
}

impl SmootherOptions {
    pub fn with_lag(lag: usize) -> SmootherOptions {
        SmootherOptions {
            lag,
            anchor: RtsAnchor::Predicted,
            smooth_covariances: true,
            validate_covariances: true,
            q_floor: None,
        }
    }
}

/// One delayed estimate emitted by the smoother.
#[derive(Debug, Clone)]
pub struct SmoothedEstimate {
    /// The step this estimate refers to (measurement index).
    pub step: usize,
    /// Smoothed state mean.
    pub mean: DVector<f64>,
    /// Smoothed covariance, when covariance smoothing is enabled.
    pub cov: Option<DMatrix<f64>>,
    /// The flux component of the smoothed state.
    pub q: f64,
}

/// Streaming fixed-lag smoother over a transfer model.
///
/// Feed measurements one at a time; once `lag + 1` records are buffered,
/// every further measurement emits the smoothed estimate for the step `lag`
/// samples in the past (exactly `lag` latency).
pub struct FixedLagSmoother<M: TransferModel> {
    model: M,
    noise: NoiseModel,
    h: RowDVector<f64>,
    opts: SmootherOptions,
    window: VecDeque<StepRecord>,
    belief: GaussianState,
    steps_in: usize,
    regularized: usize,
    validation_failures: usize,
}

impl<M: TransferModel> FixedLagSmoother<M> {
    pub fn new(
        model: M,
        noise: NoiseModel,
        initial: GaussianState,
        opts: SmootherOptions,
    ) -> Result<FixedLagSmoother<M>> {
        if initial.dim() != model.dim() {
            return Err(Error::Dimension(format!(
                "initial belief has dimension {}, model expects {}",
                initial.dim(),
                model.dim()
            )));
        }
        if noise.q.nrows() != model.dim() {
            return Err(Error::Dimension("process noise does not match state dimension".into()));
        }
        initial.validate()?;
        let h = model.measurement_row();
        Ok(FixedLagSmoother {
            model,
            noise,
            h,
            opts,
            window: VecDeque::new(),
            belief: initial,
            steps_in: 0,
            regularized: 0,
            validation_failures: 0,
        })
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    /// Measurements consumed so far.
    pub fn steps_in(&self) -> usize {
        self.steps_in
    }

    /// Measurements still needed before the first estimate can be emitted.
    pub fn warmup_shortfall(&self) -> usize {
        (self.opts.lag + 1).saturating_sub(self.steps_in)
    }

    /// Gain solves that needed regularization so far.
    pub fn regularizations(&self) -> usize {
        self.regularized
    }

    /// Covariance checks that failed so far (only counted when
    /// `validate_covariances` is set).
    pub fn validation_failures(&self) -> usize {
        self.validation_failures
    }

    fn note_validation(&mut self, state: &GaussianState) {
        if self.opts.validate_covariances && state.validate().is_err() {
            self.validation_failures += 1;
            debug_assert!(false, "covariance validation failed");
        }
    }

    /// Consume one measurement; returns the smoothed estimate that matured,
    /// if the window is warm.
    pub fn step(&mut self, measurement: f64) -> Result<Option<SmoothedEstimate>> {
        let (predicted, f, cross) = predict_full(&self.belief, &self.model, &self.noise)?;
        let mut corrected = correct(&predicted, measurement, &self.h, &self.noise)?;
        if let Some(floor) = self.opts.q_floor {
            let q_idx = corrected.mean.len() - 1;
            if corrected.mean[q_idx] < floor {
                corrected.mean[q_idx] = floor;
            }
        }
        self.note_validation(&predicted);
        self.note_validation(&corrected);
        let gain_from_prev = if self.window.is_empty() {
            None
        } else {
            Some(gain_from_cross(&cross, &predicted.cov, &mut self.regularized)?)
        };
        self.window.push_back(StepRecord {
            step: self.steps_in,
            predicted,
            corrected: corrected.clone(),
            arriving_jacobian: f,
            gain_from_prev,
        });
        self.belief = corrected;
        self.steps_in += 1;

        if self.window.len() < self.opts.lag + 1 {
            return Ok(None);
        }

        // Backward sweep from the newest record to the oldest.
        let tail = self.window.back().unwrap();
        let mut mean = tail.corrected.mean.clone();
        let mut cov = self.opts.smooth_covariances.then(|| tail.corrected.cov.clone());
        for k in (0..self.window.len() - 1).rev() {
            let next = &self.window[k + 1];
            let gain = next
                .gain_from_prev
                .as_ref()
                .expect("every non-first record carries its gain");
            let anchor_mean = match self.opts.anchor {
                RtsAnchor::Predicted => &next.predicted.mean,
                RtsAnchor::Corrected => &next.corrected.mean,
            };
            mean = &self.window[k].corrected.mean + gain * (&mean - anchor_mean);
            if let Some(c) = cov {
                let innov = &c - &next.predicted.cov;
                let mut smoothed = &self.window[k].corrected.cov + gain * innov * gain.transpose();
                let t = smoothed.transpose();
                smoothed += t;
                smoothed *= 0.5;
                cov = Some(smoothed);
            }
        }
        if let Some(ref c) = cov {
            let probe = GaussianState::new(mean.clone(), c.clone())?;
            self.note_validation(&probe);
        }
        let head = self.window.pop_front().expect("window is warm");
        if let Some(floor) = self.opts.q_floor {
            let q_idx = mean.len() - 1;
            if mean[q_idx] < floor {
                mean[q_idx] = floor;
            }
        }
        let q = mean[mean.len() - 1];
        if !q.is_finite() {
            return Err(Error::NonFinite("smoothed flux estimate is not finite".into()));
        }
        Ok(Some(SmoothedEstimate {
            step: head.step,
            mean,
            cov,
            q,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimal linear model for exercising the recursion.
    struct LinearModel {
        a: DMatrix<f64>,
        h: RowDVector<f64>,
    }

    impl TransferModel for LinearModel {
        fn dim(&self) -> usize {
            self.a.nrows()
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

    fn scalar_model() -> LinearModel {
        LinearModel {
            a: DMatrix::identity(1, 1),
            h: RowDVector::from_vec(vec![1.0]),
        }
    }

    #[test]
    fn identity_predict_without_noise_keeps_belief() {
        let model = scalar_model();
        let noise = NoiseModel::diagonal(&[0.0], 1.0).unwrap();
        let belief = GaussianState::diagonal(DVector::from_vec(vec![3.0]), &[2.0]).unwrap();
        let (pred, f) = predict(&belief, &model, &noise).unwrap();
        assert_eq!(pred.mean[0], 3.0);
        assert_eq!(pred.cov[(0, 0)], 2.0);
        assert_eq!(f[(0, 0)], 1.0);
    }

    #[test]
    fn scalar_predict_adds_process_noise() {
        let model = scalar_model();
        let noise = NoiseModel::diagonal(&[0.5], 1.0).unwrap();
        let belief = GaussianState::diagonal(DVector::from_vec(vec![0.0]), &[1.0]).unwrap();
        let (pred, _) = predict(&belief, &model, &noise).unwrap();
        assert_eq!(pred.cov[(0, 0)], 1.5);
    }

    #[test]
    fn scalar_correct_gain_and_covariance() {
        let noise = NoiseModel::diagonal(&[0.0], 1.0).unwrap();
        let predicted = GaussianState::diagonal(DVector::from_vec(vec![0.0]), &[1.0]).unwrap();
        let h = RowDVector::from_vec(vec![1.0]);
        let corrected = correct(&predicted, 1.0, &h, &noise).unwrap();
        // K = 1/(1+1) = 0.5 → mean 0.5, covariance 0.5.
        assert!((corrected.mean[0] - 0.5).abs() < 1e-15);
        assert!((corrected.cov[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn huge_measurement_variance_ignores_the_measurement() {
        let noise = NoiseModel::diagonal(&[0.0], 1e12).unwrap();
        let predicted =
            GaussianState::diagonal(DVector::from_vec(vec![10.0, -3.0]), &[1.0, 4.0]).unwrap();
        let h = RowDVector::from_vec(vec![1.0, 0.0]);
        let corrected = correct(&predicted, 500.0, &h, &noise).unwrap();
        for i in 0..2 {
            let rel = (corrected.mean[i] - predicted.mean[i]).abs()
                / predicted.mean[i].abs().max(1.0);
            assert!(rel < 1e-6, "component {i} moved by {rel}");
        }
    }

    #[test]
    fn zero_innovation_keeps_the_mean() {
        let noise = NoiseModel::diagonal(&[0.0, 0.0], 2.0).unwrap();
        let predicted =
            GaussianState::diagonal(DVector::from_vec(vec![7.0, 1.0]), &[1.0, 1.0]).unwrap();
        let h = RowDVector::from_vec(vec![1.0, 0.0]);
        let corrected = correct(&predicted, 7.0, &h, &noise).unwrap();
        assert_eq!(corrected.mean, predicted.mean);
    }

    #[test]
    fn zero_lag_smoother_equals_filter_exactly() {
        let model = LinearModel {
            a: DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]),
            h: RowDVector::from_vec(vec![1.0, 0.0]),
        };
        let noise = NoiseModel::diagonal(&[0.01, 0.01], 0.5).unwrap();
        let initial =
            GaussianState::diagonal(DVector::from_vec(vec![0.0, 0.0]), &[1.0, 1.0]).unwrap();
        let measurements = [0.1, 0.25, 0.31, 0.5, 0.66, 0.71];

        let records = run_filter(&model, &noise, &initial, &measurements).unwrap();
        let mut smoother = FixedLagSmoother::new(
            LinearModel {
                a: model.a.clone(),
                h: model.h.clone(),
            },
            noise,
            initial,
            SmootherOptions::with_lag(0),
        )
        .unwrap();
        for (k, &y) in measurements.iter().enumerate() {
            let est = smoother.step(y).unwrap().expect("lag 0 emits immediately");
            assert_eq!(est.step, k);
            // Bit-exact: the backward pass over a single record is empty.
            assert_eq!(est.mean, records[k].corrected.mean);
            assert_eq!(est.cov.as_ref().unwrap(), &records[k].corrected.cov);
        }
    }

    #[test]
    fn smoother_latency_is_exactly_the_lag() {
        let model = scalar_model();
        let noise = NoiseModel::diagonal(&[0.1], 1.0).unwrap();
        let initial = GaussianState::diagonal(DVector::from_vec(vec![0.0]), &[1.0]).unwrap();
        let lag = 3;
        let mut smoother =
            FixedLagSmoother::new(model, noise, initial, SmootherOptions::with_lag(lag)).unwrap();
        let mut emitted = Vec::new();
        for k in 0..10 {
            if let Some(est) = smoother.step(k as f64 * 0.1).unwrap() {
                emitted.push((k, est.step));
            }
        }
        // First emission when measurement `lag` arrives, referring to step 0.
        assert_eq!(emitted.first().unwrap(), &(lag, 0));
        for (arrived, refers_to) in emitted {
            assert_eq!(arrived - refers_to, lag);
        }
    }

    #[test]
    fn short_stream_reports_warmup_shortfall() {
        let model = scalar_model();
        let noise = NoiseModel::diagonal(&[0.1], 1.0).unwrap();
        let initial = GaussianState::diagonal(DVector::from_vec(vec![0.0]), &[1.0]).unwrap();
        let mut smoother =
            FixedLagSmoother::new(model, noise, initial, SmootherOptions::with_lag(5)).unwrap();
        assert!(smoother.step(0.1).unwrap().is_none());
        assert!(smoother.step(0.2).unwrap().is_none());
        assert_eq!(smoother.warmup_shortfall(), 4);
    }

    #[test]
    fn covariance_checks_catch_bad_matrices() {
        let mean = DVector::from_vec(vec![0.0, 0.0]);
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 1.0]);
        let state = GaussianState::new(mean.clone(), asym).unwrap();
        assert!(state.validate().is_err());
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let state = GaussianState::new(mean, indefinite).unwrap();
        assert!(state.validate().is_err());
    }

    #[test]
    fn noise_model_rejects_bad_inputs() {
        assert!(NoiseModel::diagonal(&[1.0], 0.0).is_err());
        assert!(NoiseModel::diagonal(&[-1.0], 1.0).is_err());
    }
}
