//! Time-varying heat-flux waveforms.
//!
//! Training and testing corpora are built from short segments of a few
//! waveform families (step, triangular, sinusoidal, parabolic, and a spline
//! "smooth" kind used only for testing). A [`SignalManifest`] records the
//! exact composition so every corpus is reproducible from a small JSON
//! document.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;

use crate::error::{Error, Result};

/// Waveform family of one segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Step,
    Triangular,
    Sinusoidal,
    Parabolic,
    Smooth,
}

impl SegmentKind {
    pub const ALL: [SegmentKind; 5] = [
        SegmentKind::Step,
        SegmentKind::Triangular,
        SegmentKind::Sinusoidal,
        SegmentKind::Parabolic,
        SegmentKind::Smooth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SegmentKind::Step => "step",
            SegmentKind::Triangular => "triangular",
            SegmentKind::Sinusoidal => "sinusoidal",
            SegmentKind::Parabolic => "parabolic",
            SegmentKind::Smooth => "smooth",
        }
    }

    pub fn parse(s: &str) -> Result<SegmentKind> {
        match s {
            "step" => Ok(SegmentKind::Step),
            "triangular" | "tri" => Ok(SegmentKind::Triangular),
            "sinusoidal" | "sin" => Ok(SegmentKind::Sinusoidal),
            "parabolic" | "para" => Ok(SegmentKind::Parabolic),
            "smooth" => Ok(SegmentKind::Smooth),
            other => Err(Error::Parse(format!("unknown waveform family '{other}'"))),
        }
    }
}

impl fmt::Display for SegmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One piece of a flux waveform.
///
/// `frequency` matters only for the periodic kinds; `control_points` only
/// for [`SegmentKind::Smooth`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxSegment {
    pub kind: SegmentKind,
    /// Segment length in seconds.
    pub duration: f64,
    /// Peak-to-offset magnitude in W/m².
    pub amplitude: f64,
    /// Constant baseline in W/m².
    #[serde(default)]
    pub offset: f64,
    /// Hz, for triangular and sinusoidal segments.
    #[serde(default)]
    pub frequency: f64,
    /// (time s, flux W/m²) knots for the smooth kind, strictly increasing in time.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub control_points: Vec<(f64, f64)>,
}

impl FluxSegment {
    pub fn step(duration: f64, amplitude: f64) -> Self {
        FluxSegment {
            kind: SegmentKind::Step,
            duration,
            amplitude,
            offset: 0.0,
            frequency: 0.0,
            control_points: Vec::new(),
        }
    }

    pub fn triangular(duration: f64, amplitude: f64, frequency: f64) -> Self {
        FluxSegment {
            kind: SegmentKind::Triangular,
            duration,
            amplitude,
            offset: 0.0,
            frequency,
            control_points: Vec::new(),
        }
    }

    pub fn sinusoidal(duration: f64, amplitude: f64, offset: f64, frequency: f64) -> Self {
        FluxSegment {
            kind: SegmentKind::Sinusoidal,
            duration,
            amplitude,
            offset,
            frequency,
            control_points: Vec::new(),
        }
    }

    pub fn parabolic(duration: f64, amplitude: f64) -> Self {
        FluxSegment {
            kind: SegmentKind::Parabolic,
            duration,
            amplitude,
            offset: 0.0,
            frequency: 0.0,
            control_points: Vec::new(),
        }
    }

    pub fn smooth(duration: f64, control_points: Vec<(f64, f64)>) -> Self {
        FluxSegment {
            kind: SegmentKind::Smooth,
            duration,
            amplitude: 0.0,
            offset: 0.0,
            frequency: 0.0,
            control_points,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(Error::Domain(format!(
                "segment duration must be positive, got {}",
                self.duration
            )));
        }
        match self.kind {
            SegmentKind::Triangular | SegmentKind::Sinusoidal => {
                if !(self.frequency > 0.0) {
                    return Err(Error::Domain(format!(
                        "{} segment needs a positive frequency",
                        self.kind
                    )));
                }
            }
            SegmentKind::Smooth => {
                if self.control_points.len() < 2 {
                    return Err(Error::Domain(
                        "smooth segment needs at least two control points".into(),
                    ));
                }
                for w in self.control_points.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(Error::Domain(
                            "smooth control points must be strictly increasing in time".into(),
                        ));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Continuous-time value of the segment at local time `t` in `[0, duration]`.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        self.validate()?;
        Ok(match self.kind {
            SegmentKind::Step => self.offset + self.amplitude,
            SegmentKind::Triangular => {
                let period = 1.0 / self.frequency;
                let phase = (t / period).rem_euclid(1.0);
                self.offset + self.amplitude * triangle_unit(phase)
            }
            SegmentKind::Sinusoidal => {
                self.offset + self.amplitude * (TAU * self.frequency * t).sin()
            }
            SegmentKind::Parabolic => {
                let s = t / self.duration;
                self.offset + 4.0 * self.amplitude * s * (1.0 - s)
            }
            SegmentKind::Smooth => {
                let spline = CubicSpline::natural(&self.control_points)?;
                spline.eval(t)
            }
        })
    }
}

/// Unit triangle wave: 0 at phase 0, 1 at phase ½, back to 0 at phase 1.
fn triangle_unit(phase: f64) -> f64 {
    if phase < 0.5 {
        2.0 * phase
    } else {
        2.0 * (1.0 - phase)
    }
}

/// A flux history sampled on a uniform grid: `samples[k]` drives the step
/// from `k·dt` to `(k+1)·dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxSignal {
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl FluxSignal {
    pub fn new(dt: f64, samples: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Domain(format!("signal dt must be positive, got {dt}")));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("flux signal contains a non-finite sample".into()));
        }
        Ok(FluxSignal { dt, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }

    /// Keep only the first `n` samples.
    pub fn truncated(&self, n: usize) -> FluxSignal {
        FluxSignal {
            dt: self.dt,
            samples: self.samples[..n.min(self.samples.len())].to_vec(),
        }
    }

    /// Serialize as `t,q` CSV rows (header included).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,q\n");
        for (k, q) in self.samples.iter().enumerate() {
            out.push_str(&format!("{},{}\n", k as f64 * self.dt, q));
        }
        out
    }

    /// Parse a `t,q` CSV document; dt is inferred from the first two rows.
    pub fn from_csv(text: &str) -> Result<FluxSignal> {
        let mut times = Vec::new();
        let mut samples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with(|c: char| c.is_alphabetic())) {
                continue;
            }
            let mut parts = line.split(',');
            let (t, q) = match (parts.next(), parts.next()) {
                (Some(t), Some(q)) => (t, q),
                _ => {
                    return Err(Error::Parse(format!(
                        "signal CSV line {} has fewer than 2 fields",
                        lineno + 1
                    )))
                }
            };
            let t: f64 = t
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad time on line {}", lineno + 1)))?;
            let q: f64 = q
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad flux on line {}", lineno + 1)))?;
            times.push(t);
            samples.push(q);
        }
        if times.len() < 2 {
            return Err(Error::Parse(
                "signal CSV needs at least two rows to infer dt".into(),
            ));
        }
        let dt = times[1] - times[0];
        if !(dt > 0.0) {
            return Err(Error::Parse("signal CSV times must be strictly increasing".into()));
        }
        for w in times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 {
                return Err(Error::Parse("signal CSV rows are not uniformly spaced".into()));
            }
        }
        FluxSignal::new(dt, samples)
    }
}

/// Sample one segment on a uniform grid of spacing `dt`.
///
/// Periodic kinds whose period is an integer number of samples are rendered
/// in index space, which makes `sample[k] == sample[k + period/dt]` exact.
pub fn render_segment(seg: &FluxSegment, dt: f64) -> Result<FluxSignal> {
    seg.validate()?;
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    let n = (seg.duration / dt).round() as usize;
    if n == 0 {
        return Err(Error::Domain(format!(
            "segment duration {} is shorter than half a sample at dt {}",
            seg.duration, dt
        )));
    }

    let samples = match seg.kind {
        SegmentKind::Step => vec![seg.offset + seg.amplitude; n],
        SegmentKind::Triangular | SegmentKind::Sinusoidal => {
            let period_steps = 1.0 / (seg.frequency * dt);
            let aligned = (period_steps - period_steps.round()).abs() < 1e-9
                && period_steps.round() >= 1.0;
            (0..n)
                .map(|k| {
                    let phase = if aligned {
                        let p = period_steps.round() as usize;
                        (k % p) as f64 / p as f64
                    } else {
                        (seg.frequency * k as f64 * dt).rem_euclid(1.0)
                    };
                    match seg.kind {
                        SegmentKind::Triangular => seg.offset + seg.amplitude * triangle_unit(phase),
                        _ => seg.offset + seg.amplitude * (TAU * phase).sin(),
                    }
                })
                .collect()
        }
        SegmentKind::Parabolic => (0..n)
            .map(|k| {
                let s = k as f64 * dt / seg.duration;
                seg.offset + 4.0 * seg.amplitude * s * (1.0 - s)
            })
            .collect(),
        SegmentKind::Smooth => {
            let spline = CubicSpline::natural(&seg.control_points)?;
            (0..n).map(|k| spline.eval(k as f64 * dt)).collect()
        }
    };
    FluxSignal::new(dt, samples)
}

/// Concatenate signals sample-wise. All inputs must share the same dt.
pub fn concat(signals: &[FluxSignal]) -> Result<FluxSignal> {
    let first = signals
        .first()
        .ok_or_else(|| Error::Domain("concat needs at least one signal".into()))?;
    let mut samples = Vec::with_capacity(signals.iter().map(|s| s.len()).sum());
    for s in signals {
        if s.dt != first.dt {
            return Err(Error::Dimension(format!(
                "concat dt mismatch: {} vs {}",
                s.dt, first.dt
            )));
        }
        samples.extend_from_slice(&s.samples);
    }
    FluxSignal::new(first.dt, samples)
}

/// A reproducible recipe for a composite signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalManifest {
    /// Sample spacing the durations were designed for.
    pub dt: f64,
    pub segments: Vec<FluxSegment>,
}

impl SignalManifest {
    /// Render every segment at `dt` and concatenate.
    pub fn render(&self, dt: f64) -> Result<FluxSignal> {
        let rendered: Result<Vec<_>> = self.segments.iter().map(|s| render_segment(s, dt)).collect();
        concat(&rendered?)
    }

    /// Drop all segments of the given families.
    pub fn excluding(&self, families: &[SegmentKind]) -> SignalManifest {
        SignalManifest {
            dt: self.dt,
            segments: self
                .segments
                .iter()
                .filter(|s| !families.contains(&s.kind))
                .cloned()
                .collect(),
        }
    }

    /// Distinct (kind, amplitude, frequency) triples, for disjointness checks.
    pub fn triples(&self) -> Vec<(SegmentKind, f64, f64)> {
        let mut v: Vec<_> = self
            .segments
            .iter()
            .map(|s| (s.kind, s.amplitude, s.frequency))
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<SignalManifest> {
        Ok(serde_json::from_str(text)?)
    }

    /// Content hash of the manifest, recorded in model files so a model can
    /// detect being used against data from a different corpus.
    pub fn content_hash(&self) -> String {
        crate::hash::fnv1a_hex(&serde_json::to_string(self).expect("manifest serializes"))
    }
}

/// The default sample spacing: one step of the forward solver.
pub const DEFAULT_DT: f64 = 0.01;

/// Number of samples in the built-in training signal at [`DEFAULT_DT`].
pub const TRAINING_STEPS: usize = 6794;

/// Composition of the built-in training corpus.
///
/// Four families in equal shares (1699/1699/1698/1698 samples at dt = 0.01),
/// each family at three or more amplitudes spanning 0–5000 W/m² and, for the
/// periodic kinds, at least two frequencies. The testing corpus deliberately
/// shares no (kind, amplitude, frequency) triple with this one.
pub fn builtin_training_manifest() -> SignalManifest {
    let dt = DEFAULT_DT;
    SignalManifest {
        dt,
        segments: vec![
            // Family order matters: the step plateaus sit mid-corpus so the
            // networks see sustained holds on a pre-heated field, matching
            // where the testing signal exercises them. Plateaus are held at
            // least as long as any testing feature so sustained-heating
            // states are in-corpus rather than extrapolated.
            // Parabolic family: 1698 samples, one arc per segment.
            FluxSegment::parabolic(5.66, 2800.0),
            FluxSegment::parabolic(5.66, 5000.0),
            FluxSegment::parabolic(5.66, 1400.0),
            // Step family: 1699 samples.
            FluxSegment::step(5.66, 1200.0),
            FluxSegment::step(5.67, 5000.0),
            FluxSegment::step(5.66, 2400.0),
            // Triangular family: 1699 samples.
            FluxSegment::triangular(5.67, 3000.0, 0.25),
            FluxSegment::triangular(5.66, 4800.0, 0.5),
            FluxSegment::triangular(5.66, 1600.0, 1.0),
            // Sinusoidal family: 1698 samples. Offsets keep the flux nonnegative.
            FluxSegment::sinusoidal(5.66, 2200.0, 2200.0, 0.2),
            FluxSegment::sinusoidal(5.66, 1250.0, 1250.0, 0.4),
            FluxSegment::sinusoidal(5.66, 2500.0, 2500.0, 0.8),
        ],
    }
}

/// Composition of the built-in testing corpus: a smooth spline section, one
/// step section, and a triangular section, none of whose (kind, amplitude,
/// frequency) triples appear in the training manifest.
pub fn builtin_testing_manifest() -> SignalManifest {
    let dt = DEFAULT_DT;
    SignalManifest {
        dt,
        segments: vec![
            FluxSegment::smooth(
                25.0,
                vec![
                    (0.0, 600.0),
                    (3.0, 2900.0),
                    (6.5, 1400.0),
                    (10.0, 3800.0),
                    (14.0, 2100.0),
                    (18.0, 950.0),
                    (21.5, 2600.0),
                    (25.0, 1700.0),
                ],
            ),
            FluxSegment::step(5.0, 3600.0),
            FluxSegment::step(5.0, 1500.0),
            FluxSegment::triangular(25.0, 4200.0, 0.15),
        ],
    }
}

/// Render the built-in training signal (6794 samples at dt = 0.01).
pub fn builtin_training_signal(dt: f64) -> Result<FluxSignal> {
    builtin_training_manifest().render(dt)
}

/// Render the built-in testing signal (6000 samples at dt = 0.01).
pub fn builtin_testing_signal(dt: f64) -> Result<FluxSignal> {
    builtin_testing_manifest().render(dt)
}

/// Sample ranges occupied by each family in a rendered manifest, in order.
pub fn family_ranges(manifest: &SignalManifest, dt: f64) -> Result<Vec<(SegmentKind, std::ops::Range<usize>)>> {
    let mut out = Vec::new();
    let mut start = 0usize;
    for seg in &manifest.segments {
        let n = render_segment(seg, dt)?.len();
        match out.last_mut() {
            Some((kind, range)) if *kind == seg.kind => {
                let r: &mut std::ops::Range<usize> = range;
                r.end += n;
            }
            _ => out.push((seg.kind, start..start + n)),
        }
        start += n;
    }
    Ok(out)
}

/// Natural cubic spline through a set of strictly increasing knots.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(points: &[(f64, f64)]) -> Result<CubicSpline> {
        if points.len() < 2 {
            return Err(Error::Domain("spline needs at least two points".into()));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Domain("spline knots must be strictly increasing".into()));
            }
        }
        let n = points.len();
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas solve of the standard tridiagonal system for interior
            // second derivatives; natural ends pin m[0] = m[n-1] = 0.
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for idx in 0..k {
                let i = idx + 1;
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                diag[idx] = 2.0 * (h0 + h1);
                upper[idx] = h1;
                rhs[idx] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
            }
            // forward sweep (lower diagonal equals previous upper h0)
            for idx in 1..k {
                let i = idx + 1;
                let lower = xs[i] - xs[i - 1]; // h0 of row idx
                let w = lower / diag[idx - 1];
                diag[idx] -= w * upper[idx - 1];
                rhs[idx] -= w * rhs[idx - 1];
            }
            let mut sol = vec![0.0; k];
            sol[k - 1] = rhs[k - 1] / diag[k - 1];
            for idx in (0..k - 1).rev() {
                sol[idx] = (rhs[idx] - upper[idx] * sol[idx + 1]) / diag[idx];
            }
            m[1..=k].copy_from_slice(&sol);
        }
        Ok(CubicSpline { xs, ys, m })
    }

    /// Evaluate the spline; arguments outside the knot span are clamped.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(self.xs[0], *self.xs.last().unwrap());
        let mut i = match self.xs.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        };
        if t < self.xs[i] {
            i = i.saturating_sub(1);
        }
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - t) / h;
        let b = (t - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}
