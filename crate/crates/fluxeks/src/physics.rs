//! Forward solver for the benchmark channel flow.
//!
//! The domain is a 2D rectangle (length × height) carrying fully developed
//! laminar air from left to right. Energy transport combines streamwise
//! advection with cross-stream conduction:
//!
//! ```text
//! ρ c_p ∂T/∂t + ρ c_p u(y) ∂T/∂x = k_c ∂²T/∂y²
//! ```
//!
//! The unknown heat flux `q(t)` enters through the top face; the bottom face
//! is adiabatic and the inlet is held at the inflow temperature. There is no
//! streamwise diffusion, so with first-order upwinding in x, central
//! differences in y, and backward-Euler time marching, each time step reduces
//! to one tridiagonal solve per column, marched from the inlet outward.
//!
//! Cells are centered: cell (i, j) sits at ((i+½)dx, (j+½)dy), stored flat at
//! `i·ny + j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::FluxSignal;

/// Material and flow constants of the benchmark case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Thermal conductivity, W/(m·K).
    pub k_c: f64,
    /// Density, kg/m³.
    pub rho: f64,
    /// Specific heat, J/(kg·K).
    pub c_p: f64,
    /// Channel length, m.
    pub length: f64,
    /// Channel height, m.
    pub height: f64,
    /// Mean inlet velocity, m/s.
    pub u_m: f64,
    /// Inlet temperature, K.
    pub t_in: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            k_c: 0.243,
            rho: 1.29,
            c_p: 1005.0,
            length: 1.0,
            height: 0.1,
            u_m: 0.033,
            t_in: 300.0,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("k_c", self.k_c),
            ("rho", self.rho),
            ("c_p", self.c_p),
            ("length", self.length),
            ("height", self.height),
            ("u_m", self.u_m),
            ("t_in", self.t_in),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!(
                    "physical parameter {name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Thermal diffusivity k_c/(ρ c_p), m²/s.
    pub fn diffusivity(&self) -> f64 {
        self.k_c / (self.rho * self.c_p)
    }

    /// Bulk outlet temperature rise under a steady flux `q` over the full
    /// length: q·L / (ρ c_p u_m h). Used as the global energy balance oracle.
    pub fn steady_bulk_rise(&self, q: f64) -> f64 {
        q * self.length / (self.rho * self.c_p * self.u_m * self.height)
    }
}

/// Uniform cell-centered mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    /// Time step, s.
    pub dt: f64,
}

impl Default for Mesh {
    fn default() -> Self {
        Mesh {
            nx: 25,
            ny: 50,
            dx: 0.04,
            dy: 0.002,
            dt: 0.01,
        }
    }
}

impl Mesh {
    /// Mesh covering the params' domain with the given cell counts.
    pub fn for_domain(nx: usize, ny: usize, dt: f64, params: &PhysicalParams) -> Result<Mesh> {
        if nx == 0 || ny == 0 {
            return Err(Error::Domain("mesh needs at least one cell per direction".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::Domain(format!("dt must be positive, got {dt}")));
        }
        Ok(Mesh {
            nx,
            ny,
            dx: params.length / nx as f64,
            dy: params.height / ny as f64,
            dt,
        })
    }

    pub fn validate(&self, params: &PhysicalParams) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::Domain("mesh needs at least one cell per direction".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Domain(format!("dt must be positive, got {}", self.dt)));
        }
        let lx = self.nx as f64 * self.dx;
        let ly = self.ny as f64 * self.dy;
        if (lx - params.length).abs() > 1e-9 * params.length
            || (ly - params.height).abs() > 1e-9 * params.height
        {
            return Err(Error::Domain(format!(
                "mesh covers {lx} x {ly} but the domain is {} x {}",
                params.length, params.height
            )));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    /// Center coordinates of cell (i, j).
    pub fn center(&self, cell: CellIndex) -> (f64, f64) {
        (
            (cell.i as f64 + 0.5) * self.dx,
            (cell.j as f64 + 0.5) * self.dy,
        )
    }
}

/// Zero-based cell address (column i along the flow, row j across it).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellIndex {
    pub i: usize,
    pub j: usize,
}

impl CellIndex {
    pub fn new(i: usize, j: usize) -> Self {
        CellIndex { i, j }
    }

    /// Flat storage index.
    pub fn flat(&self, mesh: &Mesh) -> usize {
        self.i * mesh.ny + self.j
    }
}

/// Discrete temperature state on a mesh, in Kelvin.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureField {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl TemperatureField {
    pub fn uniform(mesh: &Mesh, t: f64) -> TemperatureField {
        TemperatureField {
            nx: mesh.nx,
            ny: mesh.ny,
            values: vec![t; mesh.cell_count()],
        }
    }

    pub fn from_values(mesh: &Mesh, values: Vec<f64>) -> Result<TemperatureField> {
        if values.len() != mesh.cell_count() {
            return Err(Error::Dimension(format!(
                "field has {} values for a {}x{} mesh",
                values.len(),
                mesh.nx,
                mesh.ny
            )));
        }
        Ok(TemperatureField {
            nx: mesh.nx,
            ny: mesh.ny,
            values,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.values[i * self.ny + j] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn validate_finite(&self) -> Result<()> {
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("temperature field contains a non-finite value".into()));
        }
        Ok(())
    }

    /// CSV grid: header row of x centers, one row per j with the y center first.
    pub fn to_csv_grid(&self, mesh: &Mesh) -> String {
        let mut out = String::from("y\\x");
        for i in 0..self.nx {
            out.push_str(&format!(",{}", (i as f64 + 0.5) * mesh.dx));
        }
        out.push('\n');
        for j in 0..self.ny {
            out.push_str(&format!("{}", (j as f64 + 0.5) * mesh.dy));
            for i in 0..self.nx {
                out.push_str(&format!(",{}", self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }
}

/// Streamwise velocity of the fully developed profile at height `y`:
/// 6·u_m·(y/h)(1 − y/h).
pub fn velocity_at(params: &PhysicalParams, y: f64) -> Result<f64> {
    if !(0.0..=params.height).contains(&y) {
        return Err(Error::Domain(format!(
            "y = {y} outside the channel [0, {}]",
            params.height
        )));
    }
    let s = y / params.height;
    Ok(6.0 * params.u_m * s * (1.0 - s))
}

/// Nearest cell center to (x, y); exact ties resolve toward the lower index.
pub fn node_index(x: f64, y: f64, mesh: &Mesh) -> Result<CellIndex> {
    let lx = mesh.nx as f64 * mesh.dx;
    let ly = mesh.ny as f64 * mesh.dy;
    if !(0.0..=lx).contains(&x) || !(0.0..=ly).contains(&y) {
        return Err(Error::Domain(format!(
            "point ({x}, {y}) outside the domain [0, {lx}] x [0, {ly}]"
        )));
    }
    let pick = |coord: f64, d: f64, n: usize| -> usize {
        // Nearest center index is ceil(coord/d - 1); snap near-integer
        // arguments first so face-coordinate ties go to the lower cell.
        let mut t = coord / d - 1.0;
        if (t - t.round()).abs() < 1e-9 {
            t = t.round();
        }
        (t.ceil() as i64).clamp(0, n as i64 - 1) as usize
    };
    Ok(CellIndex::new(
        pick(x, mesh.dx, mesh.nx),
        pick(y, mesh.dy, mesh.ny),
    ))
}

/// Precomputed implicit step for a fixed mesh and parameter set.
///
/// The Thomas elimination coefficients depend only on the mesh, so they are
/// factored once here; each step then costs a single sweep per column.
#[derive(Debug, Clone)]
pub struct Stepper {
    mesh: Mesh,
    params: PhysicalParams,
    /// Courant number u_j·dt/dx per row.
    courant: Vec<f64>,
    /// Flux loading factor dt/(ρ c_p dy) for the top-row source term.
    flux_gain: f64,
    /// Precomputed reciprocal pivots of the Thomas forward sweep.
    inv_pivot: Vec<f64>,
    /// Precomputed normalized superdiagonal after elimination.
    upper_norm: Vec<f64>,
    /// Off-diagonal coefficient −r shared by all rows.
    off: f64,
}

impl Stepper {
    pub fn new(mesh: &Mesh, params: &PhysicalParams) -> Result<Stepper> {
        params.validate()?;
        mesh.validate(params)?;
        let r = params.diffusivity() * mesh.dt / (mesh.dy * mesh.dy);
        let mut courant = Vec::with_capacity(mesh.ny);
        for j in 0..mesh.ny {
            let y = (j as f64 + 0.5) * mesh.dy;
            courant.push(velocity_at(params, y)? * mesh.dt / mesh.dx);
        }
        // Row j couples to j−1 and j+1 with coefficient −r; boundary rows see
        // only one neighbor because the face fluxes there are prescribed.
        let diag: Vec<f64> = (0..mesh.ny)
            .map(|j| {
                let n_neighbors = if j == 0 || j == mesh.ny - 1 { 1.0 } else { 2.0 };
                1.0 + courant[j] + n_neighbors * r
            })
            .collect();
        for (j, &d) in diag.iter().enumerate() {
            let off_sum = if j == 0 || j == mesh.ny - 1 { r } else { 2.0 * r };
            if d <= off_sum {
                return Err(Error::Numerical(format!(
                    "implicit system is not diagonally dominant at row {j}"
                )));
            }
        }
        // Thomas forward elimination on the constant tridiagonal.
        let mut inv_pivot = vec![0.0; mesh.ny];
        let mut upper_norm = vec![0.0; mesh.ny];
        let off = -r;
        let mut pivot = diag[0];
        inv_pivot[0] = 1.0 / pivot;
        upper_norm[0] = off * inv_pivot[0];
        for j in 1..mesh.ny {
            pivot = diag[j] - off * upper_norm[j - 1];
            if pivot.abs() < 1e-300 {
                return Err(Error::Numerical(format!("tridiagonal pivot vanished at row {j}")));
            }
            inv_pivot[j] = 1.0 / pivot;
            if j < mesh.ny - 1 {
                upper_norm[j] = off * inv_pivot[j];
            }
        }
        Ok(Stepper {
            mesh: *mesh,
            params: *params,
            courant,
            flux_gain: mesh.dt / (params.rho * params.c_p * mesh.dy),
            inv_pivot,
            upper_norm,
            off,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    /// Advance `field` by one time step under wall flux `q`, in place.
    ///
    /// Columns are marched from the inlet: the upwind neighbor of column i is
    /// column i−1 at the new time level (the inlet ghost for i = 0), so each
    /// column closes into an independent tridiagonal solve in y.
    pub fn step_in_place(&self, field: &mut TemperatureField, q: f64) {
        let ny = self.mesh.ny;
        let nx = self.mesh.nx;
        let top_source = q * self.flux_gain;
        let values = field.as_mut_slice();
        let mut rhs = vec![0.0; ny];
        for i in 0..nx {
            let col = i * ny;
            for j in 0..ny {
                let upwind = if i == 0 {
                    self.params.t_in
                } else {
                    values[col - ny + j]
                };
                rhs[j] = values[col + j] + self.courant[j] * upwind;
            }
            rhs[ny - 1] += top_source;
            // Thomas sweep with the precomputed pivots.
            rhs[0] *= self.inv_pivot[0];
            for j in 1..ny {
                rhs[j] = (rhs[j] - self.off * rhs[j - 1]) * self.inv_pivot[j];
            }
            for j in (0..ny - 1).rev() {
                rhs[j] -= self.upper_norm[j] * rhs[j + 1];
            }
            values[col..col + ny].copy_from_slice(&rhs);
        }
    }
}

/// One implicit step: returns the field at t + dt under wall flux `q`.
pub fn advance_step(
    field: &TemperatureField,
    q: f64,
    mesh: &Mesh,
    params: &PhysicalParams,
) -> Result<TemperatureField> {
    if !q.is_finite() {
        return Err(Error::NonFinite(format!("heat flux {q} is not finite")));
    }
    field.validate_finite()?;
    if field.nx() != mesh.nx || field.ny() != mesh.ny {
        return Err(Error::Dimension(format!(
            "field is {}x{} but the mesh is {}x{}",
            field.nx(),
            field.ny(),
            mesh.nx,
            mesh.ny
        )));
    }
    let stepper = Stepper::new(mesh, params)?;
    let mut next = field.clone();
    stepper.step_in_place(&mut next, q);
    Ok(next)
}

/// Output of a transient run.
#[derive(Debug, Clone)]
pub struct TransientRun {
    /// `probe_series[p][k]` is probe p's temperature after step k+1.
    pub probe_series: Vec<Vec<f64>>,
    pub final_field: TemperatureField,
}

/// Drive the solver with a flux signal from a uniform inlet-temperature
/// start, recording each probe once per step.
pub fn run_transient(
    signal: &FluxSignal,
    mesh: &Mesh,
    params: &PhysicalParams,
    probes: &[CellIndex],
) -> Result<TransientRun> {
    let stepper = Stepper::new(mesh, params)?;
    if (signal.dt - mesh.dt).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "signal dt {} does not match mesh dt {}",
            signal.dt, mesh.dt
        )));
    }
    for p in probes {
        if p.i >= mesh.nx || p.j >= mesh.ny {
            return Err(Error::Domain(format!(
                "probe ({}, {}) outside the {}x{} mesh",
                p.i, p.j, mesh.nx, mesh.ny
            )));
        }
    }
    let mut field = TemperatureField::uniform(mesh, params.t_in);
    let mut probe_series = vec![Vec::with_capacity(signal.len()); probes.len()];
    for &q in &signal.samples {
        if !q.is_finite() {
            return Err(Error::NonFinite("flux signal contains a non-finite sample".into()));
        }
        stepper.step_in_place(&mut field, q);
        for (series, p) in probe_series.iter_mut().zip(probes) {
            series.push(field.get(p.i, p.j));
        }
    }
    field.validate_finite()?;
    Ok(TransientRun {
        probe_series,
        final_field: field,
    })
}

/// Full trajectory of a transient run: `n + 1` fields including the initial
/// uniform state. Fuel for surrogate dataset generation.
pub fn simulate_fields(
    signal: &FluxSignal,
    mesh: &Mesh,
    params: &PhysicalParams,
) -> Result<Vec<TemperatureField>> {
    let stepper = Stepper::new(mesh, params)?;
    if (signal.dt - mesh.dt).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "signal dt {} does not match mesh dt {}",
            signal.dt, mesh.dt
        )));
    }
    let mut fields = Vec::with_capacity(signal.len() + 1);
    let mut field = TemperatureField::uniform(mesh, params.t_in);
    fields.push(field.clone());
    for &q in &signal.samples {
        stepper.step_in_place(&mut field, q);
        fields.push(field.clone());
    }
    fields.last().unwrap().validate_finite()?;
    Ok(fields)
}

/// Probe series as CSV: `t,probe_0,probe_1,...` with one row per step.
pub fn probe_series_csv(run: &TransientRun, dt: f64) -> String {
    let mut out = String::from("t");
    for p in 0..run.probe_series.len() {
        out.push_str(&format!(",probe_{p}"));
    }
    out.push('\n');
    let steps = run.probe_series.first().map_or(0, |s| s.len());
    for k in 0..steps {
        out.push_str(&format!("{}", (k + 1) as f64 * dt));
        for series in &run.probe_series {
            out.push_str(&format!(",{}", series[k]));
        }
        out.push('\n');
    }
    out
}

/// Discrete bulk (velocity-weighted) temperature rise across the outlet
/// column relative to the inlet temperature.
pub fn bulk_outlet_rise(field: &TemperatureField, mesh: &Mesh, params: &PhysicalParams) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..mesh.ny {
        let y = (j as f64 + 0.5) * mesh.dy;
        let u = velocity_at(params, y).expect("cell centers are interior");
        num += u * (field.get(mesh.nx - 1, j) - params.t_in);
        den += u;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{render_segment, FluxSegment};

    #[test]
    fn velocity_profile_endpoints_and_midpoint() {
        let p = PhysicalParams::default();
        assert_eq!(velocity_at(&p, 0.0).unwrap(), 0.0);
        assert_eq!(velocity_at(&p, p.height).unwrap(), 0.0);
        let mid = velocity_at(&p, p.height / 2.0).unwrap();
        assert!((mid - 1.5 * p.u_m).abs() < 1e-15);
        assert!((mid - 0.0495).abs() < 1e-12);
        assert!(velocity_at(&p, -1e-9).is_err());
        assert!(velocity_at(&p, p.height + 1e-9).is_err());
    }

    #[test]
    fn default_mesh_matches_domain() {
        let p = PhysicalParams::default();
        let m = Mesh::default();
        m.validate(&p).unwrap();
        assert_eq!(m.nx, 25);
        assert_eq!(m.ny, 50);
        assert_eq!(m.cell_count(), 1250);
    }

    #[test]
    fn node_index_examples() {
        let m = Mesh::default();
        assert_eq!(node_index(0.820, 0.089, &m).unwrap(), CellIndex::new(20, 44));
        assert_eq!(node_index(0.820, 0.091, &m).unwrap(), CellIndex::new(20, 45));
        assert_eq!(node_index(0.0, 0.0, &m).unwrap(), CellIndex::new(0, 0));
        // Exact face coordinates tie toward the lower cell.
        assert_eq!(node_index(0.84, 0.089, &m).unwrap().i, 20);
        assert!(node_index(1.5, 0.05, &m).is_err());
        assert!(node_index(0.5, -0.01, &m).is_err());
    }

    #[test]
    fn adiabatic_steady_state_is_fixed_point() {
        let p = PhysicalParams::default();
        let m = Mesh::default();
        let field = TemperatureField::uniform(&m, p.t_in);
        let next = advance_step(&field, 0.0, &m, &p).unwrap();
        for (a, b) in next.as_slice().iter().zip(field.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn heated_step_obeys_top_cell_energy_bound() {
        let p = PhysicalParams::default();
        let m = Mesh::default();
        let q = 2500.0;
        let field = TemperatureField::uniform(&m, p.t_in);
        let next = advance_step(&field, q, &m, &p).unwrap();
        // The top-row rise is bounded by the adiabatic single-cell loading
        // q·dt/(ρ c_p dy); advective and diffusive losses only reduce it.
        let bound = q * m.dt / (p.rho * p.c_p * m.dy);
        let mut max_top = 0.0f64;
        let mut max_other = 0.0f64;
        for i in 0..m.nx {
            for j in 0..m.ny {
                let rise = next.get(i, j) - p.t_in;
                assert!(rise >= -1e-9, "minimum principle violated at ({i},{j})");
                if j == m.ny - 1 {
                    max_top = max_top.max(rise);
                } else {
                    max_other = max_other.max(rise);
                }
            }
        }
        assert!(max_top <= bound + 1e-9, "top rise {max_top} exceeds bound {bound}");
        // The implicit step spreads heat instantly but the heated row must
        // dominate everything below it.
        assert!(max_top > max_other);
        assert!(max_top > 1.0, "top row should warm noticeably, got {max_top}");
    }

    #[test]
    fn nonnegative_flux_never_cools_below_inlet() {
        let p = PhysicalParams::default();
        let m = Mesh::for_domain(6, 10, 0.01, &p).unwrap();
        let seg = FluxSegment::triangular(2.0, 3000.0, 0.5);
        let signal = render_segment(&seg, m.dt).unwrap();
        let run = run_transient(&signal, &m, &p, &[CellIndex::new(5, 9)]).unwrap();
        for j in 0..m.ny {
            for i in 0..m.nx {
                assert!(run.final_field.get(i, j) >= p.t_in - 1e-9);
            }
        }
        for t in &run.probe_series[0] {
            assert!(*t >= p.t_in - 1e-9);
        }
    }

    #[test]
    fn constant_flux_probe_series_is_monotone() {
        let p = PhysicalParams::default();
        let m = Mesh::for_domain(5, 8, 0.01, &p).unwrap();
        let signal = render_segment(&FluxSegment::step(3.0, 2500.0), m.dt).unwrap();
        let probe = CellIndex::new(m.nx - 1, m.ny - 1);
        let run = run_transient(&signal, &m, &p, &[probe]).unwrap();
        let series = &run.probe_series[0];
        assert_eq!(series.len(), signal.len());
        for w in series.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "series must be nondecreasing");
        }
    }

    #[test]
    fn zero_flux_probes_stay_at_inlet_temperature() {
        let p = PhysicalParams::default();
        let m = Mesh::default();
        let signal = render_segment(&FluxSegment::step(0.5, 0.0), m.dt).unwrap();
        let probe = node_index(0.820, 0.089, &m).unwrap();
        let run = run_transient(&signal, &m, &p, &[probe]).unwrap();
        for t in &run.probe_series[0] {
            assert!((t - p.t_in).abs() < 1e-12);
        }
    }

    #[test]
    fn transient_rejects_bad_probes_and_dt() {
        let p = PhysicalParams::default();
        let m = Mesh::default();
        let signal = render_segment(&FluxSegment::step(0.1, 100.0), m.dt).unwrap();
        assert!(run_transient(&signal, &m, &p, &[CellIndex::new(25, 0)]).is_err());
        let bad = FluxSignal::new(0.02, vec![1.0; 10]).unwrap();
        assert!(run_transient(&bad, &m, &p, &[]).is_err());
    }

    #[test]
    fn stepping_is_deterministic() {
        let p = PhysicalParams::default();
        let m = Mesh::default();
        let field = TemperatureField::uniform(&m, p.t_in);
        let a = advance_step(&field, 1234.5, &m, &p).unwrap();
        let b = advance_step(&field, 1234.5, &m, &p).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn rejects_non_finite_inputs() {
        let p = PhysicalParams::default();
        let m = Mesh::default();
        let field = TemperatureField::uniform(&m, p.t_in);
        assert!(advance_step(&field, f64::NAN, &m, &p).is_err());
        let mut bad = field.clone();
        bad.set(0, 0, f64::INFINITY);
        assert!(advance_step(&bad, 0.0, &m, &p).is_err());
    }
}
