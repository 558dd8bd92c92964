//! Forward solver vs an independent dense solve of the full implicit system.

mod common;

use common::DenseImplicitOracle;
use fluxeks::physics::{
    advance_step, bulk_outlet_rise, run_transient, CellIndex, Mesh, PhysicalParams,
    TemperatureField,
};
use fluxeks::signals::{render_segment, FluxSegment};

fn max_rel_diff(a: &TemperatureField, b: &TemperatureField) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
        .fold(0.0, f64::max)
}

#[test]
fn twenty_chained_steps_match_dense_solve() {
    let params = PhysicalParams::default();
    let mesh = Mesh::for_domain(5, 8, 0.01, &params).unwrap();
    let oracle = DenseImplicitOracle::new(&mesh, &params);

    // A flux history that exercises ramps, jumps, and zero.
    let q_of = |k: usize| match k {
        0..=4 => 2500.0,
        5..=9 => 150.0 * k as f64,
        10..=14 => 0.0,
        _ => 4200.0,
    };

    let mut marched = TemperatureField::uniform(&mesh, params.t_in);
    let mut dense = marched.clone();
    for k in 0..20 {
        let q = q_of(k);
        marched = advance_step(&marched, q, &mesh, &params).unwrap();
        dense = oracle.step(&dense, q);
        let diff = max_rel_diff(&dense, &marched);
        assert!(diff < 1e-10, "step {k}: relative difference {diff}");
    }
}

#[test]
fn single_heated_step_matches_dense_solve_on_default_mesh() {
    let params = PhysicalParams::default();
    let mesh = Mesh::default();
    let oracle = DenseImplicitOracle::new(&mesh, &params);
    let start = TemperatureField::uniform(&mesh, params.t_in);
    let marched = advance_step(&start, 2500.0, &mesh, &params).unwrap();
    let dense = oracle.step(&start, 2500.0);
    assert!(max_rel_diff(&dense, &marched) < 1e-10);

    // The top-row rise stays below the adiabatic loading bound, and the
    // dense solve agrees on which row dominates.
    let bound = 2500.0 * mesh.dt / (params.rho * params.c_p * mesh.dy);
    for i in 0..mesh.nx {
        let rise = marched.get(i, mesh.ny - 1) - params.t_in;
        assert!(rise > 0.0 && rise <= bound + 1e-9);
        assert!(rise > marched.get(i, mesh.ny - 2) - params.t_in);
    }
}

#[test]
fn steady_state_satisfies_global_energy_balance() {
    let params = PhysicalParams::default();
    let mesh = Mesh::default();
    let q = 2500.0;
    // Expected bulk outlet rise q·L/(ρ c_p u_m h) ≈ 584.3 K.
    let expected = params.steady_bulk_rise(q);
    assert!((expected - 584.3).abs() < 0.5, "analytic value {expected}");

    let signal = render_segment(&FluxSegment::step(900.0, q), mesh.dt).unwrap();
    let run = run_transient(&signal, &mesh, &params, &[]).unwrap();
    let rise = bulk_outlet_rise(&run.final_field, &mesh, &params);
    let rel = (rise - expected).abs() / expected;
    assert!(rel < 0.02, "bulk rise {rise} vs {expected} (rel {rel})");
}

#[test]
fn maximum_principle_on_dense_oracle_mesh() {
    // Monotone series at the top-right probe under constant flux, checked on
    // the small mesh where the dense oracle is cheap to cross-check.
    let params = PhysicalParams::default();
    let mesh = Mesh::for_domain(5, 8, 0.01, &params).unwrap();
    let oracle = DenseImplicitOracle::new(&mesh, &params);
    let mut field = TemperatureField::uniform(&mesh, params.t_in);
    let probe = CellIndex::new(4, 7);
    let mut last = params.t_in;
    for _ in 0..200 {
        field = oracle.step(&field, 2500.0);
        let t = field.get(probe.i, probe.j);
        assert!(t >= last - 1e-12, "series must be nondecreasing");
        for v in field.as_slice() {
            assert!(*v >= params.t_in - 1e-9);
        }
        last = t;
    }
}
