//! Analytic Jacobians must agree with finite differences at randomly
//! perturbed consistent states of every built-in model.

use daesim::dae::{consistent_initialize, fd_jacobian, DaeSystem, SystemState};
use daesim::nonlinear::NewtonConfig;
use daesim::io::case::parse_case;
use daesim::models::multimachine::build_multimachine;
use daesim::models::scalar::build_scalar_linear;
use daesim::models::smib::{build_smib, SmibParams};
use nalgebra::DVector;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const THREE_MACHINE_CASE: &str = include_str!("../cases/three_machine.case");

fn max_mismatch(system: &dyn DaeSystem, t: f64, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let nx = system.n_states();
    let ny = system.n_algebraic();
    [
        (system.jac_fx(t, x, y), fd_jacobian(x, nx, |v| system.f(t, v, y))),
        (system.jac_fy(t, x, y), fd_jacobian(y, nx, |v| system.f(t, x, v))),
        (system.jac_gx(t, x, y), fd_jacobian(x, ny, |v| system.g(t, v, y))),
        (system.jac_gy(t, x, y), fd_jacobian(y, ny, |v| system.g(t, x, v))),
    ]
    .iter()
    .map(|(a, f)| (a - f).abs().max())
    .fold(0.0, f64::max)
}

/// Perturbs the differential state, re-solves the algebraic constraint and
/// checks all four Jacobians there.
fn check_model(system: &dyn DaeSystem, base: &SystemState, rng: &mut StdRng, tol: f64) {
    for trial in 0..20 {
        let mut x = base.x.clone();
        for v in x.iter_mut() {
            *v += rng.gen_range(-0.1..0.1);
        }
        let (st, _) =
            consistent_initialize(system, base.t, x.clone(), &base.y, &NewtonConfig::default())
                .expect("perturbed state should re-initialize");
        let worst = max_mismatch(system, base.t, &x, &st.y);
        assert!(
            worst < tol,
            "trial {trial}: analytic vs finite-difference mismatch {worst:.3e} >= {tol:.0e}"
        );
    }
}

#[test]
fn scalar_jacobians_match_finite_differences() {
    let mut rng = StdRng::seed_from_u64(7);
    let (model, state) = build_scalar_linear(-2.0, 1.0, 1.0, 1.0).unwrap();
    check_model(&model, &state, &mut rng, 1e-6);
}

#[test]
fn smib_jacobians_match_finite_differences() {
    let mut rng = StdRng::seed_from_u64(11);
    let (model, state) = build_smib(&SmibParams::default()).unwrap();
    check_model(&model, &state, &mut rng, 1e-5);
}

#[test]
fn multimachine_jacobians_match_finite_differences() {
    let mut rng = StdRng::seed_from_u64(13);
    let case = parse_case(THREE_MACHINE_CASE).unwrap();
    let (model, state) = build_multimachine(&case).unwrap();
    check_model(&model, &state, &mut rng, 1e-5);
}

/// The low-voltage constant-impedance fallback of the loads is a different
/// code path; force it by depressing the network voltages.
#[test]
fn smib_jacobians_match_during_depressed_voltage() {
    let (mut model, state) = build_smib(&SmibParams::default()).unwrap();
    let params = SmibParams::default();
    model
        .apply_event_action(&format!("fault_on 3 {}", params.fault_admittance))
        .unwrap();
    let (st, _) = consistent_initialize(
        &model,
        state.t,
        state.x.clone(),
        &state.y,
        &NewtonConfig::default(),
    )
    .unwrap();
    let worst = max_mismatch(&model, state.t, &state.x, &st.y);
    assert!(worst < 1e-5, "mismatch {worst:.3e} under fault");
}
