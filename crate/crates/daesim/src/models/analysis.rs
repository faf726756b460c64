//! Numerical verification of the corrector error relations on the affine
//! scalar DAE, where the mean-value-theorem step of the derivation is exact.
//!
//! Both routines use the backward-Euler corrector
//! `x_{n+1} = x_n + h f(t_{n+1}, x_{n+1}, y_est)` — the form the error
//! relation is derived for — not the production trapezoidal corrector.

use nalgebra::{dmatrix, dvector, DVector};

use crate::models::scalar::ScalarLinearDae;
use crate::nonlinear::{newton_fixed, newton_solve, NewtonConfig};

/// Converged backward-Euler corrector step from `x_n` with the algebraic
/// estimate held at `y_est`.
fn be_corrector(sys: &ScalarLinearDae, x_n: f64, y_est: f64, h: f64) -> f64 {
    let (x, _) = newton_solve(
        |x: &DVector<f64>| dvector![x[0] - x_n - h * (sys.a * x[0] + sys.b * y_est)],
        |_x: &DVector<f64>| dmatrix![1.0 - h * sys.a],
        &dvector![x_n],
        &NewtonConfig::default(),
    )
    .expect("affine corrector cannot diverge for 1 - h a != 0");
    x[0]
}

/// Propagation of an injected algebraic-estimate error through one converged
/// backward-Euler corrector step.
///
/// Returns `(observed e_x, predicted e_x)` where the prediction is
/// `h b / (1 - h a) * e_y` and the observation is the difference between the
/// corrector solution with the corrupted estimate and the corrector solution
/// with the exact `y(t_{n+1})`.
pub fn verify_corrector_error_formula(
    a: f64,
    b: f64,
    c: f64,
    h: f64,
    e_y_injected: f64,
) -> (f64, f64) {
    assert!(
        (1.0 - h * a).abs() > 1e-12,
        "corrector equation singular at 1 - h a = 0"
    );
    let sys = ScalarLinearDae { a, b, c };
    let x_n = 1.0;
    let y_exact_next = sys.exact_y(x_n, h);
    let x_clean = be_corrector(&sys, x_n, y_exact_next, h);
    let x_corrupted = be_corrector(&sys, x_n, y_exact_next + e_y_injected, h);
    let observed = x_corrupted - x_clean;
    let predicted = h * b / (1.0 - h * a) * e_y_injected;
    (observed, predicted)
}

/// Breakdown of the error after a single corrector iteration.
#[derive(Debug, Clone, Copy)]
pub struct SingleIterationReport {
    /// `x_1 - x_exact(t_{n+1})` after one Newton update of the
    /// backward-Euler corrector from the forward-Euler prediction.
    pub observed_e_x: f64,
    /// Component proportional to the injected estimate error.
    pub e_y_term: f64,
    /// Remainder: the method truncation term, `h * O(h)` for the
    /// first-order predictor.
    pub truncation_term: f64,
}

/// Runs exactly one Newton update of the backward-Euler corrector from the
/// forward-Euler prediction, with `y_est = y_exact(t_{n+1}) + e_y_injected`,
/// and splits the resulting state error into its estimate-error and
/// truncation components.
pub fn verify_single_iteration_error(
    a: f64,
    b: f64,
    c: f64,
    h: f64,
    e_y_injected: f64,
) -> SingleIterationReport {
    assert!((1.0 - h * a).abs() > 1e-12);
    let sys = ScalarLinearDae { a, b, c };
    let x_n = 1.0;
    let y_n = c * x_n;
    let x_pred = x_n + h * (a * x_n + b * y_n);
    let y_est = sys.exact_y(x_n, h) + e_y_injected;

    let one_update = |y_est: f64| -> f64 {
        let (x, _) = newton_fixed(
            |x: &DVector<f64>| dvector![x[0] - x_n - h * (sys.a * x[0] + sys.b * y_est)],
            |_x: &DVector<f64>| dmatrix![1.0 - h * sys.a],
            &dvector![x_pred],
            1,
        )
        .expect("affine update cannot fail");
        x[0]
    };

    let x_exact = sys.exact_x(x_n, h);
    let observed = one_update(y_est) - x_exact;
    let e_y_term = one_update(y_est) - one_update(y_est - e_y_injected);
    SingleIterationReport {
        observed_e_x: observed,
        e_y_term,
        truncation_term: observed - e_y_term,
    }
}
