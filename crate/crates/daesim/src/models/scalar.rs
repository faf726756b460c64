//! Scalar linear test DAE with a closed-form solution:
//!
//! ```text
//! x' = a x + b y
//!  0 = y - c x
//! ```
//!
//! so `x(t) = x0 exp((a + b c) t)` and `y = c x`.

use nalgebra::{dmatrix, dvector, DMatrix, DVector};

use crate::dae::{DaeSystem, Event, SystemState};
use crate::error::{Result, SolverError};

#[derive(Debug, Clone)]
pub struct ScalarLinearDae {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ScalarLinearDae {
    /// Growth rate of the reduced ODE.
    pub fn rate(&self) -> f64 {
        self.a + self.b * self.c
    }

    /// Analytic state at time `t` for initial value `x0` at `t = 0`.
    pub fn exact_x(&self, x0: f64, t: f64) -> f64 {
        x0 * (self.rate() * t).exp()
    }

    pub fn exact_y(&self, x0: f64, t: f64) -> f64 {
        self.c * self.exact_x(x0, t)
    }
}

impl DaeSystem for ScalarLinearDae {
    fn n_states(&self) -> usize {
        1
    }

    fn n_algebraic(&self) -> usize {
        1
    }

    fn f(&self, _t: f64, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        dvector![self.a * x[0] + self.b * y[0]]
    }

    fn g(&self, _t: f64, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        dvector![y[0] - self.c * x[0]]
    }

    fn jac_fx(&self, _t: f64, _x: &DVector<f64>, _y: &DVector<f64>) -> DMatrix<f64> {
        dmatrix![self.a]
    }

    fn jac_fy(&self, _t: f64, _x: &DVector<f64>, _y: &DVector<f64>) -> DMatrix<f64> {
        dmatrix![self.b]
    }

    fn jac_gx(&self, _t: f64, _x: &DVector<f64>, _y: &DVector<f64>) -> DMatrix<f64> {
        dmatrix![-self.c]
    }

    fn jac_gy(&self, _t: f64, _x: &DVector<f64>, _y: &DVector<f64>) -> DMatrix<f64> {
        dmatrix![1.0]
    }

    fn events(&self) -> &[Event] {
        &[]
    }

    fn state_names(&self) -> Vec<String> {
        vec!["x".into()]
    }

    fn algebraic_names(&self) -> Vec<String> {
        vec!["y".into()]
    }
}

/// Builds the model with a consistent initial state at `t = 0`.
pub fn build_scalar_linear(
    a: f64,
    b: f64,
    c: f64,
    x0: f64,
) -> Result<(ScalarLinearDae, SystemState)> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && x0.is_finite()) {
        return Err(SolverError::InitializationFailure(
            "scalar model parameters must be finite".into(),
        ));
    }
    let sys = ScalarLinearDae { a, b, c };
    let state = SystemState {
        t: 0.0,
        x: dvector![x0],
        y: dvector![c * x0],
        h_last: None,
    };
    Ok((sys, state))
}
