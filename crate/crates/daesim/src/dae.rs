//! System abstraction for semi-explicit index-1 DAEs
//! `x' = f(t, x, y), 0 = g(t, x, y)`, plus state containers, events and
//! consistent initialization.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SolverError};
use crate::nonlinear::{solve_algebraic, NewtonConfig, NewtonReport};

/// A scheduled disturbance. The mutation itself lives in the system
/// implementation and is dispatched by label, so the integrator core stays
/// model-agnostic. Events mutate parameters/topology only, never `x`.
#[derive(Debug, Clone)]
pub struct Event {
    pub time: f64,
    pub label: String,
}

impl Event {
    pub fn new(time: f64, label: impl Into<String>) -> Self {
        Self {
            time,
            label: label.into(),
        }
    }
}

/// Semi-explicit index-1 DAE with dense Jacobian blocks.
///
/// The four partial-derivative blocks default to central finite differences
/// (perturbation `1e-7 * |value| + 1e-7`); built-in models
/// override them analytically.
pub trait DaeSystem {
    fn n_states(&self) -> usize;
    fn n_algebraic(&self) -> usize;

    /// Right-hand side of `x' = f(t, x, y)`.
    fn f(&self, t: f64, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64>;

    /// Algebraic residual `g(t, x, y)`.
    fn g(&self, t: f64, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64>;

    fn jac_fx(&self, t: f64, x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64> {
        fd_jacobian(x, self.n_states(), |xp| self.f(t, xp, y))
    }

    fn jac_fy(&self, t: f64, x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64> {
        fd_jacobian(y, self.n_states(), |yp| self.f(t, x, yp))
    }

    fn jac_gx(&self, t: f64, x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64> {
        fd_jacobian(x, self.n_algebraic(), |xp| self.g(t, xp, y))
    }

    fn jac_gy(&self, t: f64, x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64> {
        fd_jacobian(y, self.n_algebraic(), |yp| self.g(t, x, yp))
    }

    /// Scheduled disturbances, sorted by time.
    fn events(&self) -> &[Event] {
        &[]
    }

    /// Applies the parameter/topology mutation named by `label`.
    fn apply_event_action(&mut self, label: &str) -> Result<()> {
        Err(SolverError::Config(format!(
            "system does not handle event '{label}'"
        )))
    }

    /// Labels for the entries of `x`, used in CSV headers.
    fn state_names(&self) -> Vec<String> {
        (0..self.n_states()).map(|i| format!("x{i}")).collect()
    }

    /// Labels for the entries of `y`.
    fn algebraic_names(&self) -> Vec<String> {
        (0..self.n_algebraic()).map(|i| format!("y{i}")).collect()
    }
}

/// Central finite-difference Jacobian of `func` at `v`.
pub fn fd_jacobian<F>(v: &DVector<f64>, n_out: usize, mut func: F) -> DMatrix<f64>
where
    F: FnMut(&DVector<f64>) -> DVector<f64>,
{
    let n = v.len();
    let mut jac = DMatrix::zeros(n_out, n);
    let mut vp = v.clone();
    for j in 0..n {
        let dv = 1e-7 * v[j].abs() + 1e-7;
        vp[j] = v[j] + dv;
        let fp = func(&vp);
        vp[j] = v[j] - dv;
        let fm = func(&vp);
        vp[j] = v[j];
        for i in 0..n_out {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * dv);
        }
    }
    jac
}

/// The `(t, x, y)` triple carried between steps.
#[derive(Debug, Clone)]
pub struct SystemState {
    pub t: f64,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    /// Size of the most recent accepted step; `None` before the first step.
    pub h_last: Option<f64>,
}

impl SystemState {
    pub fn new(t: f64, x: DVector<f64>, y: DVector<f64>) -> Self {
        Self {
            t,
            x,
            y,
            h_last: None,
        }
    }
}

/// Solves `g(t0, x0, y) = 0` from `y_guess`, returning a consistent state.
///
/// `x0` is never modified.
pub fn consistent_initialize(
    system: &dyn DaeSystem,
    t0: f64,
    x0: DVector<f64>,
    y_guess: &DVector<f64>,
    cfg: &NewtonConfig,
) -> Result<(SystemState, NewtonReport)> {
    let (y, report) = solve_algebraic(system, t0, &x0, y_guess, cfg)?;
    Ok((SystemState::new(t0, x0, y), report))
}

/// Applies `event` at `state.t == event.time`: mutates the system, then
/// re-solves the algebraic equations with `x` held fixed.
///
/// The caller must reset any algebraic history afterwards; the post-event
/// `y` is generally discontinuous.
pub fn apply_event(
    system: &mut dyn DaeSystem,
    state: &SystemState,
    event: &Event,
    cfg: &NewtonConfig,
) -> Result<(SystemState, NewtonReport)> {
    system.apply_event_action(&event.label)?;
    let (y, report) = solve_algebraic(system, state.t, &state.x, &state.y, cfg)?;
    Ok((
        SystemState {
            t: state.t,
            x: state.x.clone(),
            y,
            h_last: state.h_last,
        },
        report,
    ))
}
