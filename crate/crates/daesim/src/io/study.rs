//! Fixed-step convergence studies against the scalar model's analytic
//! solution.

use crate::error::{Result, SolverError};
use crate::integrate::{simulate_fixed, SchemeKind, SolverScheme};
use crate::models::scalar::ScalarLinearDae;

/// What the study measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyTarget {
    /// Global state error of a full scheme at `t_end`.
    Scheme(SchemeKind),
    /// Error of the hold-previous algebraic estimate on the final step,
    /// with the history fed exact samples.
    HoldEstimate,
    /// Error of the two-point extrapolated estimate, same setup.
    ExtrapolateEstimate,
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub hs: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of log(error) vs. log(h).
    pub slope: f64,
}

/// Least-squares slope of `ln(e)` against `ln(h)`.
pub fn fit_loglog_slope(hs: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.max(1e-300).ln()).collect();
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let den: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    num / den
}

fn estimator_error(model: &ScalarLinearDae, x0: f64, t_end: f64, h: f64, extrapolate: bool) -> f64 {
    use crate::estimate::AlgebraicHistory;
    use nalgebra::dvector;
    // Feed exact samples so the measurement isolates the estimator.
    let mut history = AlgebraicHistory::new(dvector![model.exact_y(x0, 0.0)]);
    let steps = (t_end / h).round().max(2.0) as usize;
    let mut est = dvector![0.0];
    for n in 0..steps {
        est = if extrapolate {
            history.estimate_extrapolate(h)
        } else {
            history.estimate_hold()
        };
        let t_next = (n + 1) as f64 * h;
        history.push_accepted(dvector![model.exact_y(x0, t_next)], h);
    }
    (est[0] - model.exact_y(x0, steps as f64 * h)).abs()
}

/// Runs the study over `hs` (strictly decreasing, at least 3 entries) on the
/// scalar linear model and fits the convergence order.
pub fn convergence_study(
    model: &ScalarLinearDae,
    x0: f64,
    t_end: f64,
    target: StudyTarget,
    hs: &[f64],
) -> Result<StudyResult> {
    if hs.len() < 3 {
        return Err(SolverError::Config(
            "convergence study needs at least 3 step sizes".into(),
        ));
    }
    if !hs.windows(2).all(|w| w[0] > w[1]) || hs.iter().any(|&h| h <= 0.0) {
        return Err(SolverError::Config(
            "step sizes must be positive and strictly decreasing".into(),
        ));
    }
    let mut errors = Vec::with_capacity(hs.len());
    for &h in hs {
        let err = match target {
            StudyTarget::Scheme(kind) => {
                let mut sys = model.clone();
                let state = crate::dae::SystemState::new(
                    0.0,
                    nalgebra::dvector![x0],
                    nalgebra::dvector![model.c * x0],
                );
                let scheme = SolverScheme::for_kind(kind);
                let out = simulate_fixed(&mut sys, state, &scheme, h, t_end).map_err(|e| {
                    SolverError::Config(format!("study run failed at h = {h}: {e}"))
                })?;
                (out.final_state.x[0] - model.exact_x(x0, t_end)).abs()
            }
            StudyTarget::HoldEstimate => estimator_error(model, x0, t_end, h, false),
            StudyTarget::ExtrapolateEstimate => estimator_error(model, x0, t_end, h, true),
        };
        errors.push(err);
    }
    let slope = fit_loglog_slope(hs, &errors);
    Ok(StudyResult {
        hs: hs.to_vec(),
        errors,
        slope,
    })
}
