//! Integration schemes and the simulation driver.
//!
//! Three interchangeable schemes are provided:
//!
//! * [`SchemeKind::SimultaneousItm`] — one Newton solve per step on the
//!   stacked trapezoidal + algebraic residual.
//! * [`SchemeKind::PartitionedHold`] — forward-Euler predictor, implicit
//!   trapezoidal corrector with `y_est = y_n`, post-solve consistency check
//!   on the successive algebraic difference.
//! * [`SchemeKind::PartitionedPredict`] — same predictor/corrector pair with
//!   the two-point algebraic extrapolation supplying `y_est`.

use nalgebra::{DMatrix, DVector};

use crate::control::{algebraic_consistency, AlgebraicCheck, PiController};
use crate::dae::{apply_event, DaeSystem, SystemState};
use crate::error::{Result, SolverError};
use crate::estimate::AlgebraicHistory;
use crate::metrics::{DivergenceReason, RunMetrics, StepRecord, Trajectory};
use crate::nonlinear::{newton_fixed, newton_solve, solve_algebraic, NewtonConfig, NewtonReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    SimultaneousItm,
    PartitionedHold,
    PartitionedPredict,
}

impl SchemeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeKind::SimultaneousItm => "itm",
            SchemeKind::PartitionedHold => "pc-hold",
            SchemeKind::PartitionedPredict => "pc-predict",
        }
    }
}

/// How the implicit-trapezoidal corrector is iterated.
#[derive(Debug, Clone)]
pub enum CorrectorMode {
    /// Newton iteration until the residual/update tolerances are met.
    ToConvergence(NewtonConfig),
    /// Exactly `k` Newton updates, no convergence guarantee.
    FixedIterations(usize),
}

/// A solution scheme plus its corrector and algebraic-solve settings.
#[derive(Debug, Clone)]
pub struct SolverScheme {
    pub kind: SchemeKind,
    pub corrector_mode: CorrectorMode,
    /// Newton settings for algebraic solves and the simultaneous scheme.
    pub newton: NewtonConfig,
    /// Consistency check on `||y_new - y_n||_inf`. On for the hold scheme by
    /// default, off for the prediction scheme.
    pub algebraic_check: Option<AlgebraicCheck>,
}

impl SolverScheme {
    pub fn simultaneous_itm() -> Self {
        Self {
            kind: SchemeKind::SimultaneousItm,
            corrector_mode: CorrectorMode::ToConvergence(NewtonConfig::default()),
            newton: NewtonConfig::default(),
            algebraic_check: None,
        }
    }

    pub fn partitioned_hold(check: AlgebraicCheck) -> Self {
        Self {
            kind: SchemeKind::PartitionedHold,
            corrector_mode: CorrectorMode::ToConvergence(NewtonConfig::default()),
            newton: NewtonConfig::default(),
            algebraic_check: Some(check),
        }
    }

    pub fn partitioned_predict() -> Self {
        Self {
            kind: SchemeKind::PartitionedPredict,
            corrector_mode: CorrectorMode::ToConvergence(NewtonConfig::default()),
            newton: NewtonConfig::default(),
            algebraic_check: None,
        }
    }

    pub fn for_kind(kind: SchemeKind) -> Self {
        match kind {
            SchemeKind::SimultaneousItm => Self::simultaneous_itm(),
            SchemeKind::PartitionedHold => Self::partitioned_hold(AlgebraicCheck::default()),
            SchemeKind::PartitionedPredict => Self::partitioned_predict(),
        }
    }
}

/// Outcome of one step attempt.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub x_pred: DVector<f64>,
    pub x_corr: DVector<f64>,
    /// Estimate used inside the corrector.
    pub y_est: DVector<f64>,
    /// Post-correction algebraic solve result.
    pub y_new: DVector<f64>,
    pub local_error: f64,
    /// Newton-solver invocations consumed by this attempt.
    pub nonlinear_calls: usize,
}

/// Forward-Euler predictor: `x_n + h * f_n`.
pub fn predict_fe(x_n: &DVector<f64>, f_n: &DVector<f64>, h: f64) -> DVector<f64> {
    x_n + h * f_n
}

/// Solves the implicit-trapezoidal corrector equation
/// `x = x_n + (h/2) (f_n + f(t_{n+1}, x, y_est))` with `y_est` held as a
/// parameter, starting from the predictor output `x_init`.
#[allow(clippy::too_many_arguments)]
pub fn correct_itm(
    system: &dyn DaeSystem,
    t_n: f64,
    x_n: &DVector<f64>,
    f_n: &DVector<f64>,
    y_est: &DVector<f64>,
    x_init: &DVector<f64>,
    h: f64,
    mode: &CorrectorMode,
) -> Result<(DVector<f64>, NewtonReport)> {
    let t1 = t_n + h;
    let m = x_n.len();
    let residual = |x: &DVector<f64>| -> DVector<f64> {
        x - x_n - (h / 2.0) * (f_n + system.f(t1, x, y_est))
    };
    let jacobian = |x: &DVector<f64>| -> DMatrix<f64> {
        DMatrix::identity(m, m) - (h / 2.0) * system.jac_fx(t1, x, y_est)
    };
    match mode {
        CorrectorMode::ToConvergence(cfg) => newton_solve(residual, jacobian, x_init, cfg),
        CorrectorMode::FixedIterations(k) => newton_fixed(residual, jacobian, x_init, *k),
    }
}

fn all_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn inf_norm_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Deepest cut applied when retrying after a consistency-check rejection.
const CHECK_RETRY_FAC_MIN: f64 = 0.02;

/// One attempt of a partitioned step at size `h`.
///
/// Returns the step outcome, the step size to use next (retry size on
/// rejection, proposal on acceptance) and the accept flag. Newton failures
/// surface as `Err`; the calls they consumed are already in `metrics`.
#[allow(clippy::too_many_arguments)]
pub fn step_partitioned(
    system: &dyn DaeSystem,
    state: &SystemState,
    h: f64,
    scheme: &SolverScheme,
    history: &AlgebraicHistory,
    controller: &mut PiController,
    metrics: &mut RunMetrics,
) -> Result<(StepResult, f64, bool)> {
    let t_n = state.t;
    let x_n = &state.x;
    let f_n = system.f(t_n, x_n, &state.y);
    let x_pred = predict_fe(x_n, &f_n, h);

    let mut y_est = match scheme.kind {
        SchemeKind::PartitionedPredict => history.estimate_extrapolate(h),
        _ => history.estimate_hold(),
    };

    let mut calls = 0usize;
    let mut x_corr;
    let mut y_new;
    let mut check_passed = true;
    let mut first_diff = 0.0f64;

    let max_recorrections = scheme
        .algebraic_check
        .as_ref()
        .map(|c| c.max_recorrections)
        .unwrap_or(0);
    let mut pass = 0usize;
    loop {
        calls += 1;
        metrics.nonlinear_calls += 1;
        let (xc, _) = correct_itm(
            system,
            t_n,
            x_n,
            &f_n,
            &y_est,
            &x_pred,
            h,
            &scheme.corrector_mode,
        )?;
        if !all_finite(&xc) {
            return Err(SolverError::NewtonDivergence {
                iterations: 0,
                final_residual: f64::INFINITY,
            });
        }
        x_corr = xc;

        calls += 1;
        metrics.nonlinear_calls += 1;
        let (yn, _) = solve_algebraic(system, t_n + h, &x_corr, &y_est, &scheme.newton)?;
        y_new = yn;

        // Consistency of successive algebraic values: compare against the
        // previously accepted y_n, which is also the first corrector
        // estimate of the hold scheme.
        match &scheme.algebraic_check {
            Some(check) if system.n_algebraic() > 0 => {
                let ok = algebraic_consistency(&y_new, &state.y, check);
                if pass == 0 {
                    first_diff = inf_norm_diff(&y_new, &state.y);
                }
                if ok {
                    check_passed = true;
                    break;
                }
                check_passed = false;
                if pass == max_recorrections {
                    break;
                }
                // Once the recorrection fixed point has been reached the
                // comparison can no longer change; fail fast.
                if inf_norm_diff(&y_new, &y_est) <= 0.05 * check.epsilon {
                    break;
                }
                // A recorrection perturbs y_new by O(h^2) of the current gap,
                // so a decisive violation cannot flip to a pass; only spend
                // further corrector passes on marginal failures.
                if inf_norm_diff(&y_new, &state.y) > 1.25 * check.epsilon {
                    break;
                }
                pass += 1;
                metrics.recorrections += 1;
                y_est = y_new.clone();
            }
            _ => break,
        }
    }

    let err = controller.scaled_error(&x_pred, &x_corr);
    let result = StepResult {
        x_pred,
        x_corr,
        y_est,
        y_new,
        local_error: err,
        nonlinear_calls: calls,
    };

    if !check_passed {
        // Consistency rejection: re-propose from the measured violation so
        // the retry lands near the step the threshold actually permits.
        controller.note_reject();
        let check = scheme.algebraic_check.as_ref().unwrap();
        let fac = (0.9 * check.epsilon / first_diff.max(1e-300)).clamp(CHECK_RETRY_FAC_MIN, 0.9);
        let h_next = (h * fac).max(controller.h_min);
        return Ok((result, h_next, false));
    }

    if PiController::accept_step(err) {
        let h_next = controller.propose_step(err, h);
        controller.note_accept(err);
        Ok((result, h_next, true))
    } else {
        controller.note_reject();
        let h_next = controller.reject_retry(err, h);
        Ok((result, h_next, false))
    }
}

/// One attempt of the simultaneous implicit-trapezoidal step: a single
/// Newton solve on the stacked residual with the 2x2 block Jacobian. The
/// local error is estimated against an embedded forward-Euler prediction.
pub fn step_simultaneous_itm(
    system: &dyn DaeSystem,
    state: &SystemState,
    h: f64,
    cfg: &NewtonConfig,
    controller: &mut PiController,
    metrics: &mut RunMetrics,
) -> Result<(StepResult, f64, bool)> {
    let m = system.n_states();
    let n = system.n_algebraic();
    let t_n = state.t;
    let t1 = t_n + h;
    let x_n = &state.x;
    let f_n = system.f(t_n, x_n, &state.y);
    let x_pred = predict_fe(x_n, &f_n, h);

    let split = |z: &DVector<f64>| -> (DVector<f64>, DVector<f64>) {
        (z.rows(0, m).into_owned(), z.rows(m, n).into_owned())
    };
    let residual = |z: &DVector<f64>| -> DVector<f64> {
        let (x, y) = split(z);
        let rx = &x - x_n - (h / 2.0) * (&f_n + system.f(t1, &x, &y));
        let ry = system.g(t1, &x, &y);
        let mut r = DVector::zeros(m + n);
        r.rows_mut(0, m).copy_from(&rx);
        r.rows_mut(m, n).copy_from(&ry);
        r
    };
    let jacobian = |z: &DVector<f64>| -> DMatrix<f64> {
        let (x, y) = split(z);
        let mut jac = DMatrix::zeros(m + n, m + n);
        let fx = system.jac_fx(t1, &x, &y);
        let fy = system.jac_fy(t1, &x, &y);
        let gx = system.jac_gx(t1, &x, &y);
        let gy = system.jac_gy(t1, &x, &y);
        jac.view_mut((0, 0), (m, m))
            .copy_from(&(DMatrix::identity(m, m) - (h / 2.0) * fx));
        jac.view_mut((0, m), (m, n)).copy_from(&(-(h / 2.0) * fy));
        jac.view_mut((m, 0), (n, m)).copy_from(&gx);
        jac.view_mut((m, m), (n, n)).copy_from(&gy);
        jac
    };

    let mut z0 = DVector::zeros(m + n);
    z0.rows_mut(0, m).copy_from(&x_pred);
    z0.rows_mut(m, n).copy_from(&state.y);

    metrics.nonlinear_calls += 1;
    let (z, _) = newton_solve(residual, jacobian, &z0, cfg)?;
    if !all_finite(&z) {
        return Err(SolverError::NewtonDivergence {
            iterations: 0,
            final_residual: f64::INFINITY,
        });
    }
    let (x_corr, y_new) = split(&z);

    let err = controller.scaled_error(&x_pred, &x_corr);
    let result = StepResult {
        y_est: state.y.clone(),
        x_pred,
        x_corr,
        y_new,
        local_error: err,
        nonlinear_calls: 1,
    };
    if PiController::accept_step(err) {
        let h_next = controller.propose_step(err, h);
        controller.note_accept(err);
        Ok((result, h_next, true))
    } else {
        controller.note_reject();
        let h_next = controller.reject_retry(err, h);
        Ok((result, h_next, false))
    }
}

/// Adaptive-run options.
#[derive(Debug, Clone)]
pub struct SimOptions {
    pub t_end: f64,
    /// Step used for the first attempt and restarted after every event.
    pub h_init: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            h_init: 1e-3,
        }
    }
}

/// Complete output of one run.
#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub trajectory: Trajectory,
    pub metrics: RunMetrics,
    pub final_state: SystemState,
}

/// Drives adaptive steps from the initial state to `t_end`, landing exactly
/// on event times and the horizon. A diverged run (step-size underflow or
/// unrecoverable Newton failure) returns the partial trajectory with the
/// metrics flagged; it is not an `Err`.
pub fn simulate(
    system: &mut dyn DaeSystem,
    initial: SystemState,
    scheme: &SolverScheme,
    controller: &mut PiController,
    opts: &SimOptions,
) -> Result<SimulationOutput> {
    let t_end = opts.t_end;
    let snap = 1e-12 * t_end.abs().max(1.0);
    let mut state = initial;
    let mut metrics = RunMetrics::default();
    let mut trajectory = Trajectory::new(&system.state_names(), &system.algebraic_names());
    trajectory.push_row(state.t, 0.0, &state.x, &state.y);

    let events: Vec<_> = system
        .events()
        .iter()
        .filter(|e| e.time > state.t + snap && e.time <= t_end + snap)
        .cloned()
        .collect();
    debug_assert!(events.windows(2).all(|w| w[0].time <= w[1].time));
    let mut next_event = 0usize;

    let mut history = AlgebraicHistory::new(state.y.clone());
    let mut h = opts.h_init.clamp(controller.h_min, controller.h_max);

    // Apply any event scheduled exactly at t0.
    for e in system.events().to_vec() {
        if (e.time - state.t).abs() <= snap {
            let (post, _) = apply_event(system, &state, &e, &scheme.newton)?;
            metrics.nonlinear_calls += 1;
            state = post;
            history.reset_on_event(state.y.clone());
            // Post-event values go on their own row, nudged by `snap` so
            // time stays strictly increasing while the discontinuity
            // remains sharp under linear resampling.
            trajectory.push_row(state.t + snap, 0.0, &state.x, &state.y);
        }
    }

    while t_end - state.t > snap {
        let boundary = events
            .get(next_event)
            .map(|e| e.time)
            .unwrap_or(t_end)
            .min(t_end);
        let (h_att, lands) = if state.t + h >= boundary - snap {
            (boundary - state.t, true)
        } else {
            (h, false)
        };

        let attempt = match scheme.kind {
            SchemeKind::SimultaneousItm => {
                step_simultaneous_itm(system, &state, h_att, &scheme.newton, controller, &mut metrics)
            }
            _ => step_partitioned(system, &state, h_att, scheme, &history, controller, &mut metrics),
        };

        match attempt {
            Ok((result, h_next, true)) => {
                metrics.accepted_steps += 1;
                metrics.step_records.push(StepRecord {
                    t: state.t,
                    h_attempted: h_att,
                    accepted: true,
                    scaled_error: result.local_error,
                });
                state.t = if lands { boundary } else { state.t + h_att };
                state.x = result.x_corr;
                state.y = result.y_new;
                state.h_last = Some(h_att);
                history.push_accepted(state.y.clone(), h_att);
                trajectory.push_row(state.t, h_att, &state.x, &state.y);
                h = h_next;

                // Apply every event scheduled at this boundary.
                let mut applied = false;
                while next_event < events.len()
                    && (events[next_event].time - state.t).abs() <= snap
                {
                    let ev = events[next_event].clone();
                    next_event += 1;
                    metrics.nonlinear_calls += 1;
                    match apply_event(system, &state, &ev, &scheme.newton) {
                        Ok((post, _)) => {
                            state = post;
                            applied = true;
                        }
                        Err(SolverError::NewtonDivergence { .. })
                        | Err(SolverError::SingularJacobian) => {
                            metrics.diverged = Some(DivergenceReason::NewtonFailure);
                            return Ok(SimulationOutput {
                                trajectory,
                                metrics,
                                final_state: state,
                            });
                        }
                        Err(e) => return Err(e),
                    }
                }
                if applied {
                    history.reset_on_event(state.y.clone());
                    trajectory.push_row(state.t + snap, 0.0, &state.x, &state.y);
                    h = opts.h_init.clamp(controller.h_min, controller.h_max);
                }
            }
            Ok((result, h_next, false)) => {
                metrics.rejected_steps += 1;
                metrics.step_records.push(StepRecord {
                    t: state.t,
                    h_attempted: h_att,
                    accepted: false,
                    scaled_error: result.local_error,
                });
                if h_att <= controller.h_min * (1.0 + 1e-9) {
                    metrics.diverged = Some(DivergenceReason::StepUnderflow);
                    break;
                }
                h = h_next.max(controller.h_min);
            }
            Err(SolverError::NewtonDivergence { .. }) | Err(SolverError::SingularJacobian) => {
                metrics.rejected_steps += 1;
                metrics.step_records.push(StepRecord {
                    t: state.t,
                    h_attempted: h_att,
                    accepted: false,
                    scaled_error: f64::INFINITY,
                });
                controller.note_reject();
                if h_att <= controller.h_min * (1.0 + 1e-9) {
                    metrics.diverged = Some(DivergenceReason::NewtonFailure);
                    break;
                }
                h = (h_att / 2.0).max(controller.h_min);
            }
            Err(e) => return Err(e),
        }
    }

    Ok(SimulationOutput {
        trajectory,
        metrics,
        final_state: state,
    })
}

/// Fixed-step run used by convergence studies: the controller and the
/// algebraic check are bypassed; every step is accepted.
pub fn simulate_fixed(
    system: &mut dyn DaeSystem,
    initial: SystemState,
    scheme: &SolverScheme,
    h: f64,
    t_end: f64,
) -> Result<SimulationOutput> {
    let snap = 1e-12 * t_end.abs().max(1.0);
    let mut state = initial;
    let mut metrics = RunMetrics::default();
    let mut trajectory = Trajectory::new(&system.state_names(), &system.algebraic_names());
    trajectory.push_row(state.t, 0.0, &state.x, &state.y);
    let mut history = AlgebraicHistory::new(state.y.clone());
    let mut controller = PiController::default();

    let mut plain = scheme.clone();
    plain.algebraic_check = None;

    while t_end - state.t > snap {
        let remaining = t_end - state.t;
        let (h_att, lands) = if remaining <= h * (1.0 + 1e-9) {
            (remaining, true)
        } else {
            (h, false)
        };
        let (result, _, _) = match plain.kind {
            SchemeKind::SimultaneousItm => step_simultaneous_itm(
                system,
                &state,
                h_att,
                &plain.newton,
                &mut controller,
                &mut metrics,
            )?,
            _ => step_partitioned(
                system,
                &state,
                h_att,
                &plain,
                &history,
                &mut controller,
                &mut metrics,
            )?,
        };
        metrics.accepted_steps += 1;
        metrics.step_records.push(StepRecord {
            t: state.t,
            h_attempted: h_att,
            accepted: true,
            scaled_error: result.local_error,
        });
        state.t = if lands { t_end } else { state.t + h_att };
        state.x = result.x_corr;
        state.y = result.y_new;
        state.h_last = Some(h_att);
        history.push_accepted(state.y.clone(), h_att);
        trajectory.push_row(state.t, h_att, &state.x, &state.y);
    }

    Ok(SimulationOutput {
        trajectory,
        metrics,
        final_state: state,
    })
}
