//! Dense linear solve and damped Newton iteration.
//!
//! These routines back the algebraic solver, the implicit corrector and the
//! simultaneous scheme. One invocation of [`newton_solve`] (or of a wrapper
//! around it) is the unit counted as a "nonlinear call" in run metrics.

use nalgebra::{DMatrix, DVector};

use crate::dae::DaeSystem;
use crate::error::{Result, SolverError};

/// Tolerances and limits for the damped Newton iteration.
#[derive(Debug, Clone)]
pub struct NewtonConfig {
    /// Infinity-norm residual threshold.
    pub tol_residual: f64,
    /// Infinity-norm update threshold.
    pub tol_step: f64,
    /// Maximum number of Newton iterations.
    pub max_iter: usize,
    /// Initial step fraction for backtracking; halved on residual increase.
    pub damping: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol_residual: 1e-8,
            tol_step: 1e-10,
            max_iter: 20,
            damping: 1.0,
        }
    }
}

/// Minimum damping fraction before the iteration gives up.
const DAMPING_FLOOR: f64 = 1.0 / 64.0;

/// Outcome of a Newton solve, fed into run metrics.
#[derive(Debug, Clone)]
pub struct NewtonReport {
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: f64,
    pub jacobian_factorizations: usize,
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, &x| m.max(x.abs()))
}

/// Solves `A z = b` by Gaussian elimination with partial (row) pivoting.
///
/// Fails with [`SolverError::SingularJacobian`] when a pivot magnitude falls
/// below `1e-14 * ||A||_inf`.
pub fn solve_linear(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    solve_linear_owned(a.clone(), b)
}

/// [`solve_linear`] consuming the matrix, factorizing it in place. The hot
/// integrator loops build a fresh Jacobian per iteration, so handing it over
/// avoids one full copy per Newton step.
pub fn solve_linear_owned(mut lu: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let n = lu.nrows();
    assert_eq!(lu.ncols(), n, "matrix must be square");
    assert_eq!(b.len(), n, "dimension mismatch");
    if n == 0 {
        return Ok(DVector::zeros(0));
    }

    let mut x = b.clone();
    // Column-major storage: entry (i, j) lives at a[j * n + i].
    let a = lu.as_mut_slice();

    let mut norm_a = 0.0f64;
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            s += a[j * n + i].abs();
        }
        norm_a = norm_a.max(s);
    }
    let pivot_floor = 1e-14 * norm_a.max(f64::MIN_POSITIVE);

    for k in 0..n {
        // Pick the largest remaining pivot in column k (contiguous scan).
        let mut p = k;
        let mut best = a[k * n + k].abs();
        for i in (k + 1)..n {
            let v = a[k * n + i].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best < pivot_floor {
            return Err(SolverError::SingularJacobian);
        }
        if p != k {
            for j in 0..n {
                a.swap(j * n + k, j * n + p);
            }
            x.swap_rows(k, p);
        }
        let pivot = a[k * n + k];
        // Store the multipliers in column k, then sweep the trailing block
        // one column at a time so every inner loop walks contiguous memory.
        for i in (k + 1)..n {
            a[k * n + i] /= pivot;
        }
        for j in (k + 1)..n {
            let akj = a[j * n + k];
            if akj != 0.0 {
                for i in (k + 1)..n {
                    a[j * n + i] -= a[k * n + i] * akj;
                }
            }
        }
        for i in (k + 1)..n {
            x[i] -= a[k * n + i] * x[k];
        }
    }
    // Back substitution.
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in (k + 1)..n {
            s -= a[j * n + k] * x[j];
        }
        x[k] = s / a[k * n + k];
    }
    Ok(x)
}

/// Damped Newton iteration with residual-monotone backtracking.
///
/// `residual` and `jacobian` must be consistent (the Jacobian is the
/// derivative of the residual). `report.iterations` counts residual/Jacobian
/// evaluations performed past the initial one.
pub fn newton_solve<R, J>(
    mut residual: R,
    mut jacobian: J,
    guess: &DVector<f64>,
    cfg: &NewtonConfig,
) -> Result<(DVector<f64>, NewtonReport)>
where
    R: FnMut(&DVector<f64>) -> DVector<f64>,
    J: FnMut(&DVector<f64>) -> DMatrix<f64>,
{
    let mut z = guess.clone();
    if z.is_empty() {
        return Ok((
            z,
            NewtonReport {
                converged: true,
                iterations: 0,
                final_residual: 0.0,
                jacobian_factorizations: 0,
            },
        ));
    }

    let mut r = residual(&z);
    let mut rnorm = inf_norm(&r);
    let mut factorizations = 0;

    for iter in 1..=cfg.max_iter {
        if rnorm <= cfg.tol_residual {
            return Ok((
                z,
                NewtonReport {
                    converged: true,
                    iterations: iter - 1,
                    final_residual: rnorm,
                    jacobian_factorizations: factorizations,
                },
            ));
        }
        let jac = jacobian(&z);
        // A singular Jacobian mid-iteration means Newton cannot make
        // progress from here: report it as divergence.
        let delta = solve_linear_owned(jac, &r).map_err(|_| SolverError::NewtonDivergence {
            iterations: iter,
            final_residual: rnorm,
        })?;
        factorizations += 1;

        // Backtrack until the residual does not increase.
        let mut alpha = cfg.damping;
        loop {
            let trial = &z - alpha * &delta;
            let rt = residual(&trial);
            let rtnorm = inf_norm(&rt);
            if rtnorm <= rnorm || alpha * inf_norm(&delta) <= cfg.tol_step {
                let step = alpha * inf_norm(&delta);
                z = trial;
                r = rt;
                rnorm = rtnorm;
                if rnorm <= cfg.tol_residual || step <= cfg.tol_step {
                    return Ok((
                        z,
                        NewtonReport {
                            converged: true,
                            iterations: iter,
                            final_residual: rnorm,
                            jacobian_factorizations: factorizations,
                        },
                    ));
                }
                break;
            }
            alpha *= 0.5;
            if alpha < DAMPING_FLOOR {
                return Err(SolverError::NewtonDivergence {
                    iterations: iter,
                    final_residual: rnorm,
                });
            }
        }
    }

    if rnorm <= cfg.tol_residual {
        Ok((
            z,
            NewtonReport {
                converged: true,
                iterations: cfg.max_iter,
                final_residual: rnorm,
                jacobian_factorizations: factorizations,
            },
        ))
    } else {
        Err(SolverError::NewtonDivergence {
            iterations: cfg.max_iter,
            final_residual: rnorm,
        })
    }
}

/// Applies exactly `count` undamped Newton updates without convergence tests.
///
/// Used by the fixed-iteration corrector mode; deliberately gives no
/// convergence guarantee.
pub fn newton_fixed<R, J>(
    mut residual: R,
    mut jacobian: J,
    guess: &DVector<f64>,
    count: usize,
) -> Result<(DVector<f64>, NewtonReport)>
where
    R: FnMut(&DVector<f64>) -> DVector<f64>,
    J: FnMut(&DVector<f64>) -> DMatrix<f64>,
{
    let mut z = guess.clone();
    let mut factorizations = 0;
    for _ in 0..count {
        let r = residual(&z);
        let jac = jacobian(&z);
        let delta = solve_linear_owned(jac, &r)?;
        factorizations += 1;
        z -= delta;
    }
    let final_residual = inf_norm(&residual(&z));
    Ok((
        z,
        NewtonReport {
            converged: false,
            iterations: count,
            final_residual,
            jacobian_factorizations: factorizations,
        },
    ))
}

/// Solves `g(t, x, y) = 0` for `y` with `x` held fixed.
pub fn solve_algebraic(
    system: &dyn DaeSystem,
    t: f64,
    x: &DVector<f64>,
    y_guess: &DVector<f64>,
    cfg: &NewtonConfig,
) -> Result<(DVector<f64>, NewtonReport)> {
    newton_solve(
        |y| system.g(t, x, y),
        |y| system.jac_gy(t, x, y),
        y_guess,
        cfg,
    )
}
