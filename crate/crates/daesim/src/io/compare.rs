//! Cross-solver trajectory comparison.
//!
//! The candidate is resampled onto the reference time grid by piecewise
//! linear interpolation; differences are reported per variable with the
//! worst variable selected by L2 norm.

use crate::error::{Result, SolverError};
use crate::metrics::Trajectory;

#[derive(Debug, Clone)]
pub struct CompareReport {
    /// Variable labels (states then algebraics; `time`/`step_size` excluded).
    pub variables: Vec<String>,
    /// L2 norm of the absolute-difference series per variable.
    pub l2: Vec<f64>,
    /// Index into `variables` of the largest L2 norm.
    pub worst: usize,
    /// Absolute-difference series of the worst variable, on the reference grid.
    pub worst_series: Vec<(f64, f64)>,
    /// Largest absolute difference over all variables and times.
    pub max_abs: f64,
}

impl CompareReport {
    pub fn worst_variable(&self) -> &str {
        &self.variables[self.worst]
    }

    /// L∞ of the worst-L2 variable's difference series.
    pub fn worst_linf(&self) -> f64 {
        self.worst_series
            .iter()
            .fold(0.0f64, |m, &(_, d)| m.max(d))
    }
}

/// Linear interpolation of column `col` of `traj` at time `t` (clamped to
/// the trajectory's time range).
fn interp(traj: &Trajectory, col: usize, t: f64) -> f64 {
    if t <= traj.row(0)[0] {
        return traj.row(0)[col];
    }
    let last = traj.n_rows() - 1;
    if t >= traj.row(last)[0] {
        return traj.row(last)[col];
    }
    // binary search on the time column
    let mut lo = 0;
    let mut hi = last;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if traj.row(mid)[0] <= t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (t0, t1) = (traj.row(lo)[0], traj.row(hi)[0]);
    if t1 == t0 {
        return traj.row(hi)[col];
    }
    let w = (t - t0) / (t1 - t0);
    traj.row(lo)[col] * (1.0 - w) + traj.row(hi)[col] * w
}

pub fn compare_trajectories(
    reference: &Trajectory,
    candidate: &Trajectory,
) -> Result<CompareReport> {
    if reference.variable_labels() != candidate.variable_labels() {
        return Err(SolverError::VariableMismatch(format!(
            "reference variables {:?} vs candidate {:?}",
            reference.variable_labels(),
            candidate.variable_labels()
        )));
    }
    if reference.is_empty() || candidate.is_empty() {
        return Err(SolverError::VariableMismatch(
            "cannot compare empty trajectories".into(),
        ));
    }
    let variables: Vec<String> = reference.variable_labels().to_vec();
    let ncols = variables.len();
    let mut l2 = vec![0.0f64; ncols];
    let mut max_abs = 0.0f64;
    let mut series: Vec<Vec<(f64, f64)>> = vec![Vec::new(); ncols];
    for row in reference.rows() {
        let t = row[0];
        for j in 0..ncols {
            let col = j + 2; // skip time, step_size
            let d = (row[col] - interp(candidate, col, t)).abs();
            l2[j] += d * d;
            max_abs = max_abs.max(d);
            series[j].push((t, d));
        }
    }
    for v in &mut l2 {
        *v = v.sqrt();
    }
    let worst = l2
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(CompareReport {
        worst_series: std::mem::take(&mut series[worst]),
        variables,
        l2,
        worst,
        max_abs,
    })
}
