//! Run instrumentation: solver-call and step counters, per-attempt records
//! and the trajectory container.

/// One attempted step (accepted or rejected).
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    pub t: f64,
    pub h_attempted: f64,
    pub accepted: bool,
    pub scaled_error: f64,
}

/// Why a run was flagged as diverged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceReason {
    StepUnderflow,
    NewtonFailure,
}

impl DivergenceReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            DivergenceReason::StepUnderflow => "step_underflow",
            DivergenceReason::NewtonFailure => "newton_failure",
        }
    }
}

/// Performance counters for scheme-efficiency comparisons.
#[derive(Debug, Clone, Default)]
pub struct RunMetrics {
    /// Total Newton-solver invocations during the run.
    pub nonlinear_calls: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Extra corrector passes triggered by the algebraic consistency check.
    pub recorrections: usize,
    pub diverged: Option<DivergenceReason>,
    pub step_records: Vec<StepRecord>,
}

impl RunMetrics {
    pub fn attempts(&self) -> usize {
        self.accepted_steps + self.rejected_steps
    }

    /// Counter-conservation invariants; asserted by tests after every run.
    pub fn conserved(&self) -> bool {
        self.step_records.len() == self.attempts()
            && self.nonlinear_calls >= self.accepted_steps
            && self.step_records.iter().filter(|r| r.accepted).count() == self.accepted_steps
    }
}

/// Rows of `(t, h, x..., y...)` at accepted steps and event boundaries,
/// stored row-major in one contiguous buffer (long runs produce millions of
/// rows; per-row allocations would dominate the solver's memory traffic).
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `time, step_size`, then state names, then algebraic names.
    pub labels: Vec<String>,
    data: Vec<f64>,
}

impl Trajectory {
    pub fn new(state_names: &[String], algebraic_names: &[String]) -> Self {
        let mut labels = Vec::with_capacity(2 + state_names.len() + algebraic_names.len());
        labels.push("time".to_string());
        labels.push("step_size".to_string());
        labels.extend(state_names.iter().cloned());
        labels.extend(algebraic_names.iter().cloned());
        Self {
            labels,
            data: Vec::new(),
        }
    }

    /// Builds a trajectory from pre-assembled rows; every row must match the
    /// header width.
    pub fn from_rows(labels: Vec<String>, rows: impl IntoIterator<Item = Vec<f64>>) -> Self {
        let mut out = Self {
            labels,
            data: Vec::new(),
        };
        for row in rows {
            assert_eq!(row.len(), out.labels.len(), "row width != header width");
            out.data.extend(row);
        }
        out
    }

    pub fn push_row(&mut self, t: f64, h: f64, x: &nalgebra::DVector<f64>, y: &nalgebra::DVector<f64>) {
        let before = self.data.len();
        self.data.push(t);
        self.data.push(h);
        self.data.extend(x.iter().cloned());
        self.data.extend(y.iter().cloned());
        debug_assert_eq!(self.data.len() - before, self.labels.len());
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.labels.len();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn last_row(&self) -> Option<&[f64]> {
        self.n_rows().checked_sub(1).map(|i| self.row(i))
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.labels.len())
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(|r| r[0])
    }

    /// Column index of a variable by label (skipping time/step_size).
    pub fn column(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Variable labels (everything after time and step_size).
    pub fn variable_labels(&self) -> &[String] {
        &self.labels[2..]
    }
}
