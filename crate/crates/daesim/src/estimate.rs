//! Algebraic-variable estimation for the corrector step.
//!
//! Two estimators are provided: hold-previous (`y_est = y_n`, the standard
//! scheme) and the variable-step two-point extrapolation
//! `y_est = y_n + h_next * (y_n - y_prev) / h_prev`, which is second-order
//! accurate on smooth trajectories. Both operate on a small history ring and
//! perform vector arithmetic only; neither touches the system equations.

use nalgebra::DVector;

/// Ring of the two most recent accepted algebraic vectors and the step that
/// separates them.
#[derive(Debug, Clone)]
pub struct AlgebraicHistory {
    y_curr: DVector<f64>,
    y_prev: Option<DVector<f64>>,
    h_prev: Option<f64>,
    /// Set at t0 and by event application; forces hold-previous for the next
    /// estimate because the smoothness assumption is broken.
    fresh_discontinuity: bool,
}

impl AlgebraicHistory {
    /// Starts a history at a consistent initial (or post-event) `y`.
    pub fn new(y0: DVector<f64>) -> Self {
        Self {
            y_curr: y0,
            y_prev: None,
            h_prev: None,
            fresh_discontinuity: true,
        }
    }

    pub fn y_curr(&self) -> &DVector<f64> {
        &self.y_curr
    }

    pub fn has_two_samples(&self) -> bool {
        self.y_prev.is_some()
    }

    pub fn fresh_discontinuity(&self) -> bool {
        self.fresh_discontinuity
    }

    /// Hold-previous estimate: returns `y_n` unchanged.
    pub fn estimate_hold(&self) -> DVector<f64> {
        self.y_curr.clone()
    }

    /// Two-point extrapolation honoring the `h_next / h_prev` ratio.
    ///
    /// Falls back to [`Self::estimate_hold`] when only one sample is
    /// available or immediately after a discontinuity.
    pub fn estimate_extrapolate(&self, h_next: f64) -> DVector<f64> {
        match (&self.y_prev, self.h_prev) {
            (Some(y_prev), Some(h_prev)) if !self.fresh_discontinuity => {
                let slope = (&self.y_curr - y_prev) / h_prev;
                &self.y_curr + h_next * slope
            }
            _ => self.estimate_hold(),
        }
    }

    /// Records an accepted step: shifts the ring and clears the
    /// discontinuity flag, re-enabling extrapolation.
    pub fn push_accepted(&mut self, y_new: DVector<f64>, h_used: f64) {
        debug_assert!(h_used > 0.0);
        self.y_prev = Some(std::mem::replace(&mut self.y_curr, y_new));
        self.h_prev = Some(h_used);
        self.fresh_discontinuity = false;
    }

    /// Discards the ring after an event; `y_post` is the re-solved
    /// post-event algebraic vector.
    pub fn reset_on_event(&mut self, y_post: DVector<f64>) {
        self.y_curr = y_post;
        self.y_prev = None;
        self.h_prev = None;
        self.fresh_discontinuity = true;
    }
}
