//! PI step-size control, step acceptance and the algebraic consistency check
//! used by the hold-previous scheme.

use nalgebra::DVector;

/// PI error controller. Gains default to the Gustafsson-style pair
/// `k_i = 0.3/p`, `k_p = 0.4/p` with `p = 2` (the order of the FE/ITM pair).
#[derive(Debug, Clone)]
pub struct PiController {
    pub rtol: f64,
    pub atol: f64,
    pub k_i: f64,
    pub k_p: f64,
    pub safety: f64,
    pub fac_min: f64,
    pub fac_max: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Scaled error of the previous accepted step.
    err_prev: f64,
    /// Set after a rejection; caps growth of the next proposal at 1.
    reject_memory: bool,
}

impl Default for PiController {
    fn default() -> Self {
        Self {
            rtol: 1e-6,
            atol: 1e-8,
            k_i: 0.3 / 2.0,
            k_p: 0.4 / 2.0,
            safety: 0.9,
            fac_min: 0.5,
            fac_max: 2.0,
            h_min: 1e-7,
            h_max: 0.1,
            err_prev: 1.0,
            reject_memory: false,
        }
    }
}

/// Floor applied to the scaled error before exponentiation, so degenerate
/// exact steps cannot overflow `err^(-k_i)`.
const ERR_FLOOR: f64 = 1e-10;

impl PiController {
    /// RMS of the predictor-corrector difference in weights
    /// `atol + rtol * max(|x_corr_i|, |x_pred_i|)`. A value `<= 1` passes.
    pub fn scaled_error(&self, x_pred: &DVector<f64>, x_corr: &DVector<f64>) -> f64 {
        assert_eq!(x_pred.len(), x_corr.len());
        let m = x_pred.len();
        if m == 0 {
            return 0.0;
        }
        let mut sum = 0.0;
        for i in 0..m {
            let w = self.atol + self.rtol * x_corr[i].abs().max(x_pred[i].abs());
            let e = (x_corr[i] - x_pred[i]) / w;
            sum += e * e;
        }
        (sum / m as f64).sqrt()
    }

    /// PI proposal `h * clamp(safety * err^(-k_i) * (err_prev/err)^(k_p))`,
    /// clamped to `[fac_min, fac_max]` and then to `[h_min, h_max]`.
    pub fn propose_step(&self, err: f64, h: f64) -> f64 {
        let err = err.max(ERR_FLOOR);
        let mut fac =
            self.safety * err.powf(-self.k_i) * (self.err_prev / err).powf(self.k_p);
        fac = fac.clamp(self.fac_min, self.fac_max);
        if self.reject_memory {
            fac = fac.min(1.0);
        }
        (h * fac).clamp(self.h_min, self.h_max)
    }

    pub fn accept_step(err: f64) -> bool {
        err <= 1.0
    }

    /// Caller signal: the attempt at scaled error `err` was accepted.
    pub fn note_accept(&mut self, err: f64) {
        self.err_prev = err.max(ERR_FLOOR);
        self.reject_memory = false;
    }

    /// Caller signal: the attempt was rejected (any reason).
    pub fn note_reject(&mut self) {
        self.reject_memory = true;
    }

    /// Step size to retry with after an error-based rejection. Strictly
    /// smaller than `h` (down to `h_min`).
    pub fn reject_retry(&self, err: f64, h: f64) -> f64 {
        let err = err.max(ERR_FLOOR);
        let fac = (self.safety * err.powf(-self.k_i)).clamp(self.fac_min, 0.9);
        (h * fac).max(self.h_min)
    }
}

/// Threshold on the post-solve difference `||y_new - y_n||_inf` used by the
/// hold-previous scheme.
#[derive(Debug, Clone)]
pub struct AlgebraicCheck {
    pub epsilon: f64,
    pub max_recorrections: usize,
}

impl Default for AlgebraicCheck {
    fn default() -> Self {
        Self {
            epsilon: 1e-4,
            max_recorrections: 3,
        }
    }
}

impl AlgebraicCheck {
    /// "Tight" profile for the stable-but-slow contrast experiments.
    pub fn tight() -> Self {
        Self {
            epsilon: 1e-6,
            max_recorrections: 3,
        }
    }
}

/// True iff `||y_new - y_est||_inf <= epsilon` (vacuously for empty vectors).
pub fn algebraic_consistency(
    y_new: &DVector<f64>,
    y_est: &DVector<f64>,
    check: &AlgebraicCheck,
) -> bool {
    assert_eq!(y_new.len(), y_est.len());
    y_new
        .iter()
        .zip(y_est.iter())
        .all(|(a, b)| (a - b).abs() <= check.epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::dvector;
    use proptest::prelude::*;

    #[test]
    fn scaled_error_identical_is_zero() {
        let c = PiController::default();
        let v = dvector![1.0, 2.0];
        assert_eq!(c.scaled_error(&v, &v), 0.0);
    }

    #[test]
    fn scaled_error_unit_by_construction() {
        let c = PiController::default();
        // m = 1, difference = atol, x near zero.
        let err = c.scaled_error(&dvector![0.0], &dvector![c.atol]);
        // weight = atol + rtol*atol, slightly above atol
        assert_abs_diff_eq!(err, 1.0, epsilon = 1e-5);
    }

    #[test]
    fn scaled_error_rms_of_units() {
        let c = PiController::default();
        let err = c.scaled_error(&dvector![0.0, 0.0], &dvector![c.atol, c.atol]);
        assert_abs_diff_eq!(err, 1.0, epsilon = 1e-5);
    }

    #[test]
    fn propose_unit_ratios_pure_safety() {
        let c = PiController::default();
        assert_abs_diff_eq!(c.propose_step(1.0, 0.01), 0.009, epsilon = 1e-12);
    }

    #[test]
    fn propose_clamps() {
        let c = PiController::default();
        assert_abs_diff_eq!(c.propose_step(1e9, 0.01), 0.005, epsilon = 1e-12);
        assert_abs_diff_eq!(c.propose_step(1e-12, 0.01), 0.02, epsilon = 1e-12);
        // fac_max growth capped at h_max
        assert_abs_diff_eq!(c.propose_step(1e-12, 0.09), c.h_max, epsilon = 1e-12);
    }

    #[test]
    fn accept_threshold() {
        assert!(PiController::accept_step(0.999));
        assert!(!PiController::accept_step(1.001));
        assert!(PiController::accept_step(0.0));
    }

    #[test]
    fn consistency_check_basics() {
        let check = AlgebraicCheck::default();
        let y = dvector![1.0, 2.0];
        assert!(algebraic_consistency(&y, &y, &check));
        let y2 = dvector![1.0 + 2.0 * check.epsilon, 2.0];
        assert!(!algebraic_consistency(&y2, &y, &check));
        let empty = DVector::zeros(0);
        assert!(algebraic_consistency(&empty, &empty, &check));
    }

    #[test]
    fn reject_retry_strictly_smaller() {
        let c = PiController::default();
        for err in [1.0001, 2.0, 10.0, 1e6] {
            let h = 0.01;
            assert!(c.reject_retry(err, h) < h);
        }
    }

    proptest! {
        #[test]
        fn propose_within_bounds(err in 1e-10f64..1e6, h in 1e-7f64..0.1) {
            let c = PiController::default();
            let hn = c.propose_step(err, h);
            prop_assert!(hn >= c.h_min && hn <= c.h_max);
            prop_assert!(hn >= (c.fac_min * h).clamp(c.h_min, c.h_max) - 1e-18);
            prop_assert!(hn <= (c.fac_max * h).clamp(c.h_min, c.h_max) + 1e-18);
        }

        /// Doubling both tolerances can only shrink the scaled error, so an
        /// accepted decision stays accepted.
        #[test]
        fn scale_consistency(
            xs in proptest::collection::vec(-10.0f64..10.0, 1..6),
            ds in proptest::collection::vec(-1e-3f64..1e-3, 1..6),
        ) {
            let n = xs.len().min(ds.len());
            let x_corr = DVector::from_iterator(n, xs.iter().take(n).cloned());
            let x_pred = DVector::from_iterator(
                n,
                xs.iter().zip(&ds).take(n).map(|(x, d)| x + d),
            );
            let c1 = PiController::default();
            let mut c2 = PiController::default();
            c2.atol *= 2.0;
            c2.rtol *= 2.0;
            let e1 = c1.scaled_error(&x_pred, &x_corr);
            let e2 = c2.scaled_error(&x_pred, &x_corr);
            prop_assert!(e2 <= e1 + 1e-15);
        }
    }
}
