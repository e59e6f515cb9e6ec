//! Robust variable step size recursion.
//!
//! The step size follows the low-pass filtered correlation of consecutive
//! errors:
//!
//! ```text
//! p(n)   = α p(n-1) + (1 - α) e(n) e(n-1)
//! ν(n+1) = clamp(β ν(n) + γ p(n)², ν_min, ν_max)
//! ```
//!
//! While the filter is far from the optimum, consecutive errors are
//! correlated and `p²` pushes ν towards `ν_max`. Near the optimum the errors
//! are dominated by white disturbance, `p` averages out and ν decays
//! geometrically to `ν_min`.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Parameters of the step-size recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSizeParams<T> {
    /// Forgetting factor of the error correlation, in `(0, 1)`.
    pub alpha: T,
    /// Step-size decay factor, in `(0, 1)`.
    pub beta: T,
    /// Error-energy gain, `> 0`.
    pub gamma: T,
    pub nu_min: T,
    pub nu_max: T,
}

impl<T: Scalar> StepSizeParams<T> {
    /// Lists every violated bound. Empty means valid.
    // Negated comparisons so that NaN parameters are reported.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let (zero, one) = (T::zero(), T::one());
        if !(self.alpha > zero && self.alpha < one) {
            out.push(format!("alpha = {} must lie in (0, 1)", self.alpha));
        }
        if !(self.beta > zero && self.beta < one) {
            out.push(format!("beta = {} must lie in (0, 1)", self.beta));
        }
        if !(self.gamma > zero && self.gamma.is_finite()) {
            out.push(format!("gamma = {} must be positive", self.gamma));
        }
        if !(self.nu_min > zero) {
            out.push(format!("nu_min = {} must be positive", self.nu_min));
        }
        if !(self.nu_max > self.nu_min && self.nu_max.is_finite()) {
            out.push(format!(
                "nu_max = {} must exceed nu_min = {}",
                self.nu_max, self.nu_min
            ));
        }
        out
    }

    /// Clamps `nu` into the closed interval `[nu_min, nu_max]`.
    #[inline]
    pub fn clamp(&self, nu: T) -> T {
        if nu > self.nu_max {
            self.nu_max
        } else if nu < self.nu_min {
            self.nu_min
        } else {
            nu
        }
    }
}

/// `α p_prev + (1 - α) e_now e_prev`.
#[inline]
pub fn update_correlation<T: Scalar>(p_prev: T, e_now: T, e_prev: T, alpha: T) -> T {
    alpha * p_prev + (T::one() - alpha) * e_now * e_prev
}

/// `clamp(β ν + γ p², ν_min, ν_max)`.
#[inline]
pub fn update_step_size<T: Scalar>(nu: T, p: T, params: &StepSizeParams<T>) -> T {
    params.clamp(params.beta * nu + params.gamma * p * p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn paper() -> StepSizeParams<f64> {
        StepSizeParams {
            alpha: 0.5,
            beta: 0.5,
            gamma: 0.5,
            nu_min: 1e-4,
            nu_max: 3e-4,
        }
    }

    #[test]
    fn correlation_examples() {
        assert_eq!(update_correlation(0.0, 0.0, 0.7, 0.5), 0.0);
        assert_eq!(update_correlation(1.0, 0.0, 123.0, 0.5), 0.5);
        let p = update_correlation(0.2_f64, 1.0, -1.0, 0.5);
        assert!((p - -0.4).abs() < 1e-15);
    }

    #[test]
    fn step_size_examples() {
        // raw 0.5 * 2e-4 = 1e-4 lands on the lower bound
        let nu = update_step_size(2e-4, 0.0, &paper());
        assert!((nu - 1e-4).abs() < 1e-18);
        // raw 0.5e-4 + 0.5 = 0.50005 clamps to the upper bound
        assert_eq!(update_step_size(1e-4, 1.0, &paper()), 3e-4);
    }

    #[test]
    fn zero_correlation_reaches_lower_bound() {
        let params = paper();
        let mut nu = params.nu_max;
        let mut steps = 0;
        while nu > params.nu_min {
            nu = update_step_size(nu, 0.0, &params);
            steps += 1;
            assert!(steps < 64);
        }
        assert_eq!(nu, params.nu_min);
    }

    #[test]
    fn bounds_pass_through_unchanged() {
        let p = paper();
        assert_eq!(p.clamp(p.nu_min), p.nu_min);
        assert_eq!(p.clamp(p.nu_max), p.nu_max);
    }

    #[test]
    fn violations_are_all_listed() {
        let bad = StepSizeParams {
            alpha: 1.0,
            beta: 0.0,
            gamma: -1.0,
            nu_min: 3e-4,
            nu_max: 1e-4,
        };
        assert_eq!(bad.violations().len(), 4);
        assert!(paper().violations().is_empty());
    }

    proptest! {
        #[test]
        fn clamp_totality(nu in -1e3f64..1e3, p in -1e3f64..1e3) {
            let params = paper();
            let out = update_step_size(nu, p, &params);
            prop_assert!(out >= params.nu_min && out <= params.nu_max);
        }

        #[test]
        fn sign_insensitive(nu in 0.0f64..1e-3, p in -10.0f64..10.0) {
            prop_assert_eq!(update_step_size(nu, p, &paper()), update_step_size(nu, -p, &paper()));
        }

        #[test]
        fn monotone_in_correlation_magnitude(nu in 0.0f64..1e-3, a in 0.0f64..0.05, b in 0.0f64..0.05) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(update_step_size(nu, lo, &paper()) <= update_step_size(nu, hi, &paper()));
        }

        #[test]
        fn decay_law_without_clamping(k in 1usize..20) {
            // Bounds wide enough that clamping never engages.
            let params = StepSizeParams { alpha: 0.5, beta: 0.5, gamma: 0.5, nu_min: 1e-300, nu_max: 1.0 };
            let start = 0.5_f64;
            let mut nu = start;
            for _ in 0..k {
                nu = update_step_size(nu, 0.0, &params);
            }
            // β = 1/2 makes every product exact.
            prop_assert_eq!(nu, start * 0.5_f64.powi(k as i32));
        }
    }
}
