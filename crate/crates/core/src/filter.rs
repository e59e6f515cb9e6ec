//! Cost, gradients and single-sample weight updates for LMS, FLMS and
//! RVSS-FLMS.
//!
//! With the instantaneous cost `J(n) = ½ e(n)²` and `e(n) = d(n) - wᵀx(n)`:
//!
//! ```text
//! ∂J/∂w_k      = -e(n) x_k(n)
//! (∂/∂w_k)^f J = -e(n) x_k(n) w_k^{1-f} / Γ(2-f)
//! ```
//!
//! The fractional term comes from the Riemann–Liouville derivative of a
//! power function, `D^f t^a = Γ(1+a)/Γ(1+a-f) t^{a-f}`, applied to `y = w x`
//! through the modified chain rule. Real powers of negative weights are not
//! defined, so [`FracPowerPolicy`] picks how `w^{1-f}` extends to `w < 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::gamma;
use crate::scalar::Scalar;
use crate::stepsize::{update_correlation, update_step_size, StepSizeParams};

/// How `w^{1-f}` is evaluated for non-positive weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FracPowerPolicy {
    /// `sign(w) |w|^{1-f}`: odd extension, keeps the update symmetric in w.
    #[default]
    SignedMagnitude,
    /// `|w|^{1-f}`.
    MagnitudeOnly,
}

impl FracPowerPolicy {
    pub fn name(self) -> &'static str {
        match self {
            FracPowerPolicy::SignedMagnitude => "signed_magnitude",
            FracPowerPolicy::MagnitudeOnly => "magnitude_only",
        }
    }
}

/// Which weight update a filter applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Plain LMS with fixed step `nu_init`.
    Lms,
    /// Fractional LMS with fixed steps `nu_init` and `nu_f_init`.
    Flms,
    /// Fractional LMS with robust variable step size.
    RvssFlms,
}

impl Algorithm {
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Lms => "LMS",
            Algorithm::Flms => "FLMS",
            Algorithm::RvssFlms => "RVSS-FLMS",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        match label {
            "LMS" => Some(Algorithm::Lms),
            "FLMS" => Some(Algorithm::Flms),
            "RVSS-FLMS" => Some(Algorithm::RvssFlms),
            _ => None,
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Static hyperparameters of one filter instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig<T> {
    pub tap_count: usize,
    /// Fractional derivative order `f`, in `(0, 1)`.
    pub frac_order: T,
    /// Initial step size `ν(0)`.
    pub nu_init: T,
    /// Step size of the fractional term (FLMS only).
    pub nu_f_init: T,
    pub nu_min: T,
    pub nu_max: T,
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    #[serde(default)]
    pub frac_power_policy: FracPowerPolicy,
    /// Initial value of every tap weight.
    pub weight_init: T,
}

impl<T: Scalar> FilterConfig<T> {
    /// Hyperparameters used for the plant-identification experiment:
    /// three taps, `f = 0.5`, `ν(0) = ν_f(0) = 1e-4`, `α = β = γ = 0.5`,
    /// `ν ∈ [1e-4, 3e-4]`, weights initialized to `1e-20`.
    pub fn paper_defaults() -> Self {
        Self {
            tap_count: 3,
            frac_order: T::lit(0.5),
            nu_init: T::lit(1e-4),
            nu_f_init: T::lit(1e-4),
            nu_min: T::lit(1e-4),
            nu_max: T::lit(3e-4),
            alpha: T::lit(0.5),
            beta: T::lit(0.5),
            gamma: T::lit(0.5),
            frac_power_policy: FracPowerPolicy::SignedMagnitude,
            weight_init: T::lit(1e-20),
        }
    }

    pub fn step_size_params(&self) -> StepSizeParams<T> {
        StepSizeParams {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            nu_min: self.nu_min,
            nu_max: self.nu_max,
        }
    }

    /// Lists every violated invariant. Empty means valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.tap_count == 0 {
            out.push("tap_count must be at least 1".to_string());
        }
        if !(self.frac_order > T::zero() && self.frac_order < T::one()) {
            out.push(format!(
                "frac_order = {} must lie in (0, 1)",
                self.frac_order
            ));
        }
        out.extend(self.step_size_params().violations());
        if !(self.nu_init >= self.nu_min && self.nu_init <= self.nu_max) {
            out.push(format!(
                "nu_init = {} must lie within [nu_min, nu_max] = [{}, {}]",
                self.nu_init, self.nu_min, self.nu_max
            ));
        }
        if !(self.nu_f_init >= T::zero() && self.nu_f_init.is_finite()) {
            out.push(format!(
                "nu_f_init = {} must be non-negative",
                self.nu_f_init
            ));
        }
        if !self.weight_init.is_finite() {
            out.push(format!("weight_init = {} must be finite", self.weight_init));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v))
        }
    }
}

/// Tap-delay line `[x(n), x(n-1), …, x(n-K+1)]`, most recent first.
#[derive(Debug, Clone, PartialEq)]
pub struct Regressor<T> {
    taps: Vec<T>,
}

impl<T: Scalar> Regressor<T> {
    /// All-zero window of `len` taps (zero prehistory).
    pub fn zeros(len: usize) -> Self {
        Self {
            taps: vec![T::zero(); len],
        }
    }

    pub fn from_taps(taps: Vec<T>) -> Self {
        Self { taps }
    }

    /// Shifts the window by one and puts `x` in front.
    #[inline]
    pub fn push(&mut self, x: T) {
        if self.taps.is_empty() {
            return;
        }
        self.taps.rotate_right(1);
        self.taps[0] = x;
    }

    pub fn reset(&mut self) {
        self.taps.iter_mut().for_each(|t| *t = T::zero());
    }

    #[inline]
    pub fn taps(&self) -> &[T] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }
}

/// Mutable per-run filter state.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState<T> {
    pub weights: Vec<T>,
    /// Current step size `ν(n)`.
    pub nu: T,
    /// Averaged error-energy correlation `p(n)`.
    pub p: T,
    /// Previous error `e(n-1)`.
    pub prev_error: T,
    pub iteration: u64,
}

impl<T: Scalar> FilterState<T> {
    /// Fresh state: all weights at `weight_init`, `ν = nu_init`, `p = 0`,
    /// `e(-1) = 0`.
    pub fn new(cfg: &FilterConfig<T>) -> Self {
        Self {
            weights: vec![cfg.weight_init; cfg.tap_count],
            nu: cfg.nu_init,
            p: T::zero(),
            prev_error: T::zero(),
            iteration: 0,
        }
    }

    pub fn with_weights(weights: Vec<T>, nu: T) -> Self {
        Self {
            weights,
            nu,
            p: T::zero(),
            prev_error: T::zero(),
            iteration: 0,
        }
    }
}

/// `½ e²`.
#[inline]
pub fn cost<T: Scalar>(error: T) -> T {
    T::lit(0.5) * error * error
}

#[inline]
fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

#[inline]
fn dot<T: Scalar>(w: &[T], x: &[T]) -> T {
    w.iter()
        .zip(x)
        .fold(T::zero(), |acc, (&wk, &xk)| acc + wk * xk)
}

/// Filter output `Σ_k w_k x(n-k)`.
pub fn predict<T: Scalar>(state: &FilterState<T>, reg: &Regressor<T>) -> Result<T> {
    check_dims(state.weights.len(), reg.len())?;
    Ok(dot(&state.weights, reg.taps()))
}

/// `∂J/∂w_k = -e x_k`.
pub fn integer_gradient<T: Scalar>(error: T, reg: &Regressor<T>) -> Vec<T> {
    reg.taps().iter().map(|&x| -error * x).collect()
}

/// `w^{exponent}` extended to non-positive `w` according to `policy`.
/// Zero maps to zero under both policies.
#[inline]
pub fn frac_power<T: Scalar>(w: T, exponent: T, policy: FracPowerPolicy) -> T {
    if w == T::zero() {
        return T::zero();
    }
    let mag = w.abs().powf(exponent);
    match policy {
        FracPowerPolicy::SignedMagnitude if w < T::zero() => -mag,
        _ => mag,
    }
}

/// `(∂/∂w_k)^f J = -e x_k w_k^{1-f} / Γ(2-f)`.
pub fn fractional_gradient<T: Scalar>(
    error: T,
    reg: &Regressor<T>,
    state: &FilterState<T>,
    frac_order: T,
    policy: FracPowerPolicy,
) -> Result<Vec<T>> {
    check_dims(state.weights.len(), reg.len())?;
    if !(frac_order > T::zero() && frac_order < T::one()) {
        return Err(Error::Domain {
            name: "frac_order",
            value: frac_order.as_f64(),
            domain: "(0, 1)",
        });
    }
    let exponent = T::one() - frac_order;
    let g = gamma(T::lit(2.0) - frac_order)?;
    Ok(reg
        .taps()
        .iter()
        .zip(&state.weights)
        .map(|(&x, &w)| -error * x * frac_power(w, exponent, policy) / g)
        .collect())
}

/// RVSS-FLMS weight increment `ν e x (1 + w^{1-f})` for one tap.
#[inline]
pub fn rvss_weight_increment<T: Scalar>(
    w: T,
    x: T,
    error: T,
    nu: T,
    exponent: T,
    policy: FracPowerPolicy,
) -> T {
    nu * error * x * (T::one() + frac_power(w, exponent, policy))
}

/// Validated configuration with `Γ(2-f)` precomputed, ready to step states.
#[derive(Debug, Clone)]
pub struct FilterKernel<T> {
    cfg: FilterConfig<T>,
    exponent: T,
    inv_gamma: T,
    step_params: StepSizeParams<T>,
}

impl<T: Scalar> FilterKernel<T> {
    pub fn new(cfg: &FilterConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let g = gamma(T::lit(2.0) - cfg.frac_order)?;
        Ok(Self {
            cfg: cfg.clone(),
            exponent: T::one() - cfg.frac_order,
            inv_gamma: T::one() / g,
            step_params: cfg.step_size_params(),
        })
    }

    pub fn config(&self) -> &FilterConfig<T> {
        &self.cfg
    }

    pub fn initial_state(&self) -> FilterState<T> {
        FilterState::new(&self.cfg)
    }

    /// Advances `state` by one sample with the chosen algorithm and returns
    /// the a-priori error `e(n)`.
    #[inline]
    pub fn step(
        &self,
        algorithm: Algorithm,
        state: &mut FilterState<T>,
        reg: &Regressor<T>,
        desired: T,
    ) -> Result<T> {
        match algorithm {
            Algorithm::Lms => self.lms_step(state, reg, desired),
            Algorithm::Flms => self.flms_step(state, reg, desired),
            Algorithm::RvssFlms => self.rvss_flms_step(state, reg, desired),
        }
    }

    /// `w += ν e x` with `ν = nu_init`.
    pub fn lms_step(
        &self,
        state: &mut FilterState<T>,
        reg: &Regressor<T>,
        desired: T,
    ) -> Result<T> {
        let error = desired - predict(state, reg)?;
        let nu = self.cfg.nu_init;
        for (w, &x) in state.weights.iter_mut().zip(reg.taps()) {
            *w = *w + nu * error * x;
        }
        finish(state, error)
    }

    /// `w += ν e x + ν_f e x w^{1-f} / Γ(2-f)`, both step sizes fixed.
    pub fn flms_step(
        &self,
        state: &mut FilterState<T>,
        reg: &Regressor<T>,
        desired: T,
    ) -> Result<T> {
        let error = desired - predict(state, reg)?;
        let nu = self.cfg.nu_init;
        let nu_f = self.cfg.nu_f_init;
        let policy = self.cfg.frac_power_policy;
        for (w, &x) in state.weights.iter_mut().zip(reg.taps()) {
            let fp = frac_power(*w, self.exponent, policy);
            *w = *w + nu * error * x + nu_f * error * x * fp * self.inv_gamma;
        }
        finish(state, error)
    }

    /// `w += ν(n) e x (1 + w^{1-f})`, then advances `p` and `ν`.
    ///
    /// The weight update uses ν(n); the correlation p(n) is formed from e(n)
    /// and e(n-1) and then drives ν(n+1).
    pub fn rvss_flms_step(
        &self,
        state: &mut FilterState<T>,
        reg: &Regressor<T>,
        desired: T,
    ) -> Result<T> {
        let error = desired - predict(state, reg)?;
        let policy = self.cfg.frac_power_policy;
        for (w, &x) in state.weights.iter_mut().zip(reg.taps()) {
            *w = *w + rvss_weight_increment(*w, x, error, state.nu, self.exponent, policy);
        }
        state.p = update_correlation(state.p, error, state.prev_error, self.step_params.alpha);
        state.nu = update_step_size(state.nu, state.p, &self.step_params);
        if !state.nu.is_finite() || !state.p.is_finite() {
            return Err(Error::Diverged {
                iteration: state.iteration,
                quantity: "step size",
            });
        }
        finish(state, error)
    }
}

// On error the state is left as computed so the diagnostic can inspect it.
#[inline]
fn finish<T: Scalar>(state: &mut FilterState<T>, error: T) -> Result<T> {
    if !error.is_finite() {
        return Err(Error::Diverged {
            iteration: state.iteration,
            quantity: "error",
        });
    }
    if state.weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Diverged {
            iteration: state.iteration,
            quantity: "weight",
        });
    }
    state.prev_error = error;
    state.iteration += 1;
    Ok(error)
}

/// One LMS step as a pure function of `(state, inputs)`.
pub fn lms_step<T: Scalar>(
    state: &FilterState<T>,
    reg: &Regressor<T>,
    desired: T,
    cfg: &FilterConfig<T>,
) -> Result<(FilterState<T>, T)> {
    pure_step(Algorithm::Lms, state, reg, desired, cfg)
}

/// One FLMS step as a pure function of `(state, inputs)`.
pub fn flms_step<T: Scalar>(
    state: &FilterState<T>,
    reg: &Regressor<T>,
    desired: T,
    cfg: &FilterConfig<T>,
) -> Result<(FilterState<T>, T)> {
    pure_step(Algorithm::Flms, state, reg, desired, cfg)
}

/// One RVSS-FLMS step as a pure function of `(state, inputs)`.
pub fn rvss_flms_step<T: Scalar>(
    state: &FilterState<T>,
    reg: &Regressor<T>,
    desired: T,
    cfg: &FilterConfig<T>,
) -> Result<(FilterState<T>, T)> {
    pure_step(Algorithm::RvssFlms, state, reg, desired, cfg)
}

fn pure_step<T: Scalar>(
    algorithm: Algorithm,
    state: &FilterState<T>,
    reg: &Regressor<T>,
    desired: T,
    cfg: &FilterConfig<T>,
) -> Result<(FilterState<T>, T)> {
    let kernel = FilterKernel::new(cfg)?;
    let mut next = state.clone();
    let e = kernel.step(algorithm, &mut next, reg, desired)?;
    Ok((next, e))
}
