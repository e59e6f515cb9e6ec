//! Gamma function.
//!
//! Only `Γ(2 - f)` with `f ∈ (0, 1)` is needed by the fractional update, so
//! the accuracy contract (at least 10 significant digits in `f64`) is stated
//! on `(1, 2]`. The Lanczos approximation used here is accurate to roughly
//! 15 digits on that interval and is extended to all positive arguments.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const LANCZOS_G: f64 = 7.0;

// g = 7, n = 9 (Godfrey coefficients).
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `Γ(x)` for `x > 0`.
///
/// Returns [`Error::Domain`] for non-positive or non-finite arguments.
pub fn gamma<T: Scalar>(x: T) -> Result<T> {
    if !x.is_finite() || x <= T::zero() {
        return Err(Error::Domain {
            name: "gamma argument",
            value: x.as_f64(),
            domain: "(0, inf)",
        });
    }
    // Γ(x) = Γ(x + 1) / x keeps the Lanczos sum in its accurate range.
    if x < T::lit(0.5) {
        return Ok(lanczos(x + T::one()) / x);
    }
    Ok(lanczos(x))
}

fn lanczos<T: Scalar>(x: T) -> T {
    let z = x - T::one();
    let mut sum = T::lit(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum = sum + T::lit(c) / (z + T::lit(i as f64));
    }
    let t = z + T::lit(LANCZOS_G + 0.5);
    let sqrt_two_pi = T::lit(2.506_628_274_631_000_5);
    sqrt_two_pi * t.powf(z + T::lit(0.5)) * (-t).exp() * sum
}
