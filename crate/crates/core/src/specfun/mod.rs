//! Special functions used by the window and basis modules, and by the test
//! oracles: normalized sinc, the Bessel functions `J₁` and `I₁`, and adaptive
//! Gauss–Kronrod quadrature.

mod bessel;
mod quadrature;

use std::f64::consts::PI;

pub use bessel::bessel_j1;
pub(crate) use bessel::{hankel_pq, i1_scaled, j1};
pub use quadrature::{integrate_adaptive, integrate_adaptive_with_budget, QuadratureResult};

use crate::error::{Error, Result};

/// Below this magnitude the sinc Taylor polynomial replaces `sin(πx)/(πx)`.
const SINC_TAYLOR_CUTOFF: f64 = 1e-4;

/// Normalized sinc, `sin(πx)/(πx)`, with `sinc(0) = 1`.
pub fn sinc(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("sinc of non-finite argument {x}")));
    }
    Ok(sinc_unchecked(x))
}

/// `sin(πx)` with exact zeros at the integers.
///
/// The argument is reduced to `r = x − round(x)` first, which is exact in
/// floating point, so the result keeps full relative accuracy near every
/// integer.
#[inline]
pub(crate) fn sin_pi(x: f64) -> f64 {
    let k = x.round();
    let r = x - k;
    let s = (PI * r).sin();
    if (k as i64) & 1 == 0 {
        s
    } else {
        -s
    }
}

/// Normalized sinc without the finiteness check.
#[inline]
pub(crate) fn sinc_unchecked(x: f64) -> f64 {
    if x.abs() < SINC_TAYLOR_CUTOFF {
        let y = PI * x;
        let y2 = y * y;
        1.0 - y2 / 6.0 + y2 * y2 / 120.0
    } else {
        sin_pi(x) / (PI * x)
    }
}
