//! Regularization windows `g_N` and their Fourier-side diagnostics.
//!
//! The sinh window of half-width `m` and shape `β` is
//!
//! ```text
//! φ(x) = sinh(β √(1 − x²/m²)) / sinh β   for |x| ≤ m,   0 otherwise,
//! ```
//!
//! and its Fourier transform `(2π)^{-1/2} ∫ φ(x) e^{−iwx} dx` has the closed
//! form
//!
//! ```text
//! φ̂(w) = m √π β / (√2 sinh β) · J₁(z)/z,   z = β √(v² − 1),   v = m w / β,
//! ```
//!
//! continued through `|v| < 1` by `J₁(iy)/(iy) = I₁(y)/y` with `y = β √(1 − v²)`.

use std::f64::consts::{FRAC_2_PI, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{hankel_pq, i1_scaled, integrate_adaptive, j1};

/// Below this argument `J₁(z)/z` and `I₁(y)/y` use their two-term series.
const BESSEL_RATIO_SERIES_CUTOFF: f64 = 1e-4;

/// Which regularizer multiplies each series term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    None,
    Gaussian,
    Sinh,
}

impl WindowKind {
    pub fn name(self) -> &'static str {
        match self {
            WindowKind::None => "none",
            WindowKind::Gaussian => "gaussian",
            WindowKind::Sinh => "sinh",
        }
    }
}

impl std::fmt::Display for WindowKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "no" => Ok(WindowKind::None),
            "gaussian" | "gauss" => Ok(WindowKind::Gaussian),
            "sinh" => Ok(WindowKind::Sinh),
            other => Err(Error::Config(format!("unknown window kind '{other}'"))),
        }
    }
}

/// A regularization window with its shape parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WindowSpec {
    /// `g(x) = 1`.
    None,
    /// `g(x) = exp(−variance_scale · x²)`.
    Gaussian { variance_scale: f64 },
    /// The compactly supported sinh window on `[−half_width, half_width]`.
    Sinh { beta: f64, half_width: f64 },
}

impl WindowSpec {
    pub fn sinh(beta: f64, half_width: f64) -> Result<Self> {
        let spec = WindowSpec::Sinh { beta, half_width };
        spec.validate()?;
        Ok(spec)
    }

    pub fn gaussian(variance_scale: f64) -> Result<Self> {
        let spec = WindowSpec::Gaussian { variance_scale };
        spec.validate()?;
        Ok(spec)
    }

    pub fn kind(&self) -> WindowKind {
        match self {
            WindowSpec::None => WindowKind::None,
            WindowSpec::Gaussian { .. } => WindowKind::Gaussian,
            WindowSpec::Sinh { .. } => WindowKind::Sinh,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WindowSpec::None => Ok(()),
            WindowSpec::Gaussian { variance_scale } => {
                if variance_scale.is_finite() && variance_scale > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "gaussian variance scale must be finite and positive, got {variance_scale}"
                    )))
                }
            }
            WindowSpec::Sinh { beta, half_width } => {
                if !(beta.is_finite() && beta > 0.0) {
                    return Err(Error::Config(format!("sinh beta must be finite and positive, got {beta}")));
                }
                if !(half_width.is_finite() && half_width > 0.0) {
                    return Err(Error::Config(format!(
                        "sinh half-width must be finite and positive, got {half_width}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Radius outside which the window vanishes identically, if any.
    pub fn support_radius(&self) -> Option<f64> {
        match *self {
            WindowSpec::Sinh { half_width, .. } => Some(half_width),
            _ => None,
        }
    }

    /// Window value for an already validated spec.
    #[inline]
    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        match *self {
            WindowSpec::None => 1.0,
            WindowSpec::Gaussian { variance_scale } => (-variance_scale * x * x).exp(),
            WindowSpec::Sinh { beta, half_width } => sinh_window(beta, half_width, x),
        }
    }
}

/// `sinh(βs)/sinh(β)` with `s = √(1 − x²/m²)`, evaluated as
/// `e^{β(s−1)} (1 − e^{−2βs}) / (1 − e^{−2β})` so that large `β` cannot overflow.
/// The exponent uses `s − 1 = −t²/(1 + s)`: forming `s − 1` directly would cost
/// about `β` ulps of relative accuracy near the centre.
#[inline]
fn sinh_window(beta: f64, m: f64, x: f64) -> f64 {
    let t = x / m;
    if !(t.abs() <= 1.0) {
        return 0.0;
    }
    let s = ((1.0 - t) * (1.0 + t)).sqrt();
    (-beta * (t * t) / (1.0 + s)).exp() * (-2.0 * beta * s).exp_m1() / (-2.0 * beta).exp_m1()
}

/// Evaluates the window at `x`.
pub fn window_eval(spec: &WindowSpec, x: f64) -> Result<f64> {
    spec.validate()?;
    if !x.is_finite() {
        return Err(Error::Domain(format!("window evaluated at non-finite point {x}")));
    }
    Ok(spec.eval_unchecked(x))
}

/// `β / sinh β` without overflow.
fn beta_over_sinh(beta: f64) -> f64 {
    2.0 * beta * (-beta).exp() / -(-2.0 * beta).exp_m1()
}

/// Closed-form Fourier transform of the sinh window at frequency `w`, in the
/// unitary convention `(2π)^{-1/2} ∫ g(x) e^{−iwx} dx`.
pub fn window_fourier_closed_form(spec: &WindowSpec, w: f64) -> Result<f64> {
    spec.validate()?;
    let WindowSpec::Sinh { beta, half_width } = *spec else {
        return Err(Error::UnsupportedWindow(spec.kind().name()));
    };
    if !w.is_finite() {
        return Err(Error::Domain(format!("Fourier transform at non-finite frequency {w}")));
    }
    Ok(sinh_fourier(beta, half_width, w))
}

fn sinh_fourier(beta: f64, m: f64, w: f64) -> f64 {
    let v = (m * w / beta).abs();
    let scale = m * (PI / 2.0).sqrt();
    if v >= 1.0 {
        let z = beta * ((v - 1.0) * (v + 1.0)).sqrt();
        let ratio = if z < BESSEL_RATIO_SERIES_CUTOFF { 0.5 - z * z / 16.0 } else { j1(z) / z };
        scale * beta_over_sinh(beta) * ratio
    } else {
        let y = beta * ((1.0 - v) * (1.0 + v)).sqrt();
        // β/sinh β · I₁(y)/y with the exponentials combined as e^{y−β}
        let denom = -(-2.0 * beta).exp_m1();
        if y < BESSEL_RATIO_SERIES_CUTOFF {
            scale * beta_over_sinh(beta) * (0.5 + y * y / 16.0)
        } else {
            scale * 2.0 * beta * (y - beta).exp() / denom * i1_scaled(y) / y
        }
    }
}

/// `∫_{cutoff}^{∞} |φ̂(w)| dw` for the sinh window, to absolute tolerance `1e-12`.
pub fn leakage_integral(spec: &WindowSpec, cutoff: f64) -> Result<f64> {
    leakage_integral_with_tol(spec, cutoff, 1e-12)
}

pub fn leakage_integral_with_tol(spec: &WindowSpec, cutoff: f64, tol: f64) -> Result<f64> {
    spec.validate()?;
    let WindowSpec::Sinh { beta, half_width } = *spec else {
        return Err(Error::UnsupportedWindow(spec.kind().name()));
    };
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(Error::Domain(format!("leakage cutoff must be positive, got {cutoff}")));
    }
    let v_cut = half_width * cutoff / beta;
    let mut total = 0.0;
    if v_cut < 1.0 {
        // non-oscillatory I₁ branch between the cutoff and v = 1
        let w_one = beta / half_width;
        let r = integrate_adaptive(|w| sinh_fourier(beta, half_width, w).abs(), cutoff, w_one, 0.5 * tol)?;
        total += r.value;
    }
    // in u = β√(v²−1) the rest becomes  β√π/(√2 sinh β) ∫ |J₁(u)| / √(β² + u²) du
    let prefactor = (PI / 2.0).sqrt() * beta_over_sinh(beta);
    if prefactor == 0.0 {
        return Ok(total);
    }
    let u_start = if v_cut > 1.0 { beta * ((v_cut - 1.0) * (v_cut + 1.0)).sqrt() } else { 0.0 };
    let inner = abs_j1_tail(u_start, beta, 0.5 * tol / prefactor)?;
    Ok(total + prefactor * inner)
}

/// `∫_{u0}^{∞} |J₁(u)| / √(β² + u²) du`.
///
/// Integrated panel by panel between consecutive zeros of `J₁` up to a zero
/// `U`, beyond which `|J₁|` is replaced by its mean `(2/π)·√(2/(πu))·M(u)`;
/// the oscillating remainder vanishes at a zero to first order, leaving an
/// `O(U^{-5/2})` error.
fn abs_j1_tail(u0: f64, beta: f64, tol: f64) -> Result<f64> {
    let weight = |u: f64| 1.0 / (beta * beta + u * u).sqrt();
    let integrand = |u: f64| j1(u).abs() * weight(u);
    let u_target = (10.0 / tol).powf(0.4).max(u0 + PI).max(40.0);

    let mut k = first_zero_index_after(u0);
    let mut left = u0;
    let panels = ((u_target - u0) / PI).ceil() + 2.0;
    let panel_tol = 0.5 * tol / panels;
    let mut sum = 0.0;
    let mut comp = 0.0;
    loop {
        let right = j1_zero(k);
        if right > left {
            // relative floor keeps large early panels above the roundoff limit
            let rough = integrand(0.5 * (left + right)) * (right - left);
            let r = integrate_adaptive(integrand, left, right, panel_tol.max(1e-13 * rough))?;
            // Kahan
            let y = r.value - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            left = right;
        }
        k += 1;
        if left >= u_target {
            break;
        }
    }
    let upper = left;
    let mean = integrate_adaptive(
        |s: f64| {
            let u = upper / (s * s);
            let (p, q) = hankel_pq(u, 4.0);
            2.0 * upper.sqrt() / (beta * beta * s.powi(4) + upper * upper).sqrt() * (p * p + q * q).sqrt()
        },
        0.0,
        1.0,
        0.25 * tol,
    )?;
    Ok(sum + FRAC_2_PI * (2.0 / PI).sqrt() * mean.value)
}

/// Smallest `k ≥ 1` whose zero `j₁,ₖ` lies beyond `u`.
fn first_zero_index_after(u: f64) -> usize {
    let mut k = ((u / PI - 0.25).floor().max(1.0)) as usize;
    while k > 1 && j1_zero(k - 1) > u {
        k -= 1;
    }
    while j1_zero(k) <= u {
        k += 1;
    }
    k
}

/// The `k`-th positive zero of `J₁`: McMahon's estimate refined by Illinois
/// regula falsi.
fn j1_zero(k: usize) -> f64 {
    let b = (k as f64 + 0.25) * PI;
    let guess = b - 3.0 / (8.0 * b) + 3.0 / (128.0 * b * b * b);
    let (mut lo, mut hi) = (guess - 0.2, guess + 0.2);
    let (mut flo, mut fhi) = (j1(lo), j1(hi));
    debug_assert!(flo * fhi < 0.0);
    let mut side = 0;
    for _ in 0..100 {
        let mid = (lo * fhi - hi * flo) / (fhi - flo);
        let fm = j1(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm * fhi < 0.0 {
            lo = hi;
            flo = fhi;
            side = 0;
        } else if side == 1 {
            flo *= 0.5;
        } else {
            side = 1;
        }
        hi = mid;
        fhi = fm;
        if (hi - lo).abs() <= 4.0 * f64::EPSILON * hi.abs() {
            break;
        }
    }
    hi
}
