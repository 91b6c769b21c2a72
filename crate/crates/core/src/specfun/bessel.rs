use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Upper end of the power-series regime for `J₁`.
const J1_SERIES_MAX: f64 = 8.0;
/// Upper end of the backward-recurrence regime; Hankel's expansion beyond.
const J1_RECURRENCE_MAX: f64 = 25.0;
/// `I₁` switches from its series to the large-argument expansion here.
const I1_SERIES_MAX: f64 = 20.0;

/// Bessel function of the first kind of order one.
pub fn bessel_j1(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("J1 of non-finite argument {x}")));
    }
    Ok(j1(x))
}

pub(crate) fn j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= J1_SERIES_MAX {
        j1_series(ax)
    } else if ax <= J1_RECURRENCE_MAX {
        j1_miller(ax)
    } else {
        j1_hankel(ax)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// `Σ (−1)^k (x/2)^{2k+1} / (k!(k+1)!)`.
fn j1_series(x: f64) -> f64 {
    let h = 0.5 * x;
    let q = -h * h;
    let mut term = h;
    let mut sum = h;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Miller's backward recurrence normalized by `J₀ + 2 Σ J₂ₖ = 1`.
fn j1_miller(x: f64) -> f64 {
    let start = 2 * ((x as usize + 40) / 2);
    let two_over_x = 2.0 / x;
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k
    let mut norm = 0.0;
    let mut j1_val = 0.0;
    for k in (1..=start).rev() {
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        // cur now holds J_{k-1}
        let order = k - 1;
        if order == 1 {
            j1_val = cur;
        }
        if order >= 2 && order % 2 == 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            j1_val *= 1e-250;
        }
    }
    norm += cur;
    j1_val / norm
}

/// Hankel's expansion in amplitude/phase form.
fn j1_hankel(x: f64) -> f64 {
    let (p, q) = hankel_pq(x, 4.0);
    let (s, c) = x.sin_cos();
    // χ = x − 3π/4
    let cos_chi = (s - c) * FRAC_1_SQRT_2;
    let sin_chi = -(s + c) * FRAC_1_SQRT_2;
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// Asymptotic series `P(x)`, `Q(x)` for order `ν` with `μ = 4ν²`, truncated at
/// the smallest term.
pub(crate) fn hankel_pq(x: f64, mu: f64) -> (f64, f64) {
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 1..120 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * eight_x);
        let mag = term.abs();
        if mag > last || mag < 1e-18 {
            break;
        }
        last = mag;
        // term k contributes to P (k even) or Q (k odd), with sign (−1)^{⌊k/2⌋}
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
    }
    (p, q)
}

/// `e^{−x} I₁(x)` for `x ≥ 0`.
pub(crate) fn i1_scaled(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x <= I1_SERIES_MAX {
        let h = 0.5 * x;
        let q = h * h;
        let mut term = h;
        let mut sum = h;
        for k in 1..200 {
            let kf = k as f64;
            term *= q / (kf * (kf + 1.0));
            sum += term;
            if term <= 1e-17 * sum {
                break;
            }
        }
        sum * (-x).exp()
    } else {
        let eight_x = 8.0 * x;
        let mut sum = 1.0;
        let mut term = 1.0_f64;
        let mut last = f64::INFINITY;
        for k in 1..120 {
            let odd = (2 * k - 1) as f64;
            term *= -(4.0 - odd * odd) / (k as f64 * eight_x);
            if term.abs() > last || term.abs() < 1e-18 {
                break;
            }
            last = term.abs();
            sum += term;
        }
        sum / (2.0 * PI * x).sqrt()
    }
}
