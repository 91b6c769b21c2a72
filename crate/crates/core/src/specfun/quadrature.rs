//! Globally adaptive Gauss–Kronrod (7/15) quadrature with bisection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

/// Evaluation budget used by [`integrate_adaptive`].
pub const DEFAULT_MAX_EVALUATIONS: usize = 1_000_000;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod panel with the QUADPACK error heuristic.
fn gk15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = fc.abs() * WGK[7];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[i] = f1;
        fv2[i] = f2;
        res_k += WGK[i] * (f1 + f2);
        res_abs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            res_g += WG[i / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for i in 0..7 {
        res_asc += WGK[i] * ((fv1[i] - mean).abs() + (fv2[i] - mean).abs());
    }
    let scale = half.abs();
    let value = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel { a, b, value, error: err }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Either limit may be infinite. A half-infinite range `[a, ∞)` is mapped to
/// `[0, 1)` through `x = a + t/(1 − t)`; `(−∞, b]` is mirrored onto that case and
/// `(−∞, ∞)` is split at zero.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    integrate_adaptive_with_budget(f, a, b, tol, DEFAULT_MAX_EVALUATIONS)
}

/// [`integrate_adaptive`] with an explicit evaluation budget.
pub fn integrate_adaptive_with_budget<F>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_evaluations: usize,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    integrate_dyn(&f, a, b, tol, max_evaluations)
}

fn integrate_dyn(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_evaluations: usize) -> Result<QuadratureResult> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if a.is_nan() || b.is_nan() || !(a < b) {
        return Err(Error::Domain(format!("need a < b, got [{a}, {b}]")));
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adapt(f, a, b, tol, max_evaluations),
        (true, false) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                f(a + t / s) / (s * s)
            };
            adapt(&g, 0.0, 1.0, tol, max_evaluations)
        }
        (false, true) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                f(b - t / s) / (s * s)
            };
            adapt(&g, 0.0, 1.0, tol, max_evaluations)
        }
        (false, false) => {
            let left = integrate_dyn(f, a, 0.0, 0.5 * tol, max_evaluations / 2)?;
            let right = integrate_dyn(f, 0.0, b, 0.5 * tol, max_evaluations / 2)?;
            Ok(QuadratureResult {
                value: left.value + right.value,
                abs_error_estimate: left.abs_error_estimate + right.abs_error_estimate,
                evaluations: left.evaluations + right.evaluations,
            })
        }
    }
}

fn adapt<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_evaluations: usize,
) -> Result<QuadratureResult> {
    let first = gk15(f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    // panels too narrow to bisect further
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;

    // updated incrementally and resynchronized periodically against rounding drift
    let mut running_error = first.error;
    let mut steps = 0usize;
    loop {
        steps += 1;
        if running_error <= tol || heap.is_empty() || steps.is_multiple_of(256) {
            let (value, error) = totals(&heap, frozen_value, frozen_error);
            running_error = error;
            let result = QuadratureResult { value, abs_error_estimate: error, evaluations };
            if !value.is_finite() {
                return Err(Error::Convergence { best: result });
            }
            if error <= tol {
                return Ok(result);
            }
            if heap.is_empty() {
                return Err(Error::Convergence { best: result });
            }
        }
        let worst = heap.pop().expect("heap checked non-empty");
        if evaluations + 30 > max_evaluations || !worst.value.is_finite() {
            heap.push(worst);
            let (value, error) = totals(&heap, frozen_value, frozen_error);
            let best = QuadratureResult { value, abs_error_estimate: error, evaluations };
            return Err(Error::Convergence { best });
        }
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b)
            || (worst.b - worst.a) <= 4.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE)
        {
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        let left = gk15(f, worst.a, mid);
        let right = gk15(f, mid, worst.b);
        running_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        evaluations += 30;
    }
}

fn totals(heap: &BinaryHeap<Panel>, frozen_value: f64, frozen_error: f64) -> (f64, f64) {
    // sorted by left endpoint so the sum does not depend on heap layout
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().map(|p| p.value).sum::<f64>() + frozen_value;
    let error = panels.iter().map(|p| p.error).sum::<f64>() + frozen_error;
    (value, error)
}
