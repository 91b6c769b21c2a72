//! Fast invariant suite run by the `selftest` command.
//!
//! Each property is a small deterministic check with a pinned tolerance. A
//! [`Fault`] can be injected to demonstrate that the suite actually detects
//! broken numerics.

use std::f64::consts::PI;
use std::time::Instant;

use serde::Serialize;

use crate::basis::{psi_basis, q_basis, NodeSet, PeriodicNodeSet};
use crate::error::Result;
use crate::reconstruct::{reconstruct_at, take_samples, ReconstructionPlan};
use crate::signals::{generate_nodes, generate_periodic_offsets, SignalSpec};
use crate::specfun::{integrate_adaptive, sinc};
use crate::windows::{leakage_integral, window_eval, window_fourier_closed_form, WindowKind, WindowSpec};
use crate::TheoryPolicy;

pub const CARDINAL_TOL: f64 = 1e-10;
pub const UNIFORM_TOL: f64 = 1e-13;
pub const FOURIER_TOL: f64 = 1e-8;
pub const NODE_EXACTNESS_TOL: f64 = 1e-12;

/// Deliberate defects for exercising the suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Negates the sinh window, `−sinh(β s)/sinh β`.
    WindowSignFlip,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfTestReport {
    pub results: Vec<PropertyResult>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyResult> {
        self.results.iter().filter(|r| !r.passed)
    }
}

pub fn run(fault: Option<Fault>) -> SelfTestReport {
    type Check = fn(Option<Fault>) -> Result<(bool, String)>;
    let checks: [(&'static str, Check); 7] = [
        ("window-normalization", window_normalization),
        ("cardinal-matrix", |_| cardinal_matrices()),
        ("periodic-cardinal-matrix", |_| periodic_cardinal_matrices()),
        ("uniform-reduction", |_| uniform_reduction()),
        ("fourier-vs-quadrature", fourier_vs_quadrature),
        ("leakage-monotone", |_| leakage_monotone()),
        ("node-exactness", |_| node_exactness()),
    ];
    let results = checks
        .iter()
        .map(|&(name, check)| {
            let start = Instant::now();
            let (passed, detail) = match check(fault) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            PropertyResult { name, passed, detail, seconds: start.elapsed().as_secs_f64() }
        })
        .collect();
    SelfTestReport { results }
}

fn window_under_test(spec: &WindowSpec, x: f64, fault: Option<Fault>) -> Result<f64> {
    let v = window_eval(spec, x)?;
    Ok(match (fault, spec) {
        (Some(Fault::WindowSignFlip), WindowSpec::Sinh { .. }) => -v,
        _ => v,
    })
}

fn test_windows() -> Result<Vec<WindowSpec>> {
    let mut out = vec![WindowSpec::None];
    for (beta, m) in [(0.5, 1.0), (4.0, 3.0), (8.0, 9.0), (16.0, 10.0), (60.0, 38.0)] {
        out.push(WindowSpec::sinh(beta, m)?);
    }
    for scale in [0.01, 0.1, 1.0] {
        out.push(WindowSpec::gaussian(scale)?);
    }
    Ok(out)
}

/// `g(0) = 1` and `0 ≤ g ≤ 1` for every window kind.
fn window_normalization(fault: Option<Fault>) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut in_range = true;
    for spec in test_windows()? {
        worst = worst.max((window_under_test(&spec, 0.0, fault)? - 1.0).abs());
        for k in 0..=100 {
            let v = window_under_test(&spec, k as f64 * 0.37, fault)?;
            in_range &= (0.0..=1.0).contains(&v);
        }
    }
    Ok((worst == 0.0 && in_range, format!("max |g(0) − 1| = {worst:e}, range ok: {in_range}")))
}

/// `Q_j(λ_k) = δ_jk` for 20 random sets at `N = 8`.
pub fn cardinal_matrices() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let set = generate_nodes(8, seed, 1e-3, 0.999)?;
        for (a, &x) in set.nodes().iter().enumerate() {
            for b in 0..set.nodes().len() {
                let q = q_basis(&set, b as i64 - 8, x)?;
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((q - want).abs());
            }
        }
    }
    Ok((worst <= CARDINAL_TOL, format!("max |Q_j(λ_k) − δ_jk| = {worst:e}")))
}

/// `ψ_{mn}(τ_{m'n'}) = δ` for 20 random offset sets at `M = 3`, `N = 5`.
pub fn periodic_cardinal_matrices() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let p = generate_periodic_offsets(3, 5, seed, 1e-3)?;
        worst = worst.max(periodic_identity_defect(&p)?);
    }
    Ok((worst <= CARDINAL_TOL, format!("max |ψ_mn(τ) − δ| = {worst:e}")))
}

fn periodic_identity_defect(p: &PeriodicNodeSet) -> Result<f64> {
    let nb = p.n_blocks() as i64;
    let mut worst: f64 = 0.0;
    for n in -nb..=nb {
        for m in 1..=p.period() {
            let x = p.tau(m, n);
            for n2 in -nb..=nb {
                for m2 in 1..=p.period() {
                    let want = if (m, n) == (m2, n2) { 1.0 } else { 0.0 };
                    worst = worst.max((psi_basis(p, m2, n2, x)? - want).abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Integer nodes reduce `Q_j` to `sinc(x − j)` on a 401-point grid.
pub fn uniform_reduction() -> Result<(bool, String)> {
    let set = NodeSet::uniform(8)?;
    let mut worst: f64 = 0.0;
    for k in 0..401 {
        let x = -10.0 + 20.0 * k as f64 / 400.0;
        for j in -8..=8i64 {
            worst = worst.max((q_basis(&set, j, x)? - sinc(x - j as f64)?).abs());
        }
    }
    Ok((worst <= UNIFORM_TOL, format!("max |Q_j − sinc| = {worst:e}")))
}

/// Closed-form sinh window transform against `(2/π)^{1/2} ∫_0^m g(x) cos(wx) dx` at 50
/// frequencies for each `β ∈ {4, 8, 16}` (`m = 2β/π`, spanning `|v| ≤ 4`).
pub fn fourier_vs_quadrature(fault: Option<Fault>) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for beta in [4.0, 8.0, 16.0] {
        let m = 2.0 * beta / PI;
        let spec = WindowSpec::sinh(beta, m)?;
        for k in 0..50 {
            let w = 4.0 * beta / m * k as f64 / 49.0;
            let closed = window_fourier_closed_form(&spec, w)?;
            let integrand = |x: f64| window_under_test(&spec, x, fault).unwrap_or(f64::NAN) * (w * x).cos();
            let quad = 2.0 * integrate_adaptive(integrand, 0.0, m, 1e-12)?.value / (2.0 * PI).sqrt();
            worst = worst.max((closed - quad).abs());
        }
    }
    Ok((worst <= FOURIER_TOL, format!("max |closed − quadrature| = {worst:e}")))
}

/// Spectral leakage beyond `π − δ` shrinks as `β` grows.
pub fn leakage_monotone() -> Result<(bool, String)> {
    let cutoff = PI - PI / 2.0;
    let mut values = Vec::new();
    for beta in [4.0, 8.0, 16.0] {
        let m = beta / cutoff;
        values.push(leakage_integral(&WindowSpec::sinh(beta, m)?, cutoff)?);
    }
    let ok = values.windows(2).all(|p| p[1] < p[0]) && values.iter().all(|&v| v > 0.0);
    let shown: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    Ok((ok, format!("leakage at β = 4, 8, 16: {}", shown.join(", "))))
}

/// Reconstructions reproduce the samples at in-support nodes.
pub fn node_exactness() -> Result<(bool, String)> {
    let f = SignalSpec::benchmark(PI / 2.0)?;
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let nodes = generate_nodes(10, seed, 1e-3, 0.999)?;
        for kind in [WindowKind::None, WindowKind::Gaussian, WindowKind::Sinh] {
            let plan = ReconstructionPlan::non_periodic(nodes.clone(), PI / 2.0, kind, TheoryPolicy::Enforce)?;
            let s = take_samples(&plan, &f)?;
            let reach = plan.window().support_radius().unwrap_or(f64::INFINITY);
            for (&x, &v) in s.locations.iter().zip(&s.values) {
                if x.abs() < reach {
                    worst = worst.max((reconstruct_at(&plan, &s, x)? - v).abs());
                }
            }
        }
    }
    Ok((worst <= NODE_EXACTNESS_TOL, format!("max |S(λ_k) − f(λ_k)| = {worst:e}")))
}
