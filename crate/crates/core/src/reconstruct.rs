//! Plans, sample sets and evaluation of the regularized sampling series
//!
//! ```text
//! S(x) = Σ_j f(λ_j) Q_j(x) g(x − λ_j)                 (non-periodic)
//! S(x) = Σ_n Σ_m f(τ_{mn}) ψ_{mn}(x) g(x − τ_{mn})     (periodic)
//! ```
//!
//! Terms are accumulated in ascending `j` (lexicographic `(n, m)`) with a
//! single Kahan accumulator. Terms whose window factor is exactly zero are
//! skipped before the basis is evaluated, which is what makes the sinh series
//! a finite sum independent of the truncation.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{NodeSet, PeriodicNodeSet, TheoryPolicy};
use crate::error::{Error, Result};
use crate::signals::SignalSpec;
use crate::windows::{WindowKind, WindowSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    NonPeriodic,
    Periodic,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::NonPeriodic => "nonperiodic",
            Family::Periodic => "periodic",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "nonperiodic" => Ok(Family::NonPeriodic),
            "periodic" => Ok(Family::Periodic),
            other => Err(Error::Config(format!("unknown family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PlanNodes {
    NonPeriodic(NodeSet),
    Periodic(PeriodicNodeSet),
}

/// Everything needed to evaluate one regularized series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionPlan {
    nodes: PlanNodes,
    window: WindowSpec,
    n_half: usize,
    bandwidth_delta: f64,
    beta: f64,
    out_of_theory: bool,
}

impl ReconstructionPlan {
    /// `S_{f,Q,N,g}` over `nodes`, with the window parameters derived from
    /// `N` and `δ`: sinh `β = (N−1)(π−δ)`, half-width `N−1`; Gaussian scale
    /// `(π−δ)/(2N−2)`.
    pub fn non_periodic(nodes: NodeSet, delta: f64, window: WindowKind, policy: TheoryPolicy) -> Result<Self> {
        check_delta(delta)?;
        let n_half = nodes.n_half();
        let beta = (n_half as f64 - 1.0) * (PI - delta);
        let out_of_theory = hypotheses_fail(window, beta) || nodes.out_of_theory();
        if out_of_theory && policy == TheoryPolicy::Enforce {
            return Err(out_of_theory_error(beta, nodes.perturbation_bound()));
        }
        let spec = derive_window(window, beta, n_half as f64 - 1.0, (PI - delta) / (2.0 * n_half as f64 - 2.0))?;
        Ok(ReconstructionPlan {
            nodes: PlanNodes::NonPeriodic(nodes),
            window: spec,
            n_half,
            bandwidth_delta: delta,
            beta,
            out_of_theory,
        })
    }

    /// `S_{f,ψ,N,g}` over `τ_{mn}`, with sinh `Mβ` and half-width `(N−1)M`, or
    /// Gaussian scale `(π−δ)/(2M(N−1))`.
    pub fn periodic(nodes: PeriodicNodeSet, delta: f64, window: WindowKind, policy: TheoryPolicy) -> Result<Self> {
        check_delta(delta)?;
        let n_half = nodes.n_blocks();
        let m = nodes.period() as f64;
        let beta = (n_half as f64 - 1.0) * (PI - delta);
        let out_of_theory = hypotheses_fail(window, beta);
        if out_of_theory && policy == TheoryPolicy::Enforce {
            return Err(out_of_theory_error(beta, 0.0));
        }
        let spec = derive_window(
            window,
            m * beta,
            (n_half as f64 - 1.0) * m,
            (PI - delta) / (2.0 * m * (n_half as f64 - 1.0)),
        )?;
        Ok(ReconstructionPlan {
            nodes: PlanNodes::Periodic(nodes),
            window: spec,
            n_half,
            bandwidth_delta: delta,
            beta,
            out_of_theory,
        })
    }

    pub fn family(&self) -> Family {
        match self.nodes {
            PlanNodes::NonPeriodic(_) => Family::NonPeriodic,
            PlanNodes::Periodic(_) => Family::Periodic,
        }
    }

    pub fn nodes(&self) -> &PlanNodes {
        &self.nodes
    }

    pub fn window(&self) -> &WindowSpec {
        &self.window
    }

    pub fn n_half(&self) -> usize {
        self.n_half
    }

    /// `M` for periodic plans, 1 otherwise.
    pub fn period(&self) -> usize {
        match &self.nodes {
            PlanNodes::NonPeriodic(_) => 1,
            PlanNodes::Periodic(p) => p.period(),
        }
    }

    pub fn bandwidth_delta(&self) -> f64 {
        self.bandwidth_delta
    }

    /// `β = (N−1)(π−δ)`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// True when `β < 1` (regularized windows) or `L ≥ 1`.
    pub fn out_of_theory(&self) -> bool {
        self.out_of_theory
    }

    /// Sample locations in summation order.
    pub fn locations(&self) -> Vec<f64> {
        match &self.nodes {
            PlanNodes::NonPeriodic(set) => set.nodes().to_vec(),
            PlanNodes::Periodic(p) => p.locations(),
        }
    }

    fn term_count(&self) -> usize {
        match &self.nodes {
            PlanNodes::NonPeriodic(set) => set.nodes().len(),
            PlanNodes::Periodic(p) => p.period() * (2 * p.n_blocks() + 1),
        }
    }

    /// Series value at `x`; `values` must follow [`locations`](Self::locations).
    fn eval(&self, values: &[f64], locations: &[f64], x: f64, scratch: &mut Vec<f64>) -> f64 {
        let mut acc = Kahan::default();
        match &self.nodes {
            PlanNodes::NonPeriodic(set) => {
                for (i, (&v, &loc)) in values.iter().zip(locations).enumerate() {
                    let g = self.window.eval_unchecked(x - loc);
                    if g == 0.0 {
                        continue;
                    }
                    acc.add(v * set.cardinal(i, x) * g);
                }
            }
            PlanNodes::Periodic(p) => {
                p.sines(x, scratch);
                let period = p.period();
                let nb = p.n_blocks() as i64;
                let mut idx = 0;
                for n in -nb..=nb {
                    for m0 in 0..period {
                        let g = self.window.eval_unchecked(x - locations[idx]);
                        if g != 0.0 {
                            acc.add(values[idx] * p.cardinal(m0, n, x, scratch) * g);
                        }
                        idx += 1;
                    }
                }
            }
        }
        acc.sum()
    }

    /// Sequential grid evaluation, bitwise equal to [`reconstruct_grid`].
    pub(crate) fn eval_grid_serial(&self, samples: &SampleSet, grid: &[f64]) -> Result<Vec<f64>> {
        self.check_samples(samples)?;
        let mut scratch = Vec::new();
        Ok(grid.iter().map(|&x| self.eval(&samples.values, &samples.locations, x, &mut scratch)).collect())
    }

    fn check_samples(&self, samples: &SampleSet) -> Result<()> {
        if samples.locations.len() != samples.values.len() {
            return Err(Error::Consistency(format!(
                "{} locations but {} values",
                samples.locations.len(),
                samples.values.len()
            )));
        }
        if samples.locations.len() != self.term_count() {
            return Err(Error::Consistency(format!(
                "plan has {} nodes, samples have {}",
                self.term_count(),
                samples.locations.len()
            )));
        }
        if samples.locations != self.locations() {
            return Err(Error::Consistency("sample locations differ from the plan's nodes".into()));
        }
        Ok(())
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < PI {
        Ok(())
    } else {
        Err(Error::Config(format!("bandwidth must lie in (0, π), got {delta}")))
    }
}

fn hypotheses_fail(window: WindowKind, beta: f64) -> bool {
    window != WindowKind::None && beta < 1.0
}

fn out_of_theory_error(beta: f64, l: f64) -> Error {
    Error::OutOfTheory(format!("requires β = (N−1)(π−δ) >= 1 and L < 1, have β = {beta:.4}, L = {l:.4}"))
}

fn derive_window(kind: WindowKind, beta: f64, half_width: f64, variance_scale: f64) -> Result<WindowSpec> {
    match kind {
        WindowKind::None => Ok(WindowSpec::None),
        WindowKind::Sinh => WindowSpec::sinh(beta, half_width),
        WindowKind::Gaussian => WindowSpec::gaussian(variance_scale),
    }
}

#[derive(Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    fn sum(&self) -> f64 {
        self.sum
    }
}

/// Sample locations and the signal values observed there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub locations: Vec<f64>,
    pub values: Vec<f64>,
}

/// Samples `signal` at the plan's nodes.
pub fn take_samples(plan: &ReconstructionPlan, signal: &SignalSpec) -> Result<SampleSet> {
    signal.validate()?;
    let locations = plan.locations();
    let values = locations.iter().map(|&x| signal.eval_unchecked(x)).collect();
    Ok(SampleSet { locations, values })
}

/// The regularized series at `x`.
pub fn reconstruct_at(plan: &ReconstructionPlan, samples: &SampleSet, x: f64) -> Result<f64> {
    plan.check_samples(samples)?;
    if !x.is_finite() {
        return Err(Error::Domain(format!("reconstruction at non-finite point {x}")));
    }
    let mut scratch = Vec::new();
    Ok(plan.eval(&samples.values, &samples.locations, x, &mut scratch))
}

/// [`reconstruct_at`] over a grid, evaluated in parallel; each point is an
/// independent sequential sum, so the output does not depend on the thread
/// count.
pub fn reconstruct_grid(plan: &ReconstructionPlan, samples: &SampleSet, grid: &[f64]) -> Result<Vec<f64>> {
    plan.check_samples(samples)?;
    if let Some(bad) = grid.iter().find(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("non-finite grid point {bad}")));
    }
    Ok(grid
        .par_iter()
        .map_init(Vec::new, |scratch, &x| plan.eval(&samples.values, &samples.locations, x, scratch))
        .collect())
}

/// Main term of the error bound: `exp(−(N−1)(π−δ))`, or `exp(−(N−1)M(π−δ))`
/// for periodic plans.
pub fn theoretical_bound_main(plan: &ReconstructionPlan) -> f64 {
    (-(plan.period() as f64) * plan.beta).exp()
}
