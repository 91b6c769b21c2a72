//! Node sets and the cardinal interpolation bases built on them.
//!
//! Non-periodic nodes `λ_j`, `j = −N..N`, define
//! `F_Λ(z) = sin(πz) ∏_k (z − λ_k)/(z − k)` and the Lagrangian cardinal functions
//!
//! ```text
//! Q_j(x) = R_j(x) sinc(x − j) / (R_j(λ_j) sinc(λ_j − j)),   R_j(x) = ∏_{k≠j} (x − λ_k)/(x − k).
//! ```
//!
//! Periodic nodes `τ_{mn} = t_m + nM` use
//!
//! ```text
//! ψ_{mn}(x) = M ∏_k sin(π(x − τ_{kn})/M) / (π(x − τ_{mn}) ∏_{k≠m} sin(π(t_m − t_k)/M)).
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{sin_pi, sinc_unchecked};

/// Node sets closer than this are rejected as degenerate.
pub const MIN_SEPARATION_FLOOR: f64 = 1e-3;

/// Distance from a pole below which [`r_factor`] refuses to evaluate.
const POLE_TOLERANCE: f64 = 1e-13;

/// Whether constructors enforce the hypotheses of the convergence theorem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TheoryPolicy {
    #[default]
    Enforce,
    AllowOutOfTheory,
}

/// Nodes `λ_j`, `j = −N..N`, perturbing the integers. Stored by index `j`,
/// not by value: adjacent nodes may cross.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNodes")]
pub struct NodeSet {
    nodes: Vec<f64>,
    n_half: usize,
    min_separation: f64,
    perturbation_bound: f64,
    /// `R_j(λ_j) sinc(λ_j − j)` for every `j`.
    #[serde(skip)]
    norms: Vec<f64>,
}

/// Deserialization goes through validation so the cached normalizations are
/// always rebuilt.
#[derive(Deserialize)]
struct RawNodes {
    nodes: Vec<f64>,
}

impl TryFrom<RawNodes> for NodeSet {
    type Error = Error;

    fn try_from(raw: RawNodes) -> Result<Self> {
        NodeSet::new(raw.nodes, TheoryPolicy::AllowOutOfTheory)
    }
}

impl NodeSet {
    /// Validates `nodes` (listed for `j = −N..N`) and precomputes the cardinal
    /// normalizations.
    pub fn new(nodes: Vec<f64>, policy: TheoryPolicy) -> Result<Self> {
        if nodes.len() < 3 || nodes.len().is_multiple_of(2) {
            return Err(Error::Config(format!("need 2N+1 nodes with N >= 1, got {}", nodes.len())));
        }
        if let Some(bad) = nodes.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite node {bad}")));
        }
        let n_half = nodes.len() / 2;
        // neighbours may cross (|ε_j| < 1 allows λ_j > λ_{j+1}); only the
        // pairwise distance matters
        let mut sorted = nodes.clone();
        sorted.sort_by(f64::total_cmp);
        let min_separation = sorted.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min);
        if min_separation < MIN_SEPARATION_FLOOR {
            return Err(Error::DegenerateNodes(format!(
                "minimum separation {min_separation:e} below {MIN_SEPARATION_FLOOR:e}"
            )));
        }
        let perturbation_bound =
            nodes.iter().enumerate().map(|(i, &v)| (v - (i as f64 - n_half as f64)).abs()).fold(0.0, f64::max);
        if perturbation_bound >= 1.0 && policy == TheoryPolicy::Enforce {
            return Err(Error::OutOfTheory(format!("perturbation bound L = {perturbation_bound} is not below 1")));
        }
        let mut set = NodeSet { nodes, n_half, min_separation, perturbation_bound, norms: Vec::new() };
        let norms: Vec<f64> = (0..set.nodes.len()).map(|i| set.numerator(i, set.nodes[i])).collect();
        if let Some((i, d)) = norms.iter().enumerate().find(|(_, d)| !(d.abs() >= 1e-300) || !d.is_finite()) {
            return Err(Error::DegenerateNodes(format!(
                "cardinal normalization {d:e} at j = {}",
                i as i64 - n_half as i64
            )));
        }
        set.norms = norms;
        Ok(set)
    }

    /// Integer nodes `λ_j = j`.
    pub fn uniform(n_half: usize) -> Result<Self> {
        let n = n_half as i64;
        NodeSet::new((-n..=n).map(|j| j as f64).collect(), TheoryPolicy::Enforce)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_half(&self) -> usize {
        self.n_half
    }

    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    /// `L = sup_j |λ_j − j|`.
    pub fn perturbation_bound(&self) -> f64 {
        self.perturbation_bound
    }

    pub fn out_of_theory(&self) -> bool {
        self.perturbation_bound >= 1.0
    }

    /// `λ_j` for `j ∈ [−N, N]`.
    pub fn node(&self, j: i64) -> Option<f64> {
        self.index(j).map(|i| self.nodes[i])
    }

    /// The set mirrored through the origin, `λ'_j = −λ_{−j}`.
    pub fn mirrored(&self) -> Result<Self> {
        let nodes = self.nodes.iter().rev().map(|v| -v).collect();
        NodeSet::new(nodes, TheoryPolicy::AllowOutOfTheory)
    }

    fn index(&self, j: i64) -> Option<usize> {
        let n = self.n_half as i64;
        (-n..=n).contains(&j).then(|| (j + n) as usize)
    }

    /// `R_j(x) sinc(x − j)` for the node at position `i` (so `j = i − N`).
    ///
    /// Writing `k* = round(x)` and `r = x − k*`, the identity
    /// `sin(π(x − j)) = (−1)^{k*−j} sin(πr)` lets the integer pole `1/(x − k*)`
    /// of `R_j` cancel against the sine symbolically:
    ///
    /// ```text
    /// R_j(x) sinc(x − j) = (−1)^{k*−j} sinc(r)/(x − j) · (x − λ_{k*}) · ∏_{k≠j,k*} (x − λ_k)/(x − k)
    /// ```
    ///
    /// when `k*` is a node index other than `j`, and
    /// `(−1)^{k*−j} sin(πr)/(π(x − j)) · ∏_{k≠j} (x − λ_k)/(x − k)` otherwise
    /// (with `sinc(r)` in place of the quotient when `k* = j`). Factors are
    /// multiplied in ascending `k`.
    pub(crate) fn numerator(&self, i: usize, x: f64) -> f64 {
        let n = self.n_half as i64;
        let j = i as i64 - n;
        let k_star = x.round();
        let r = x - k_star;
        let k_star = k_star as i64;
        let sign = if (k_star - j) & 1 == 0 { 1.0 } else { -1.0 };
        let pole = if k_star != j && (-n..=n).contains(&k_star) { Some((k_star + n) as usize) } else { None };

        let lead = match pole {
            Some(_) => sign * sinc_unchecked(r) / (x - j as f64),
            None if k_star == j => sinc_unchecked(r),
            None => sign * (PI * r).sin() / (PI * (x - j as f64)),
        };
        let mut prod = lead;
        for (k, &lam) in self.nodes.iter().enumerate() {
            if k == i {
                continue;
            }
            if Some(k) == pole {
                prod *= x - lam;
            } else {
                prod *= (x - lam) / (x - (k as f64 - n as f64));
            }
        }
        prod
    }

    /// `Q_j(x)` for the node at position `i`.
    #[inline]
    pub(crate) fn cardinal(&self, i: usize, x: f64) -> f64 {
        self.numerator(i, x) / self.norms[i]
    }
}

/// `R_j(x) = ∏_{k≠j} (x − λ_k)/(x − k)`.
pub fn r_factor(nodes: &NodeSet, j: i64, x: f64) -> Result<f64> {
    let i = nodes.index(j).ok_or_else(|| Error::Config(format!("index {j} outside [-{0}, {0}]", nodes.n_half)))?;
    if !x.is_finite() {
        return Err(Error::Domain(format!("R_j at non-finite point {x}")));
    }
    let n = nodes.n_half as i64;
    let mut prod = 1.0;
    for (k, &lam) in nodes.nodes.iter().enumerate() {
        if k == i {
            continue;
        }
        let int_k = k as f64 - n as f64;
        if lam == int_k {
            continue;
        }
        if (x - int_k).abs() <= POLE_TOLERANCE {
            return Err(Error::Singularity { x, pole: int_k as i64, tol: POLE_TOLERANCE });
        }
        prod *= (x - lam) / (x - int_k);
    }
    Ok(prod)
}

/// The Lagrangian cardinal function `Q_j(x)`.
pub fn q_basis(nodes: &NodeSet, j: i64, x: f64) -> Result<f64> {
    let i = nodes.index(j).ok_or_else(|| Error::Config(format!("index {j} outside [-{0}, {0}]", nodes.n_half)))?;
    if !x.is_finite() {
        return Err(Error::Domain(format!("Q_j at non-finite point {x}")));
    }
    Ok(nodes.cardinal(i, x))
}

/// Offsets `0 ≤ t_1 < … < t_M < M` repeated with period `M` over blocks
/// `n = −N..N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOffsets")]
pub struct PeriodicNodeSet {
    offsets: Vec<f64>,
    n_blocks: usize,
    /// `∏_{k≠m} sin(π(t_m − t_k)/M)`.
    #[serde(skip)]
    denominators: Vec<f64>,
}

#[derive(Deserialize)]
struct RawOffsets {
    offsets: Vec<f64>,
    n_blocks: usize,
}

impl TryFrom<RawOffsets> for PeriodicNodeSet {
    type Error = Error;

    fn try_from(raw: RawOffsets) -> Result<Self> {
        PeriodicNodeSet::new(raw.offsets, raw.n_blocks)
    }
}

impl PeriodicNodeSet {
    pub fn new(offsets: Vec<f64>, n_blocks: usize) -> Result<Self> {
        let period = offsets.len();
        if period == 0 {
            return Err(Error::Config("need at least one offset".into()));
        }
        if n_blocks == 0 {
            return Err(Error::Config("need N >= 1 blocks".into()));
        }
        let m = period as f64;
        if !offsets.iter().all(|t| t.is_finite() && (0.0..m).contains(t)) {
            return Err(Error::Config(format!("offsets must lie in [0, {period})")));
        }
        if offsets.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::DegenerateOffsets("offsets must be strictly increasing".into()));
        }
        let denominators: Vec<f64> = (0..period)
            .map(|a| (0..period).filter(|&b| b != a).map(|b| (PI * (offsets[a] - offsets[b]) / m).sin()).product())
            .collect();
        if let Some(d) = denominators.iter().find(|d| !(d.abs() >= 1e-300)) {
            return Err(Error::DegenerateOffsets(format!("offset product {d:e} underflows")));
        }
        Ok(PeriodicNodeSet { offsets, n_blocks, denominators })
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// The period `M`, equal to the number of offsets.
    pub fn period(&self) -> usize {
        self.offsets.len()
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    /// `τ_{mn} = t_m + nM` with `m` counted from 1.
    pub fn tau(&self, m: usize, n: i64) -> f64 {
        self.offsets[m - 1] + n as f64 * self.period() as f64
    }

    /// All nodes in `(n, m)` lexicographic order.
    pub fn locations(&self) -> Vec<f64> {
        let nb = self.n_blocks as i64;
        (-nb..=nb).flat_map(|n| (1..=self.period()).map(move |m| (m, n))).map(|(m, n)| self.tau(m, n)).collect()
    }

    /// `sin(π(x − t_k)/M)` for every offset.
    pub(crate) fn sines(&self, x: f64, out: &mut Vec<f64>) {
        let m = self.period() as f64;
        out.clear();
        out.extend(self.offsets.iter().map(|t| sin_pi((x - t) / m)));
    }

    /// `ψ_{mn}(x)` from precomputed [`sines`](Self::sines), `m` counted from 0.
    ///
    /// Uses `sin(π(x − τ_{kn})/M) = (−1)^n sin(π(x − t_k)/M)`, and fuses the
    /// `k = m` factor with `π(x − τ_{mn})` into `sinc((x − τ_{mn})/M)`:
    ///
    /// ```text
    /// ψ_{mn}(x) = (−1)^{n(M−1)} sinc((x − τ_{mn})/M) ∏_{k≠m} sin(π(x − t_k)/M) / ∏_{k≠m} sin(π(t_m − t_k)/M).
    /// ```
    #[inline]
    pub(crate) fn cardinal(&self, m0: usize, n: i64, x: f64, sines: &[f64]) -> f64 {
        let period = self.period();
        let tau = self.offsets[m0] + n as f64 * period as f64;
        let mut prod = sinc_unchecked((x - tau) / period as f64);
        for (k, s) in sines.iter().enumerate() {
            if k != m0 {
                prod *= s;
            }
        }
        let flip = (n * (period as i64 - 1)) & 1 == 1;
        let v = prod / self.denominators[m0];
        if flip {
            -v
        } else {
            v
        }
    }
}

/// The periodic nonuniform cardinal function `ψ_{mn}(x)`, `m ∈ [1, M]`.
pub fn psi_basis(pnodes: &PeriodicNodeSet, m: usize, n: i64, x: f64) -> Result<f64> {
    if m == 0 || m > pnodes.period() {
        return Err(Error::Config(format!("offset index {m} outside [1, {}]", pnodes.period())));
    }
    if !x.is_finite() {
        return Err(Error::Domain(format!("psi at non-finite point {x}")));
    }
    let mut sines = Vec::with_capacity(pnodes.period());
    pnodes.sines(x, &mut sines);
    Ok(pnodes.cardinal(m - 1, n, x, &sines))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::sinc;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn example_set() -> NodeSet {
        NodeSet::new(vec![-1.2, 0.3, 0.9], TheoryPolicy::Enforce).unwrap()
    }

    fn random_set(rng: &mut ChaCha8Rng, n: i64) -> NodeSet {
        loop {
            let nodes: Vec<f64> = (-n..=n).map(|j| j as f64 + rng.gen_range(-0.9..0.9)).collect();
            if let Ok(set) = NodeSet::new(nodes, TheoryPolicy::Enforce) {
                return set;
            }
        }
    }

    #[test]
    fn r_factor_examples() {
        let uniform = NodeSet::uniform(4).unwrap();
        for j in -4..=4 {
            assert_eq!(r_factor(&uniform, j, 0.37).unwrap(), 1.0);
        }
        let set = example_set();
        let want = (3.2 / 3.0) * (1.1 / 1.0);
        assert!((r_factor(&set, 0, 2.0).unwrap() - want).abs() < 1e-15);
        assert!(r_factor(&set, 0, 0.3).unwrap().is_finite());
    }

    #[test]
    fn r_factor_pole_is_reported() {
        let set = example_set();
        assert!(matches!(r_factor(&set, 0, 1.0), Err(Error::Singularity { pole: 1, .. })));
        assert!(matches!(r_factor(&set, 0, -1.0 + 1e-14), Err(Error::Singularity { pole: -1, .. })));
        // q_basis handles the same point
        assert!(q_basis(&set, 0, 1.0).unwrap().is_finite());
    }

    #[test]
    fn numerator_matches_naive_product_away_from_integers() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let set = random_set(&mut rng, 5);
        for &x in &[-4.37, -0.61, 0.25, 2.83, 6.4] {
            for j in -5..=5i64 {
                let naive = r_factor(&set, j, x).unwrap() * sinc(x - j as f64).unwrap();
                let i = (j + 5) as usize;
                let fused = set.numerator(i, x);
                assert!((naive - fused).abs() <= 1e-13 * naive.abs().max(1.0), "x={x} j={j}");
            }
        }
    }

    #[test]
    fn uniform_nodes_reduce_to_sinc() {
        let n = 6;
        let set = NodeSet::uniform(n).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=400 {
            let x = -(n as f64) + 2.0 * n as f64 * i as f64 / 400.0;
            for j in -(n as i64)..=n as i64 {
                let d = q_basis(&set, j, x).unwrap() - sinc(x - j as f64).unwrap();
                worst = worst.max(d.abs());
            }
        }
        assert!(worst <= 1e-13, "{worst:e}");
    }

    #[test]
    fn cardinal_matrix_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..20 {
            let set = random_set(&mut rng, 8);
            for j in -8..=8i64 {
                for k in -8..=8i64 {
                    let v = q_basis(&set, j, set.node(k).unwrap()).unwrap();
                    let want = if j == k { 1.0 } else { 0.0 };
                    assert!((v - want).abs() <= 1e-10, "j={j} k={k} v={v}");
                }
            }
        }
    }

    #[test]
    fn continuous_across_integer_poles() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let set = random_set(&mut rng, 6);
        for k in -7..=7i64 {
            for j in -6..=6i64 {
                let lo = q_basis(&set, j, k as f64 - 1e-9).unwrap();
                let at = q_basis(&set, j, k as f64).unwrap();
                let hi = q_basis(&set, j, k as f64 + 1e-9).unwrap();
                assert!((lo - hi).abs() <= 1e-6 && (lo - at).abs() <= 1e-6, "k={k} j={j}");
            }
        }
    }

    #[test]
    fn mirror_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let set = random_set(&mut rng, 7);
        let mirror = set.mirrored().unwrap();
        for &x in &[-3.3, -1.0, 0.0, 0.45, 2.0, 5.9] {
            for j in -7..=7i64 {
                let a = q_basis(&set, j, x).unwrap();
                let b = q_basis(&mirror, -j, -x).unwrap();
                assert!((a - b).abs() <= 1e-12, "x={x} j={j}");
            }
        }
    }

    #[test]
    fn node_set_validation() {
        assert!(NodeSet::new(vec![0.0, 1.0], TheoryPolicy::Enforce).is_err());
        assert!(matches!(NodeSet::new(vec![-1.0, 0.5, 0.5], TheoryPolicy::Enforce), Err(Error::DegenerateNodes(_))));
        assert!(matches!(NodeSet::new(vec![-1.0, 0.0, 0.0005], TheoryPolicy::Enforce), Err(Error::DegenerateNodes(_))));
        let wide = vec![-2.1, 0.0, 1.0];
        assert!(matches!(NodeSet::new(wide.clone(), TheoryPolicy::Enforce), Err(Error::OutOfTheory(_))));
        let set = NodeSet::new(wide, TheoryPolicy::AllowOutOfTheory).unwrap();
        assert!(set.out_of_theory());
        assert!((set.perturbation_bound() - 1.1).abs() < 1e-15);
        let set = example_set();
        assert!((set.min_separation() - 0.6).abs() < 1e-15);
        assert!((set.perturbation_bound() - 0.3).abs() < 1e-15);
    }

    fn random_offsets(rng: &mut ChaCha8Rng, m: usize, n: usize) -> PeriodicNodeSet {
        loop {
            let mut t: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..m as f64)).collect();
            t.sort_by(f64::total_cmp);
            if let Ok(p) = PeriodicNodeSet::new(t, n) {
                return p;
            }
        }
    }

    #[test]
    fn psi_cardinal_matrix_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let p = random_offsets(&mut rng, 3, 5);
            for n in -5..=5i64 {
                for m in 1..=3 {
                    for l in -5..=5i64 {
                        for k in 1..=3 {
                            let v = psi_basis(&p, m, n, p.tau(k, l)).unwrap();
                            let want = if (m, n) == (k, l) { 1.0 } else { 0.0 };
                            assert!((v - want).abs() <= 1e-10, "({m},{n}) at ({k},{l}): {v}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn psi_matches_direct_formula() {
        let p = PeriodicNodeSet::new(vec![0.2, 1.1, 2.7], 3).unwrap();
        let direct = |m: usize, n: i64, x: f64| {
            let mm = 3.0;
            let num: f64 = (1..=3).map(|k| (PI / mm * (x - p.tau(k, n))).sin()).product();
            let den: f64 = (1..=3)
                .filter(|&k| k != m)
                .map(|k| (PI / mm * (p.offsets()[m - 1] - p.offsets()[k - 1])).sin())
                .product();
            mm * num / (PI * (x - p.tau(m, n)) * den)
        };
        for &x in &[-5.3, -0.77, 0.5, 3.9, 8.05] {
            for n in -3..=3i64 {
                for m in 1..=3 {
                    let a = psi_basis(&p, m, n, x).unwrap();
                    let b = direct(m, n, x);
                    assert!((a - b).abs() < 1e-13, "x={x} m={m} n={n}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn single_offset_collapses_to_sinc() {
        let p = PeriodicNodeSet::new(vec![0.0], 4).unwrap();
        for i in 0..=200 {
            let x = -5.0 + 0.05 * i as f64 + 1e-3;
            for n in -4..=4i64 {
                let d = psi_basis(&p, 1, n, x).unwrap() - sinc(x - n as f64).unwrap();
                assert!(d.abs() < 1e-14);
            }
        }
        assert_eq!(psi_basis(&p, 1, 2, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn periodic_validation() {
        assert!(PeriodicNodeSet::new(vec![0.5, 0.2, 2.0], 2).is_err());
        assert!(PeriodicNodeSet::new(vec![0.5, 1.0, 3.0], 2).is_err());
        assert!(PeriodicNodeSet::new(vec![], 2).is_err());
        assert!(PeriodicNodeSet::new(vec![0.5], 0).is_err());
        let p = PeriodicNodeSet::new(vec![0.0, 1.5, 2.25], 2).unwrap();
        assert_eq!(p.locations().len(), 15);
        assert_eq!(p.tau(2, -1), -1.5);
        assert!(psi_basis(&p, 0, 0, 0.0).is_err());
        assert!(psi_basis(&p, 4, 0, 0.0).is_err());
    }

    #[test]
    fn serde_roundtrip_rebuilds_caches() {
        let set = NodeSet::new(vec![-1.2, 0.3, 0.9], TheoryPolicy::AllowOutOfTheory).unwrap();
        let back: NodeSet = serde_json::from_str(&serde_json::to_string(&set).unwrap()).unwrap();
        assert_eq!(back, set);
        let p = PeriodicNodeSet::new(vec![0.2, 1.1, 2.7], 3).unwrap();
        let back: PeriodicNodeSet = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<NodeSet>(r#"{"nodes":[0.0,0.0,1.0]}"#).is_err());
    }
}
