//! Bandlimited test signals and seeded generators for random node sets.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`). A generator call
//! seeds it with `seed_from_u64(seed)` and selects a stream that encodes what
//! is being drawn: `n_half` for non-periodic nodes, `2^32 + 2^16·M + N` for
//! periodic offsets. The experiment harness derives `seed` as `base_seed ^ trial`, so
//! all windows and bandwidths of one trial share the same nodes.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{NodeSet, PeriodicNodeSet, TheoryPolicy};
use crate::error::{Error, Result};

/// Rejected draws tolerated before a generator gives up.
pub const MAX_DRAWS: usize = 1000;

const PERIODIC_STREAM_BASE: u64 = 1 << 32;

/// One `amplitude · sin(δ(x − center))/(δ(x − center))` component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SincTerm {
    pub amplitude: f64,
    pub center: f64,
}

/// A bandlimited test function with bandwidth `δ ∈ (0, π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalSpec {
    /// `(π(5δ + sin δ))^{-1/2} (2 sin(δx)/x + sin(δ(x − 1))/(x − 1))`.
    BenchmarkFunction { delta: f64 },
    /// `sin(δx)/(δx)`.
    SincPure { delta: f64 },
    /// A finite sum of shifted `sin(δu)/(δu)` terms.
    Custom { delta: f64, terms: Vec<SincTerm> },
}

impl SignalSpec {
    pub fn benchmark(delta: f64) -> Result<Self> {
        let s = SignalSpec::BenchmarkFunction { delta };
        s.validate()?;
        Ok(s)
    }

    pub fn bandwidth(&self) -> f64 {
        match *self {
            SignalSpec::BenchmarkFunction { delta }
            | SignalSpec::SincPure { delta }
            | SignalSpec::Custom { delta, .. } => delta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let delta = self.bandwidth();
        if !(delta > 0.0 && delta < PI) {
            return Err(Error::Config(format!("bandwidth must lie in (0, π), got {delta}")));
        }
        if let SignalSpec::Custom { terms, .. } = self {
            if terms.iter().any(|t| !t.amplitude.is_finite() || !t.center.is_finite()) {
                return Err(Error::Config("custom signal terms must be finite".into()));
            }
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        match self {
            SignalSpec::BenchmarkFunction { delta } => {
                let d = *delta;
                let scale = 1.0 / (PI * (5.0 * d + d.sin())).sqrt();
                scale * (2.0 * sin_ratio(d, x) + sin_ratio(d, x - 1.0))
            }
            SignalSpec::SincPure { delta } => sin_ratio(*delta, x) / delta,
            SignalSpec::Custom { delta, terms } => {
                terms.iter().map(|t| t.amplitude * sin_ratio(*delta, x - t.center) / delta).sum()
            }
        }
    }
}

/// `sin(δu)/u`, with the Taylor polynomial `δ − δ³u²/6 + δ⁵u⁴/120` near zero.
#[inline]
fn sin_ratio(delta: f64, u: f64) -> f64 {
    if u.abs() < 1e-6 {
        let d2 = delta * delta;
        let u2 = u * u;
        delta * (1.0 - d2 * u2 / 6.0 + d2 * d2 * u2 * u2 / 120.0)
    } else {
        (delta * u).sin() / u
    }
}

/// Exact value of the signal at `x`.
pub fn signal_eval(spec: &SignalSpec, x: f64) -> Result<f64> {
    spec.validate()?;
    if !x.is_finite() {
        return Err(Error::Domain(format!("signal evaluated at non-finite point {x}")));
    }
    Ok(spec.eval_unchecked(x))
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `λ_j = j + ε_j`, `ε_j ~ U(−max_perturb, max_perturb)`, redrawing the
/// whole set until every pairwise distance is at least `min_sep`.
pub fn generate_nodes(n_half: usize, rng_seed: u64, min_sep: f64, max_perturb: f64) -> Result<NodeSet> {
    if n_half == 0 {
        return Err(Error::Config("N must be at least 1".into()));
    }
    if !(min_sep > 0.0 && min_sep < 1.0) {
        return Err(Error::Config(format!("min_sep must lie in (0, 1), got {min_sep}")));
    }
    if !(0.0..1.0).contains(&max_perturb) {
        return Err(Error::Config(format!("max_perturb must lie in [0, 1), got {max_perturb}")));
    }
    let n = n_half as i64;
    if max_perturb == 0.0 {
        return NodeSet::uniform(n_half);
    }
    let mut rng = stream_rng(rng_seed, n_half as u64);
    for _ in 0..MAX_DRAWS {
        let nodes: Vec<f64> = (-n..=n).map(|j| j as f64 + rng.gen_range(-max_perturb..max_perturb)).collect();
        match NodeSet::new(nodes, TheoryPolicy::Enforce) {
            Ok(set) if set.min_separation() >= min_sep => return Ok(set),
            Ok(_) | Err(Error::DegenerateNodes(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::GenerationFailure { attempts: MAX_DRAWS })
}

/// Draws `M` offsets i.i.d. uniform on `[0, M)`, sorted, redrawing until all
/// cyclic gaps (including `M − t_M + t_1`) are at least `min_gap`.
pub fn generate_periodic_offsets(m: usize, n_blocks: usize, rng_seed: u64, min_gap: f64) -> Result<PeriodicNodeSet> {
    if m == 0 {
        return Err(Error::Config("M must be at least 1".into()));
    }
    if !(min_gap > 0.0 && min_gap.is_finite()) {
        return Err(Error::Config(format!("min_gap must be positive, got {min_gap}")));
    }
    let period = m as f64;
    let mut rng = stream_rng(rng_seed, PERIODIC_STREAM_BASE + ((m as u64) << 16) + n_blocks as u64);
    for _ in 0..MAX_DRAWS {
        let mut t: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..period)).collect();
        t.sort_by(f64::total_cmp);
        let wrap = period - t[m - 1] + t[0];
        let ok = wrap >= min_gap && t.windows(2).all(|p| p[1] - p[0] >= min_gap);
        if ok {
            match PeriodicNodeSet::new(t, n_blocks) {
                Ok(p) => return Ok(p),
                Err(Error::DegenerateOffsets(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Err(Error::GenerationFailure { attempts: MAX_DRAWS })
}
