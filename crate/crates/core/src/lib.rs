//! Reconstruction of bandlimited functions from finitely many nonuniform
//! samples with sinh- and Gaussian-regularized Lagrangian sampling series.
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: sinc, Bessel `J₁`, adaptive quadrature.
//! - [`windows`]: the regularization windows and Fourier-side diagnostics.
//! - [`basis`]: node sets and the cardinal Lagrangian bases.
//! - [`signals`]: test functions and seeded node generators.
//! - [`reconstruct`]: plans, samples and evaluation of the windowed series.
//! - [`bench`]: the experiment harness, report formats and table layouts.
//! - [`selftest`]: the fast invariant suite behind the `selftest` command.

// NaN-rejecting range checks are written as negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod bench;
pub mod error;
pub mod reconstruct;
pub mod selftest;
pub mod signals;
pub mod specfun;
pub mod windows;

pub use basis::{NodeSet, PeriodicNodeSet, TheoryPolicy};
pub use error::{Error, Result};
pub use reconstruct::{Family, ReconstructionPlan, SampleSet};
pub use signals::SignalSpec;
pub use windows::{WindowKind, WindowSpec};
