//! Numerics for the circle method applied to the divisor-function
//! exponential sum `M_τ(α) = Σ_{n<=X} τ(n) e(nα)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`]: sieves, Farey fractions, rational approximation, composition counts.
//! * [`expsum`]: direct, hyperbola and FFT-grid evaluation of the sum and the
//!   Dirichlet kernel, plus the explicit pointwise bounds.
//! * [`arcs`]: the major/minor arc dissection on `ℝ/ℤ`.
//! * [`moments`]: exact even moments, grid quadrature, arc splits, singular series.
//! * [`verify`]: ratio tables and sup-ratio scans.
//! * [`cli`]: the `divcircle` command-line front end and report emission.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is on (the default) and plain iterators otherwise. All
//! reductions use a fixed tree, so results do not depend on the thread count.

pub mod arcs;
pub mod arith;
pub mod cli;
pub mod error;
pub mod expsum;
pub mod moments;
pub mod par;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
pub use rustfft::num_complex::Complex64;
