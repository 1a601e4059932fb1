//! Multivariate Davenport series toolkit.
//!
//! A Davenport series is a sum `f(x) = Σ aₙ {n·x}` over integer frequency
//! vectors `n ∈ ℤᵈ \ {0}`, where `{·}` is the centered sawtooth. This crate
//! provides:
//!
//! - exact multivariate number theory for the coefficient calculus
//!   ([`arith`]: gcd of lattice vectors, Möbius function, divisor-power sums,
//!   canonical hyperplane indices);
//! - coefficient families with decay/sparsity descriptors ([`coeffs`]);
//! - the jump operator, its Möbius inverse, subsampling and the
//!   Davenport↔Fourier conversions ([`transforms`]);
//! - pointwise and grid evaluation of partial sums and oscillations
//!   ([`eval`]);
//! - pointwise Hölder exponents from closed formulas plus an independent
//!   empirical oracle ([`regularity`]);
//! - multifractal spectrum prediction and a coarse-grained box-counting
//!   estimator ([`spectrum`]);
//! - Sobolev-space classification of the series from its Fourier
//!   coefficients ([`sobolev`]).
//!
//! Every truncated quantity carries its truncation radius and, where an
//! infinite sum was cut, an explicit tail bound. Estimators are deterministic
//! for a fixed seed.

pub mod arith;
pub mod coeffs;
pub mod error;
pub mod eval;
pub mod regularity;
pub mod sobolev;
pub mod spectrum;
pub mod transforms;

#[cfg(feature = "testkit")]
pub mod testkit;

pub use arith::{HyperplaneIndex, LatticeVector};
pub use coeffs::{CoefficientFamily, RegularityProfile};
pub use error::{Error, Result};
pub use eval::{GridSpec, OscillationReport};
pub use regularity::ExponentEstimate;
pub use spectrum::{EmpiricalSpectrum, SpectrumPrediction};
pub use transforms::LatticeMap;
