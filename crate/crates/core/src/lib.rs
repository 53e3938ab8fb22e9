//! Limits of products of multiplier-filtered oscillating periodic
//! sequences, and the higher-order correction tensors of the effective
//! diffusion tensor for small-amplitude periodic perturbations
//! `A₀ + γA₁(y) + γ²A₂(y) + γ³A₃(y)`.
//!
//! * [`fourier`]: truncated tensor-valued trigonometric polynomials,
//!   multipliers and FFT-backed constrained lattice sums.
//! * [`hmeasure`]: periodic H-measures as atomic measures on directions and
//!   the closed-form `p`-fold product limits.
//! * [`corrections`]: the correction tensors `A₂∞, A₃∞, A₄∞`.
//! * [`oracle`]: independent checks (spectral cell-problem solver with
//!   γ-fitting, exact 1-D harmonic mean, finite-`n` quadrature).

pub mod corrections;
pub mod error;
pub mod fourier;
pub mod hmeasure;
pub mod mode;
pub mod oracle;
pub mod sum;

pub use error::{Error, Result};
pub use mode::{Lattice, Mode};
