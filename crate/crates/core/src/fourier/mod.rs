//! Truncated tensor-valued Fourier series on the unit torus.
//!
//! A [`TrigPoly`] stores sparse coefficients `û_k` for modes inside a
//! [`Lattice`](crate::mode::Lattice) box. Products and zero-mode sums of
//! products ("constrained lattice sums" `Σ_{k₁+…+k_p=0}`) are evaluated on a
//! zero-padded grid by FFT, with direct nested-loop versions kept alongside
//! as reference paths.

mod grid;
mod ops;
mod symbol;
mod trigpoly;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use grid::{fft_size_for, FieldGrid};
pub use ops::{
    constrained_sum, constrained_sum_direct, contract_pair, multiplier_apply, poly_product,
    poly_product_direct, Contraction,
};
pub use symbol::{Symbol, SymbolKind};
pub use trigpoly::{Flags, Shape, TrigPoly};

/// Complex tensor coefficient: 1×1 (scalar), d×1 (vector) or d×d (matrix).
pub type CMat = DMatrix<Complex64>;
