use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::CMat;
use crate::error::{Error, Result};
use crate::mode::Mode;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    /// Acts by scaling each coefficient.
    Scalar,
    /// d×d matrix acting by left multiplication.
    Matrix,
}

type Evaluator = dyn Fn(&Mode) -> CMat + Send + Sync;

/// A Fourier multiplier symbol, homogeneous of degree zero on `ℤᵈ \ {0}`.
///
/// The zero mode carries a separate value, zero unless overridden.
#[derive(Clone)]
pub struct Symbol {
    dim: usize,
    kind: SymbolKind,
    label: String,
    eval: Arc<Evaluator>,
    zero_value: CMat,
}

impl Symbol {
    /// Wrap an arbitrary evaluator. The caller is responsible for degree-0
    /// homogeneity; see [`Symbol::check_homogeneous`].
    pub fn from_fn<F>(dim: usize, kind: SymbolKind, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Mode) -> CMat + Send + Sync + 'static,
    {
        let n = if kind == SymbolKind::Scalar { 1 } else { dim };
        Symbol { dim, kind, label: label.into(), eval: Arc::new(f), zero_value: DMatrix::zeros(n, n) }
    }

    pub fn constant(dim: usize, value: Complex64) -> Self {
        Symbol::from_fn(dim, SymbolKind::Scalar, format!("const({value})"), move |_| {
            DMatrix::from_element(1, 1, value)
        })
    }

    pub fn one(dim: usize) -> Self {
        Symbol::constant(dim, Complex64::new(1.0, 0.0))
    }

    /// `Ψ(k) = (k ⊗ k) / (A₀k·k)`, the symbol of `∇(div A₀∇)⁻¹ div` up to sign.
    pub fn oscillation(a0: &DMatrix<f64>) -> Result<Self> {
        let d = a0.nrows();
        if a0.ncols() != d || !(1..=3).contains(&d) {
            return Err(Error::ShapeMismatch(format!("A0 is {}x{}", a0.nrows(), a0.ncols())));
        }
        let a0 = a0.clone();
        Ok(Symbol::from_fn(d, SymbolKind::Matrix, "psi", move |k| {
            let kv = mode_vec(k, d);
            let den = (&a0 * &kv).dot(&kv);
            (&kv * kv.transpose() / den).map(|x| Complex64::new(x, 0.0))
        }))
    }

    /// The scalar `a · Ψ(k) b`.
    pub fn oscillation_contracted(a0: &DMatrix<f64>, left: &[f64], right: &[f64]) -> Result<Self> {
        let psi = Symbol::oscillation(a0)?;
        let d = psi.dim;
        if left.len() != d || right.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: left.len().min(right.len()) });
        }
        let a = DMatrix::from_row_slice(1, d, left).map(|x| Complex64::new(x, 0.0));
        let b = DMatrix::from_column_slice(d, 1, right).map(|x| Complex64::new(x, 0.0));
        Ok(Symbol::from_fn(d, SymbolKind::Scalar, "psi0", move |k| &a * psi.evaluate(k) * &b))
    }

    /// Ratio of two polynomials in the unit vector `ω = k/|k|`, each given as
    /// `(exponents, coefficient)` monomials.
    pub fn rational(
        dim: usize,
        numerator: Vec<(Vec<u32>, f64)>,
        denominator: Vec<(Vec<u32>, f64)>,
    ) -> Result<Self> {
        for (e, _) in numerator.iter().chain(denominator.iter()) {
            if e.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: e.len() });
            }
        }
        let den = if denominator.is_empty() { vec![(vec![0; dim], 1.0)] } else { denominator };
        Ok(Symbol::from_fn(dim, SymbolKind::Scalar, "rational", move |k| {
            let kf = k.as_f64();
            let norm = (k.norm2() as f64).sqrt();
            let omega: Vec<f64> = kf[..dim].iter().map(|x| x / norm).collect();
            let poly = |terms: &[(Vec<u32>, f64)]| -> f64 {
                terms
                    .iter()
                    .map(|(e, c)| c * e.iter().zip(&omega).map(|(&p, w)| w.powi(p as i32)).product::<f64>())
                    .sum()
            };
            DMatrix::from_element(1, 1, Complex64::new(poly(&numerator) / poly(&den), 0.0))
        }))
    }

    pub fn with_zero_value(mut self, value: CMat) -> Result<Self> {
        if value.shape() != self.zero_value.shape() {
            return Err(Error::ShapeMismatch("zero-mode value shape".into()));
        }
        self.zero_value = value;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn zero_value(&self) -> &CMat {
        &self.zero_value
    }

    /// Value at `k`, using the zero-mode convention at `k = 0`.
    pub fn evaluate(&self, k: &Mode) -> CMat {
        if k.is_zero() {
            self.zero_value.clone()
        } else {
            (self.eval)(k)
        }
    }

    /// Checks `s(c·k) = s(k)` for the given modes and scale factors.
    pub fn check_homogeneous(&self, modes: &[Mode], scales: &[i64], tol: f64) -> bool {
        modes.iter().filter(|k| !k.is_zero()).all(|k| {
            let base = self.evaluate(k);
            scales.iter().all(|&c| (self.evaluate(&k.scale(c)) - &base).norm() <= tol * base.norm().max(1.0))
        })
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol").field("dim", &self.dim).field("kind", &self.kind).field("label", &self.label).finish()
    }
}

fn mode_vec(k: &Mode, d: usize) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_iterator(d, k.as_f64()[..d].iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode::box_modes;

    #[test]
    fn psi_at_first_axis_is_projector() {
        let psi = Symbol::oscillation(&DMatrix::identity(2, 2)).unwrap();
        let v = psi.evaluate(&Mode::d2(1, 0));
        assert_eq!(v[(0, 0)].re, 1.0);
        assert_eq!(v[(0, 1)].re, 0.0);
        assert_eq!(v[(1, 1)].re, 0.0);
        assert_eq!(psi.evaluate(&Mode::ZERO).norm(), 0.0);
    }

    #[test]
    fn psi_even_symmetric_homogeneous() {
        let a0 = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0]);
        let psi = Symbol::oscillation(&a0).unwrap();
        let modes = box_modes(3, 2);
        assert!(psi.check_homogeneous(&modes, &[2, 3, 5], 1e-14));
        for k in modes.iter().filter(|k| !k.is_zero()) {
            let v = psi.evaluate(k);
            assert!((&v - psi.evaluate(&-*k)).norm() < 1e-15);
            assert!((&v - v.transpose()).norm() < 1e-15);
        }
    }

    #[test]
    fn rational_symbol_is_direction_only() {
        let s = Symbol::rational(2, vec![(vec![2, 0], 1.0)], vec![]).unwrap();
        assert!(s.check_homogeneous(&box_modes(2, 2), &[2, 7], 1e-14));
        assert!((s.evaluate(&Mode::d2(1, 1))[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!(Symbol::rational(2, vec![(vec![1], 1.0)], vec![]).is_err());
    }

    #[test]
    fn contracted_psi() {
        let s = Symbol::oscillation_contracted(&DMatrix::identity(2, 2), &[1.0, 0.0], &[1.0, 0.0]).unwrap();
        let v = s.evaluate(&Mode::d2(1, 1))[(0, 0)].re;
        assert!((v - 0.5).abs() < 1e-15);
    }
}
