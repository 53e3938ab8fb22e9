use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::CMat;
use crate::error::{Error, Result};
use crate::mode::{Lattice, Mode};

/// Tensor shape of every coefficient of a [`TrigPoly`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Scalar,
    Vector,
    Matrix,
}

impl Shape {
    pub fn dims(&self, d: usize) -> (usize, usize) {
        match self {
            Shape::Scalar => (1, 1),
            Shape::Vector => (d, 1),
            Shape::Matrix => (d, d),
        }
    }

    /// Infer the shape of an `r × c` coefficient in dimension `d`.
    pub fn from_dims(r: usize, c: usize, d: usize) -> Result<Shape> {
        match (r, c) {
            (1, 1) => Ok(Shape::Scalar),
            (r, 1) if r == d => Ok(Shape::Vector),
            (r, c) if r == d && c == d => Ok(Shape::Matrix),
            _ => Err(Error::ShapeMismatch(format!("{r}x{c} is not a tensor shape in d={d}"))),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            Shape::Scalar => 0,
            Shape::Vector => 1,
            Shape::Matrix => 2,
        }
    }
}

/// Validated claims about a polynomial. Set only through the checking
/// methods on [`TrigPoly`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Flags {
    pub real: bool,
    pub zero_mean: bool,
}

/// A truncated trigonometric polynomial `u(x) = Σ_k û_k e^{2πi k·x}` with
/// tensor-valued coefficients. Absent modes are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    lattice: Lattice,
    shape: Shape,
    coeffs: BTreeMap<Mode, CMat>,
    flags: Flags,
}

impl TrigPoly {
    pub fn zero(lattice: Lattice, shape: Shape) -> Self {
        TrigPoly { lattice, shape, coeffs: BTreeMap::new(), flags: Flags::default() }
    }

    /// Build from `(mode, coefficient)` pairs; repeated modes are rejected.
    pub fn from_coeffs<I>(lattice: Lattice, shape: Shape, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Mode, CMat)>,
    {
        let mut p = TrigPoly::zero(lattice, shape);
        for (k, c) in entries {
            if p.coeffs.contains_key(&k) {
                return Err(Error::DuplicateMode(k.to_string()));
            }
            p.insert(k, c)?;
        }
        Ok(p)
    }

    /// Scalar polynomial from `(mode, value)` pairs.
    pub fn scalar<I>(lattice: Lattice, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Mode, Complex64)>,
    {
        TrigPoly::from_coeffs(
            lattice,
            Shape::Scalar,
            entries.into_iter().map(|(k, v)| (k, DMatrix::from_element(1, 1, v))),
        )
    }

    /// Set the coefficient of `k`, replacing any previous value.
    pub fn insert(&mut self, k: Mode, c: CMat) -> Result<()> {
        if !self.lattice.contains(&k) {
            return Err(Error::ModeOutOfRange(k.to_string()));
        }
        let (r, cc) = self.shape.dims(self.dim());
        if c.nrows() != r || c.ncols() != cc {
            return Err(Error::ShapeMismatch(format!(
                "coefficient {}x{} for a {:?} polynomial in d={}",
                c.nrows(),
                c.ncols(),
                self.shape,
                self.dim()
            )));
        }
        self.flags = Flags::default();
        self.coeffs.insert(k, c);
        Ok(())
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn trunc(&self) -> usize {
        self.lattice.trunc()
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn coeff_dims(&self) -> (usize, usize) {
        self.shape.dims(self.dim())
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn coeff(&self, k: &Mode) -> Option<&CMat> {
        self.coeffs.get(k)
    }

    pub fn coeff_or_zero(&self, k: &Mode) -> CMat {
        self.coeffs.get(k).cloned().unwrap_or_else(|| self.zero_coeff())
    }

    pub fn zero_coeff(&self) -> CMat {
        let (r, c) = self.coeff_dims();
        DMatrix::zeros(r, c)
    }

    /// Stored `(mode, coefficient)` pairs in lexicographic mode order.
    pub fn iter(&self) -> impl Iterator<Item = (&Mode, &CMat)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when every stored coefficient is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| c.iter().all(|z| *z == Complex64::new(0.0, 0.0)))
    }

    /// Largest `|k|∞` over modes with a nonzero coefficient (0 if none).
    pub fn support_radius(&self) -> usize {
        self.coeffs
            .iter()
            .filter(|(_, c)| c.iter().any(|z| z.norm() > 0.0))
            .map(|(k, _)| k.max_norm() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Same coefficients on a different lattice box.
    pub fn with_lattice(&self, lattice: Lattice) -> Result<Self> {
        if lattice.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: lattice.dim() });
        }
        let mut p = TrigPoly::zero(lattice, self.shape);
        for (k, c) in &self.coeffs {
            p.insert(*k, c.clone())?;
        }
        p.flags = self.flags;
        Ok(p)
    }

    /// Adds `conj(û_k)` at `-k` wherever `-k` is missing; an existing
    /// partner must already be the conjugate.
    pub fn hermitian_completed(&self, tol: f64) -> Result<Self> {
        let mut p = self.clone();
        for (k, c) in &self.coeffs {
            let nk = -*k;
            match self.coeffs.get(&nk) {
                Some(partner) => {
                    if !close(partner, &c.map(|z| z.conj()), tol) {
                        return Err(Error::NotHermitian(k.to_string()));
                    }
                }
                None => {
                    p.coeffs.insert(nk, c.map(|z| z.conj()));
                }
            }
        }
        p.flags = Flags::default();
        Ok(p)
    }

    /// Checks `û_{-k} = conj(û_k)` for all stored `k` (relative tolerance).
    pub fn check_real(&self, tol: f64) -> Result<()> {
        for (k, c) in &self.coeffs {
            let partner = self.coeff_or_zero(&-*k);
            if !close(&partner, &c.map(|z| z.conj()), tol) {
                return Err(Error::NotHermitian(k.to_string()));
            }
        }
        Ok(())
    }

    pub fn check_zero_mean(&self) -> Result<()> {
        match self.coeffs.get(&Mode::ZERO) {
            Some(c) if c.iter().any(|z| z.norm() != 0.0) => Err(Error::NonzeroMean),
            _ => Ok(()),
        }
    }

    /// Validate and set the `real` flag.
    pub fn mark_real(mut self, tol: f64) -> Result<Self> {
        self.check_real(tol)?;
        self.flags.real = true;
        Ok(self)
    }

    /// Validate and set the `zero-mean` flag.
    pub fn mark_zero_mean(mut self) -> Result<Self> {
        self.check_zero_mean()?;
        self.flags.zero_mean = true;
        Ok(self)
    }

    /// Restores flags known to survive an operation without rescanning.
    pub(crate) fn set_flags_unchecked(&mut self, flags: Flags) {
        self.flags = flags;
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let mut p = self.clone();
        for c in p.coeffs.values_mut() {
            *c *= s;
        }
        if s.im != 0.0 {
            p.flags.real = false;
        }
        p
    }

    /// Coefficient-wise sum on the larger of the two lattices.
    pub fn add(&self, other: &TrigPoly) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!("{:?} + {:?}", self.shape, other.shape)));
        }
        let lattice = if self.trunc() >= other.trunc() { self.lattice } else { other.lattice };
        let mut p = self.with_lattice(lattice)?;
        for (k, c) in &other.coeffs {
            let sum = match p.coeffs.get(k) {
                Some(a) => a + c,
                None => c.clone(),
            };
            p.coeffs.insert(*k, sum);
        }
        p.flags = Flags {
            real: self.flags.real && other.flags.real,
            zero_mean: self.flags.zero_mean && other.flags.zero_mean,
        };
        Ok(p)
    }

    /// Transpose every coefficient; a vector becomes a 1×d row, which is
    /// only valid as an intermediate, so vectors are rejected.
    pub fn transposed(&self) -> Result<Self> {
        if self.shape == Shape::Vector {
            return Err(Error::ShapeMismatch("cannot transpose a vector polynomial".into()));
        }
        let mut p = self.clone();
        for c in p.coeffs.values_mut() {
            *c = c.transpose();
        }
        Ok(p)
    }

    /// Keep only the listed modes.
    pub fn restricted(&self, keep: &[Mode]) -> Self {
        let mut p = TrigPoly::zero(self.lattice, self.shape);
        for k in keep {
            if let Some(c) = self.coeffs.get(k) {
                p.coeffs.insert(*k, c.clone());
            }
        }
        p
    }

    /// Point evaluation by direct summation.
    pub fn eval(&self, x: &[f64]) -> CMat {
        let mut acc = self.zero_coeff();
        for (k, c) in &self.coeffs {
            let kf = k.as_f64();
            let phase: f64 = x.iter().zip(kf.iter()).map(|(xi, ki)| xi * ki).sum::<f64>();
            let e = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase);
            acc += c * e;
        }
        acc
    }

    /// `Σ_k ‖û_k‖²_F`, the mean of `|u|²` over the torus.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum()
    }
}

fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
    let scale = a.norm().max(b.norm()).max(1.0);
    (a - b).norm() <= tol * scale
}
