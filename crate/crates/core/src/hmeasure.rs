//! Periodic H-measures and closed-form limits of `p`-fold products.
//!
//! For `u_n(x) = u(nx)` with `u` a zero-mean trigonometric polynomial, the
//! H-measure is `Σ_k |û_k|² δ_{k/|k|}(ξ) λ(x)`: Dirac masses in direction
//! times Lebesgue measure in space. Atoms are keyed by the primitive integer
//! vector `k / gcd(k)`, so co-directional modes merge exactly.
//!
//! The limit of `∫ A_{ψ₁}(φ₁u_n) ⋯ A_{ψ_p}(φ_p u_n) dx` is
//! `Σ_{k₁+…+k_p=0} Π ψ_i(k_i) û_{k_i} · ∫Πφ_i`, see [`p_product_limit`].
//! [`mu_vw_cubic`] and [`mu_vw_quartic`] split the same quantity into an
//! atomic measure plus (for `p = 4`) the product of weak limits.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{
    constrained_sum, contract_pair, multiplier_apply, poly_product_direct, CMat, Contraction, Shape, Symbol,
    SymbolKind, TrigPoly,
};
use crate::mode::Mode;

/// Largest supported number of factors in a product limit.
pub const MAX_FACTORS: usize = 6;

/// Dense complex tensor of rank 0..=4, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Weight {
    dims: Vec<usize>,
    data: Vec<Complex64>,
}

impl Weight {
    pub fn zeros(dims: Vec<usize>) -> Self {
        let len = dims.iter().product();
        Weight { dims, data: vec![Complex64::new(0.0, 0.0); len] }
    }

    pub fn scalar(z: Complex64) -> Self {
        Weight { dims: vec![], data: vec![z] }
    }

    /// Rank-0/1/2 tensor from a 1×1, d×1 or d×d coefficient.
    pub fn from_coeff(m: &CMat) -> Self {
        let dims = match m.shape() {
            (1, 1) => vec![],
            (r, 1) => vec![r],
            (r, c) => vec![r, c],
        };
        let data = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| (i, j))).map(|ij| m[ij]).collect();
        Weight { dims, data }
    }

    /// `self ⊗ other`, indices concatenated.
    pub fn outer(&self, other: &Weight) -> Weight {
        let dims = self.dims.iter().chain(other.dims.iter()).copied().collect();
        let data = self.data.iter().flat_map(|a| other.data.iter().map(move |b| a * b)).collect();
        Weight { dims, data }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        let flat = idx.iter().zip(&self.dims).fold(0, |acc, (&i, &n)| acc * n + i);
        self.data[flat]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: Complex64) -> Weight {
        Weight { dims: self.dims.clone(), data: self.data.iter().map(|z| z * s).collect() }
    }

    fn add_assign(&mut self, other: &Weight) {
        debug_assert_eq!(self.dims, other.dims);
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
    }

    /// Rank ≤ 2 tensors as a matrix (scalar 1×1, vector d×1).
    pub fn to_matrix(&self) -> Option<CMat> {
        match self.dims.as_slice() {
            [] => Some(CMat::from_element(1, 1, self.data[0])),
            [r] => Some(CMat::from_row_slice(*r, 1, &self.data)),
            [r, c] => Some(CMat::from_row_slice(*r, *c, &self.data)),
            _ => None,
        }
    }
}

/// A discrete measure `Σ_atoms w_ξ δ_ξ ⊗ λ(x)` on directions times space.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicHMeasure {
    dim: usize,
    weight_dims: Vec<usize>,
    atoms: BTreeMap<Mode, Weight>,
}

impl PeriodicHMeasure {
    fn empty(dim: usize, weight_dims: Vec<usize>) -> Self {
        PeriodicHMeasure { dim, weight_dims, atoms: BTreeMap::new() }
    }

    /// Adds `w` to the atom at direction `k/|k|`; `k = 0` is ignored.
    fn deposit(&mut self, k: &Mode, w: &Weight) {
        if k.is_zero() {
            return;
        }
        self.atoms
            .entry(k.reduced())
            .or_insert_with(|| Weight::zeros(w.dims.clone()))
            .add_assign(w);
    }

    fn prune(mut self) -> Self {
        self.atoms.retain(|_, w| !w.is_zero());
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight_dims(&self) -> &[usize] {
        &self.weight_dims
    }

    /// Atoms keyed by primitive direction, lexicographic order.
    pub fn atoms(&self) -> &BTreeMap<Mode, Weight> {
        &self.atoms
    }

    pub fn weight(&self, direction: &Mode) -> Option<&Weight> {
        self.atoms.get(&direction.reduced())
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Sum of all atom weights.
    pub fn total_mass(&self) -> Weight {
        let mut acc = Weight::zeros(self.weight_dims.clone());
        for w in self.atoms.values() {
            acc.add_assign(w);
        }
        acc
    }
}

/// H-measure of a scalar zero-mean sequence: `Σ_k |û_k|² δ_{k/|k|} λ`.
pub fn h_measure_scalar(u: &TrigPoly) -> Result<PeriodicHMeasure> {
    if u.shape() != Shape::Scalar {
        return Err(Error::ShapeMismatch("h_measure_scalar needs a scalar sequence".into()));
    }
    u.check_zero_mean()?;
    let mut m = PeriodicHMeasure::empty(u.dim(), vec![]);
    for (k, c) in u.iter() {
        m.deposit(k, &Weight::scalar(Complex64::new(c[(0, 0)].norm_sqr(), 0.0)));
    }
    Ok(m.prune())
}

/// Off-diagonal H-measure of `(u, v)`: `Σ_k û_k ⊗ v̂_{−k} δ_{k/|k|} λ`.
///
/// For matrix sequences the weight carries four indices `(i,k,l,j)` with
/// `(i,k)` from `û` and `(l,j)` from `v̂`.
pub fn h_measure_pair(u: &TrigPoly, v: &TrigPoly) -> Result<PeriodicHMeasure> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: v.dim() });
    }
    u.check_zero_mean()?;
    v.check_zero_mean()?;
    let dims: Vec<usize> = Weight::from_coeff(&u.zero_coeff())
        .dims
        .iter()
        .chain(Weight::from_coeff(&v.zero_coeff()).dims.iter())
        .copied()
        .collect();
    let mut m = PeriodicHMeasure::empty(u.dim(), dims);
    for (k, a) in u.iter() {
        if let Some(b) = v.coeff(&-*k) {
            m.deposit(k, &Weight::from_coeff(a).outer(&Weight::from_coeff(b)));
        }
    }
    Ok(m.prune())
}

/// `⟨m, φ ⊠ s⟩` with `x_weight = ∫φ dx`.
///
/// Scalar symbols scale the weight. A matrix symbol contracts the two middle
/// indices of a rank-4 weight (`Σ_{kl} w^{iklj} s_{kl}`) or fully contracts
/// a rank-2 weight.
pub fn measure_pairing(m: &PeriodicHMeasure, s: &Symbol, x_weight: Complex64) -> Result<Weight> {
    if s.dim() != m.dim {
        return Err(Error::DimensionMismatch { expected: m.dim, found: s.dim() });
    }
    let out_dims = match (s.kind(), m.weight_dims.len()) {
        (SymbolKind::Scalar, _) => m.weight_dims.clone(),
        (SymbolKind::Matrix, 4) => vec![m.weight_dims[0], m.weight_dims[3]],
        (SymbolKind::Matrix, 2) => vec![],
        (SymbolKind::Matrix, 0) if m.dim == 1 => vec![],
        (SymbolKind::Matrix, r) => {
            return Err(Error::RankMismatch(format!("matrix symbol against rank-{r} weights")))
        }
    };
    let mut acc = Weight::zeros(out_dims);
    for (dir, w) in &m.atoms {
        let sv = s.evaluate(dir);
        let term = match (s.kind(), w.rank()) {
            (SymbolKind::Scalar, _) | (_, 0) => w.scaled(sv[(0, 0)]),
            (_, 2) => {
                let d = w.dims[0];
                let z = (0..d).flat_map(|k| (0..d).map(move |l| (k, l))).map(|(k, l)| w.get(&[k, l]) * sv[(k, l)]).sum();
                Weight::scalar(z)
            }
            _ => {
                let [a, b, c, e] = [w.dims[0], w.dims[1], w.dims[2], w.dims[3]];
                if sv.shape() != (b, c) {
                    return Err(Error::RankMismatch("symbol does not match middle indices".into()));
                }
                let mut t = Weight::zeros(vec![a, e]);
                for i in 0..a {
                    for j in 0..e {
                        let mut z = Complex64::new(0.0, 0.0);
                        for k in 0..b {
                            for l in 0..c {
                                z += w.get(&[i, k, l, j]) * sv[(k, l)];
                            }
                        }
                        t.data[i * e + j] = z;
                    }
                }
                t
            }
        };
        acc.add_assign(&term);
    }
    Ok(acc.scaled(x_weight))
}

/// Factors `(u_i, ψ_i)` of a product limit with their contraction.
#[derive(Clone, Debug)]
pub struct LimitSpec {
    factors: Vec<(TrigPoly, Symbol)>,
    contraction: Contraction,
}

impl LimitSpec {
    pub fn new(factors: Vec<(TrigPoly, Symbol)>, contraction: Contraction) -> Result<Self> {
        let p = factors.len();
        if !(2..=MAX_FACTORS).contains(&p) {
            return Err(Error::FactorCount(p));
        }
        let d = factors[0].0.dim();
        for (u, s) in &factors {
            if u.dim() != d || s.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: u.dim().max(s.dim()) });
            }
            u.check_zero_mean()?;
        }
        let dims: Vec<_> = factors.iter().map(|(u, _)| u.coeff_dims()).collect();
        contraction.result_dims(&dims)?;
        Ok(LimitSpec { factors, contraction })
    }

    /// `p` copies of one sequence with the given symbols, chained.
    pub fn power(u: &TrigPoly, symbols: Vec<Symbol>) -> Result<Self> {
        let p = symbols.len();
        LimitSpec::new(symbols.into_iter().map(|s| (u.clone(), s)).collect(), Contraction::chain(p))
    }

    pub fn factors(&self) -> &[(TrigPoly, Symbol)] {
        &self.factors
    }

    pub fn contraction(&self) -> &Contraction {
        &self.contraction
    }

    pub fn p(&self) -> usize {
        self.factors.len()
    }

    /// `A_{ψ_i} u_i` for every factor.
    pub fn filtered(&self) -> Result<Vec<TrigPoly>> {
        self.factors.iter().map(|(u, s)| multiplier_apply(s, u)).collect()
    }
}

/// `Σ_{Σk_i=0} Π_i ψ_i(k_i) û^i_{k_i} · phi_integral`.
pub fn p_product_limit(spec: &LimitSpec, phi_integral: Complex64) -> Result<CMat> {
    let filtered = spec.filtered()?;
    let refs: Vec<&TrigPoly> = filtered.iter().collect();
    Ok(constrained_sum(&refs, &spec.contraction)? * phi_integral)
}

fn filtered_factors(u: &TrigPoly, symbols: &[&Symbol]) -> Result<Vec<TrigPoly>> {
    u.check_zero_mean()?;
    symbols.iter().map(|s| multiplier_apply(s, u)).collect()
}

fn weight_dims_of(m: &CMat) -> Vec<usize> {
    Weight::from_coeff(m).dims
}

/// Cubic measure: atoms at `k/|k|`, `k ≠ 0`, with weight
/// `Σ_{l+m=−k} ψ₁(k)û_k ψ₂(l)û_l ψ₃(m)û_m`. Pairing it with `φ ⊠ 1`
/// reproduces the `p = 3` product limit.
pub fn mu_vw_cubic(u: &TrigPoly, symbols: [&Symbol; 3]) -> Result<PeriodicHMeasure> {
    let f = filtered_factors(u, &symbols)?;
    let w = poly_product_direct(&f[1], &f[2])?;
    let dims = weight_dims_of(&contract_pair(&f[0].zero_coeff(), &w.zero_coeff())?);
    let mut m = PeriodicHMeasure::empty(u.dim(), dims);
    for (k, a) in f[0].iter() {
        if k.is_zero() {
            continue;
        }
        if let Some(b) = w.coeff(&-*k) {
            m.deposit(k, &Weight::from_coeff(&contract_pair(a, b)?));
        }
    }
    Ok(m.prune())
}

/// `p = 4` split into the atomic measure of `(v_n − v, w_n − w)` and the
/// weak-limit product `v·w̄`.
#[derive(Clone, Debug)]
pub struct QuarticSplit {
    /// Atoms at `(j+k)/|j+k|` for `j + k ≠ 0`.
    pub measure: PeriodicHMeasure,
    /// The excluded `j + k = 0` group, `v · w̄`.
    pub weak_limit_term: CMat,
}

impl QuarticSplit {
    /// `⟨μ_vw, φ ⊠ 1⟩ + v·w̄·∫φ`.
    pub fn total(&self, phi_integral: Complex64) -> Result<CMat> {
        let one = Symbol::one(self.measure.dim());
        let atoms = measure_pairing(&self.measure, &one, phi_integral)?;
        let atoms = atoms.to_matrix().ok_or_else(|| Error::RankMismatch("quartic weight rank".into()))?;
        Ok(atoms + &self.weak_limit_term * phi_integral)
    }
}

/// Quartic measure with `v_n = (A_{ψ₁}u_n)(A_{ψ₂}u_n)` and
/// `w̄_n = (A_{ψ₃}u_n)(A_{ψ₄}u_n)`.
///
/// The pairwise products are formed by direct convolution, so this route is
/// independent of the FFT path behind [`p_product_limit`].
pub fn mu_vw_quartic(u: &TrigPoly, symbols: [&Symbol; 4]) -> Result<QuarticSplit> {
    let f = filtered_factors(u, &symbols)?;
    let v = poly_product_direct(&f[0], &f[1])?;
    let w = poly_product_direct(&f[2], &f[3])?;
    let weak_limit_term = contract_pair(&v.coeff_or_zero(&Mode::ZERO), &w.coeff_or_zero(&Mode::ZERO))?;
    let mut m = PeriodicHMeasure::empty(u.dim(), weight_dims_of(&weak_limit_term));
    for (q, a) in v.iter() {
        if q.is_zero() {
            continue;
        }
        if let Some(b) = w.coeff(&-*q) {
            m.deposit(q, &Weight::from_coeff(&contract_pair(a, b)?));
        }
    }
    Ok(QuarticSplit { measure: m.prune(), weak_limit_term })
}
