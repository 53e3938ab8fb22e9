use super::grid::FieldGrid;
use super::{fft_size_for, CMat, Flags, Shape, Symbol, SymbolKind, TrigPoly};
use crate::error::{Error, Result};
use crate::mode::Mode;
use crate::sum::pairwise_sum_mats;

/// How the coefficients of the factors of a product are contracted.
///
/// Factors are multiplied as a matrix chain `F₁ F₂ ⋯ F_p`, each factor
/// optionally transposed first; 1×1 factors act as scalars. With `trace`
/// set, the trace of the (square) chain is taken.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contraction {
    pub transpose: Vec<bool>,
    pub trace: bool,
}

impl Contraction {
    pub fn chain(p: usize) -> Self {
        Contraction { transpose: vec![false; p], trace: false }
    }

    pub fn with_transposes(transpose: Vec<bool>) -> Self {
        Contraction { transpose, trace: false }
    }

    pub fn traced(mut self) -> Self {
        self.trace = true;
        self
    }

    /// Result dimensions for factors with the given coefficient dimensions.
    pub fn result_dims(&self, dims: &[(usize, usize)]) -> Result<(usize, usize)> {
        if dims.len() != self.transpose.len() {
            return Err(Error::Contraction(format!(
                "{} transpose flags for {} factors",
                self.transpose.len(),
                dims.len()
            )));
        }
        let mut acc: Option<(usize, usize)> = None;
        for (&(r, c), &t) in dims.iter().zip(&self.transpose) {
            let d = if t { (c, r) } else { (r, c) };
            acc = Some(match acc {
                None => d,
                Some(a) => chain_dims(a, d)?,
            });
        }
        let (r, c) = acc.ok_or_else(|| Error::Contraction("no factors".into()))?;
        if self.trace {
            if r != c {
                return Err(Error::Contraction(format!("trace of a {r}x{c} chain")));
            }
            return Ok((1, 1));
        }
        Ok((r, c))
    }
}

fn chain_dims(a: (usize, usize), b: (usize, usize)) -> Result<(usize, usize)> {
    if a == (1, 1) {
        Ok(b)
    } else if b == (1, 1) {
        Ok(a)
    } else if a.1 == b.0 {
        Ok((a.0, b.1))
    } else {
        Err(Error::Contraction(format!("cannot contract {}x{} with {}x{}", a.0, a.1, b.0, b.1)))
    }
}

/// Product of two coefficients; 1×1 operands broadcast as scalars.
pub fn contract_pair(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.shape() == (1, 1) {
        Ok(b * a[(0, 0)])
    } else if b.shape() == (1, 1) {
        Ok(a * b[(0, 0)])
    } else if a.ncols() == b.nrows() {
        Ok(a * b)
    } else {
        Err(Error::ShapeMismatch(format!("{:?} · {:?}", a.shape(), b.shape())))
    }
}

/// `A_s u`: coefficient `k` becomes `s(k)·û_k`, the zero mode
/// `s₀·û₀` with `s₀` the symbol's zero-mode value.
pub fn multiplier_apply(s: &Symbol, u: &TrigPoly) -> Result<TrigPoly> {
    if s.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: s.dim() });
    }
    if s.kind() == SymbolKind::Matrix && u.shape() == Shape::Scalar && u.dim() > 1 {
        return Err(Error::ShapeMismatch("matrix symbol applied to a scalar polynomial".into()));
    }
    let mut out = TrigPoly::zero(u.lattice(), u.shape());
    for (k, c) in u.iter() {
        let sv = s.evaluate(k);
        out.insert(*k, contract_pair(&sv, c)?)?;
    }
    let zero_mean = u.flags().zero_mean || s.zero_value().iter().all(|z| z.norm() == 0.0);
    out.set_flags_unchecked(Flags { real: false, zero_mean });
    Ok(out)
}

fn product_shape(u: &TrigPoly, v: &TrigPoly) -> Result<Shape> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: v.dim() });
    }
    let (r, c) = chain_dims(u.coeff_dims(), v.coeff_dims()).map_err(|e| Error::ShapeMismatch(e.to_string()))?;
    Shape::from_dims(r, c, u.dim())
}

/// Exact product `u·v` by zero-padded FFT; the result lives on the lattice
/// with truncation `K_u + K_v`.
pub fn poly_product(u: &TrigPoly, v: &TrigPoly) -> Result<TrigPoly> {
    let shape = product_shape(u, v)?;
    let lattice = u.lattice().with_trunc(u.trunc() + v.trunc())?;
    let radius = u.support_radius() + v.support_radius();
    let mut out = TrigPoly::zero(lattice, shape);
    if u.is_empty() || v.is_empty() {
        return Ok(out);
    }
    let n = (2 * radius + 1).next_power_of_two();
    let gu = FieldGrid::from_poly(u, n, false);
    let gv = FieldGrid::from_poly(v, n, false);
    for (k, c) in gu.pointwise_mul(&gv).coefficients(radius) {
        out.insert(k, c)?;
    }
    Ok(out)
}

/// Reference double sum `Σ_{j+k=m} û_j v̂_k` over stored modes.
pub fn poly_product_direct(u: &TrigPoly, v: &TrigPoly) -> Result<TrigPoly> {
    let shape = product_shape(u, v)?;
    let lattice = u.lattice().with_trunc(u.trunc() + v.trunc())?;
    let mut terms: std::collections::BTreeMap<Mode, Vec<CMat>> = Default::default();
    for (j, a) in u.iter() {
        for (k, b) in v.iter() {
            terms.entry(*j + *k).or_default().push(contract_pair(a, b)?);
        }
    }
    let mut out = TrigPoly::zero(lattice, shape);
    for (m, ts) in terms {
        if let Some(s) = pairwise_sum_mats(&ts) {
            out.insert(m, s)?;
        }
    }
    Ok(out)
}

fn check_factors(factors: &[&TrigPoly], contraction: &Contraction) -> Result<(usize, usize)> {
    if factors.len() < 2 {
        return Err(Error::FactorCount(factors.len()));
    }
    let d = factors[0].dim();
    if let Some(f) = factors.iter().find(|f| f.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: f.dim() });
    }
    let dims: Vec<_> = factors.iter().map(|f| f.coeff_dims()).collect();
    contraction.result_dims(&dims)
}

/// Zero Fourier mode of the contracted product,
/// `Σ_{k₁+…+k_p=0} contraction(û¹_{k₁}, …, ûᵖ_{k_p})`, by zero-padded FFT.
pub fn constrained_sum(factors: &[&TrigPoly], contraction: &Contraction) -> Result<CMat> {
    let (r, c) = check_factors(factors, contraction)?;
    if factors.iter().any(|f| f.is_empty()) {
        return Ok(CMat::zeros(r, c));
    }
    let radius = factors.iter().map(|f| f.support_radius()).max().unwrap_or(0);
    let n = fft_size_for(factors.len(), radius);
    let mut acc: Option<FieldGrid> = None;
    for (f, &t) in factors.iter().zip(&contraction.transpose) {
        let g = FieldGrid::from_poly(f, n, t);
        acc = Some(match acc {
            None => g,
            Some(a) => a.pointwise_mul(&g),
        });
    }
    let mut prod = acc.expect("at least two factors");
    if contraction.trace {
        prod = prod.trace();
    }
    Ok(prod.mean())
}

/// Reference nested-loop evaluation of [`constrained_sum`] over stored
/// modes; cost is the product of the first `p−1` support sizes.
pub fn constrained_sum_direct(factors: &[&TrigPoly], contraction: &Contraction) -> Result<CMat> {
    let (r, c) = check_factors(factors, contraction)?;
    let coeff = |i: usize, m: &CMat| if contraction.transpose[i] { m.transpose() } else { m.clone() };
    let p = factors.len();
    let mut terms = Vec::new();
    let mut stack: Vec<(usize, Mode, Option<CMat>)> = vec![(0, Mode::ZERO, None)];
    while let Some((i, sum, partial)) = stack.pop() {
        if i == p - 1 {
            if let Some(last) = factors[i].coeff(&-sum) {
                let mut t = contract_pair(partial.as_ref().expect("p >= 2"), &coeff(i, last))?;
                if contraction.trace {
                    t = CMat::from_element(1, 1, t.trace());
                }
                terms.push(t);
            }
            continue;
        }
        // reverse push keeps lexicographic processing order
        let entries: Vec<_> = factors[i].iter().collect();
        for (k, m) in entries.into_iter().rev() {
            let next = match &partial {
                None => coeff(i, m),
                Some(prev) => contract_pair(prev, &coeff(i, m))?,
            };
            stack.push((i + 1, sum + *k, Some(next)));
        }
    }
    Ok(pairwise_sum_mats(&terms).unwrap_or_else(|| CMat::zeros(r, c)))
}
