//! Correction tensors of the effective diffusion tensor of
//! `A₀ + γA₁(y) + γ²A₂(y) + γ³A₃(y) + o(γ³)` (periodic `Aᵢ`, constant SPD `A₀`):
//! `A∞_γ = A₀ + γ²A₂∞ + γ³A₃∞ + γ⁴A₄∞ + …`, with `A₁∞ = 0`.
//!
//! With `Ψ(k) = k⊗k/(A₀k·k)`, all formulas are sums over the Fourier
//! coefficients `Â_{i,k}`:
//!
//! * `A₂∞ = −Σ_k (Â_{1,k}k)⊗(Â_{1,−k}k)/(A₀k·k)`
//! * `A₃∞` adds the mixed `A₁/A₂` quadratic group and the cubic group
//!   `Σ_{k+l+m=0} (k·Â_{1,l}m)(Â_{1,k}k)⊗(Â_{1,m}m)/((A₀k·k)(A₀m·m))`.
//! * `A₄∞` adds quadratic, three mixed cubic and one quartic group.
//!
//! The cubic and quartic groups have two evaluation routes: an FFT route
//! (zero mode of a product of Ψ-filtered fields) and a brute-force route
//! (the explicit lattice sum). Mixed quadratic groups are taken as the
//! Hermitian part `−Σ[X_k + X_kᵀ]`, which is what keeps the tensor symmetric
//! in `d ≥ 2`.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fourier::{constrained_sum, multiplier_apply, poly_product, CMat, Contraction, Shape, Symbol, TrigPoly};
use crate::hmeasure::{h_measure_pair, measure_pairing};
use crate::mode::{Lattice, Mode};
use crate::sum::pairwise_sum_mats;

/// Relative tolerance for the symmetry/Hermitian checks on input data.
pub const INPUT_TOL: f64 = 1e-12;

/// Maximum support radius for which cross-path checks run on the full data.
pub const FULL_CROSS_CHECK_RADIUS: usize = 3;

/// The expansion `A_γ(y) = A₀ + γA₁(y) + γ²A₂(y) + γ³A₃(y)`.
///
/// Each `Aᵢ` is a real-valued, symmetric-matrix-valued, zero-mean
/// trigonometric polynomial; missing orders are the zero polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientExpansion {
    a0: DMatrix<f64>,
    alpha: f64,
    orders: [TrigPoly; 3],
}

impl CoefficientExpansion {
    /// Validates `A₀` (symmetric positive definite) and every order.
    pub fn new(a0: DMatrix<f64>, orders: Vec<(usize, TrigPoly)>) -> Result<Self> {
        Self::new_with(a0, orders, true)
    }

    pub fn new_with(a0: DMatrix<f64>, orders: Vec<(usize, TrigPoly)>, symmetric_required: bool) -> Result<Self> {
        let d = a0.nrows();
        if a0.ncols() != d {
            return Err(Error::NotPositiveDefinite(format!("A0 is {}x{}", d, a0.ncols())));
        }
        let lattice = Lattice::new(d, 1)?;
        let asym = (&a0 - a0.transpose()).norm();
        if asym > INPUT_TOL * a0.norm().max(1.0) {
            return Err(Error::NotPositiveDefinite(format!("asymmetry {asym:e}")));
        }
        let alpha = SymmetricEigen::new(a0.clone()).eigenvalues.min();
        if !(alpha > 0.0) {
            return Err(Error::NotPositiveDefinite(format!("smallest eigenvalue {alpha}")));
        }
        let mut slots: [Option<TrigPoly>; 3] = [None, None, None];
        for (i, p) in orders {
            if !(1..=3).contains(&i) {
                return Err(Error::InvalidArgument(format!("expansion order {i} (allowed 1..=3)")));
            }
            if slots[i - 1].is_some() {
                return Err(Error::InvalidArgument(format!("order {i} given twice")));
            }
            if p.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: p.dim() });
            }
            if p.coeff_dims() != (d, d) {
                return Err(Error::ShapeMismatch(format!("order {i} must be matrix-valued")));
            }
            let mut p = p.mark_zero_mean()?.mark_real(INPUT_TOL)?;
            if symmetric_required {
                for (k, c) in p.iter() {
                    if (c - c.transpose()).norm() > INPUT_TOL * c.norm().max(1.0) {
                        return Err(Error::NotSymmetric(format!("order {i}, mode {k}")));
                    }
                }
            }
            let flags = p.flags();
            p.set_flags_unchecked(flags);
            slots[i - 1] = Some(p);
        }
        let orders = slots.map(|s| s.unwrap_or_else(|| TrigPoly::zero(lattice, Shape::Matrix)));
        Ok(CoefficientExpansion { a0, alpha, orders })
    }

    pub fn dim(&self) -> usize {
        self.a0.nrows()
    }

    pub fn a0(&self) -> &DMatrix<f64> {
        &self.a0
    }

    /// Smallest eigenvalue of `A₀` (the ellipticity witness).
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Order `i ∈ {1,2,3}`; zero polynomial when not supplied.
    pub fn order(&self, i: usize) -> &TrigPoly {
        &self.orders[i - 1]
    }

    /// Largest lattice truncation over the orders.
    pub fn trunc(&self) -> usize {
        self.orders.iter().map(|p| p.trunc()).max().unwrap_or(1)
    }

    pub fn support_radius(&self) -> usize {
        self.orders.iter().map(|p| p.support_radius()).max().unwrap_or(0)
    }

    /// `ρ = max_i (Σ_k ‖Â_{i,k}‖_F / α)^{1/i}`: `γρ` bounds the relative size
    /// of the perturbation, and `‖A₀‖ρ^i` is the natural size of `A_i∞`.
    pub fn amplitude(&self) -> f64 {
        (1..=3)
            .map(|i| {
                let s: f64 = self.order(i).iter().map(|(_, m)| m.norm()).sum();
                (s / self.alpha).powf(1.0 / i as f64)
            })
            .fold(0.0, f64::max)
    }

    pub fn psi(&self) -> Symbol {
        Symbol::oscillation(&self.a0).expect("A0 validated square")
    }

    /// `(cA₀, cA₁, cA₂, cA₃)`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let orders = (1..=3).map(|i| (i, self.order(i).scaled(Complex64::new(c, 0.0)))).collect();
        CoefficientExpansion::new(&self.a0 * c, orders)
    }

    /// Same data on lattices with truncation `k`.
    pub fn with_trunc(&self, k: usize) -> Result<Self> {
        let lattice = Lattice::new(self.dim(), k)?;
        let orders = (1..=3).map(|i| Ok((i, self.order(i).with_lattice(lattice)?))).collect::<Result<_>>()?;
        CoefficientExpansion::new(self.a0.clone(), orders)
    }

    /// Keep only the listed modes in every order.
    pub fn restricted(&self, keep: &[Mode]) -> Result<Self> {
        let orders = (1..=3).map(|i| (i, self.order(i).restricted(keep))).collect();
        CoefficientExpansion::new(self.a0.clone(), orders)
    }

    /// The oscillating part `γA₁ + γ²A₂ + γ³A₃`.
    pub fn perturbation(&self, gamma: f64) -> Result<TrigPoly> {
        let mut acc = self.order(1).scaled(Complex64::new(gamma, 0.0));
        for i in 2..=3 {
            acc = acc.add(&self.order(i).scaled(Complex64::new(gamma.powi(i as i32), 0.0)))?;
        }
        Ok(acc)
    }

    fn quad(&self, k: &Mode) -> f64 {
        let d = self.dim();
        let kf = k.as_f64();
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += kf[i] * self.a0[(i, j)] * kf[j];
            }
        }
        s
    }
}

/// Which route evaluates the cubic and quartic lattice sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SumPath {
    Fft,
    Brute,
}

impl SumPath {
    pub fn name(&self) -> &'static str {
        match self {
            SumPath::Fft => "fft",
            SumPath::Brute => "brute-force",
        }
    }
}

type V3 = [Complex64; 3];

fn kvec(k: &Mode) -> V3 {
    let f = k.as_f64();
    [Complex64::new(f[0], 0.0), Complex64::new(f[1], 0.0), Complex64::new(f[2], 0.0)]
}

fn matvec(a: &CMat, v: &V3) -> V3 {
    let d = a.nrows();
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for i in 0..d {
        for j in 0..d {
            out[i] += a[(i, j)] * v[j];
        }
    }
    out
}

fn dot(a: &V3, b: &V3) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn outer(d: usize, a: &V3, b: &V3, s: Complex64) -> CMat {
    CMat::from_fn(d, d, |i, j| s * a[i] * b[j])
}

fn sum_terms(d: usize, terms: &[CMat]) -> CMat {
    pairwise_sum_mats(terms).unwrap_or_else(|| CMat::zeros(d, d))
}

/// `Σ_k (P̂_k k)⊗(Q̂_{−k}k)/(A₀k·k)`.
fn gram(c: &CoefficientExpansion, p: &TrigPoly, q: &TrigPoly) -> CMat {
    let d = c.dim();
    let terms: Vec<CMat> = p
        .iter()
        .filter(|(k, _)| !k.is_zero())
        .filter_map(|(k, pk)| {
            let qk = q.coeff(&-*k)?;
            let kv = kvec(k);
            Some(outer(d, &matvec(pk, &kv), &matvec(qk, &kv), Complex64::new(1.0 / c.quad(k), 0.0)))
        })
        .collect();
    sum_terms(d, &terms)
}

/// Lattice-sum value together with `Σ‖term‖`, the scale against which
/// cancellation is judged (zero for the FFT route).
struct Summed {
    value: CMat,
    abs_scale: f64,
}

/// `Σ_{k+l+m=0} (k·Q̂_l m)(P̂_k k)⊗(R̂_m m)/((A₀k·k)(A₀m·m))`.
fn cubic(c: &CoefficientExpansion, p: &TrigPoly, q: &TrigPoly, r: &TrigPoly, path: SumPath) -> Result<Summed> {
    let d = c.dim();
    match path {
        SumPath::Fft => {
            let psi = c.psi();
            let pp = multiplier_apply(&psi, p)?;
            let rr = multiplier_apply(&psi, r)?;
            let value = constrained_sum(&[&pp, q, &rr], &Contraction::with_transposes(vec![true, false, false]))?;
            Ok(Summed { value, abs_scale: 0.0 })
        }
        SumPath::Brute => {
            let mut terms = Vec::new();
            let mut scale = 0.0;
            for (k, pk) in p.iter().filter(|(k, _)| !k.is_zero()) {
                let kv = kvec(k);
                let pkk = matvec(pk, &kv);
                for (l, ql) in q.iter() {
                    let m = -(*k + *l);
                    if m.is_zero() {
                        continue;
                    }
                    let Some(rm) = r.coeff(&m) else { continue };
                    let mv = kvec(&m);
                    let s = dot(&kv, &matvec(ql, &mv)) / (c.quad(k) * c.quad(&m));
                    let t = outer(d, &pkk, &matvec(rm, &mv), s);
                    scale += t.norm();
                    terms.push(t);
                }
            }
            Ok(Summed { value: sum_terms(d, &terms), abs_scale: scale })
        }
    }
}

/// `−Σ_{j+k+l+m=0, j+k≠0} [(Â_j k)·q][(Â_l m)·q] (Â_k k)⊗(Â_m m) /
/// ((A₀k·k)(A₀m·m)(A₀q·q))` with `q = j+k`, all coefficients from `A₁`.
fn quartic(c: &CoefficientExpansion, path: SumPath) -> Result<Summed> {
    let d = c.dim();
    let a1 = c.order(1);
    match path {
        SumPath::Fft => {
            let psi = c.psi();
            let w = poly_product(a1, &multiplier_apply(&psi, a1)?)?;
            let gw = multiplier_apply(&psi, &w)?;
            let value = -constrained_sum(&[&w, &gw], &Contraction::with_transposes(vec![true, false]))?;
            Ok(Summed { value, abs_scale: 0.0 })
        }
        SumPath::Brute => {
            let entries: Vec<(Mode, &CMat, V3)> = a1.iter().map(|(k, a)| (*k, a, kvec(k))).collect();
            let mut terms = Vec::new();
            let mut scale = 0.0;
            for (k, ak, kv) in entries.iter().filter(|e| !e.0.is_zero()) {
                let akk = matvec(ak, kv);
                for (j, aj, _) in &entries {
                    let q = *j + *k;
                    if q.is_zero() {
                        continue;
                    }
                    let qv = kvec(&q);
                    let left = dot(&matvec(aj, kv), &qv);
                    let qq = c.quad(&q);
                    for (l, al, _) in &entries {
                        let m = -(q + *l);
                        if m.is_zero() {
                            continue;
                        }
                        let Some(am) = a1.coeff(&m) else { continue };
                        let mv = kvec(&m);
                        let amm = matvec(am, &mv);
                        let right = dot(&matvec(al, &mv), &qv);
                        let s = -left * right / (c.quad(k) * c.quad(&m) * qq);
                        let t = outer(d, &akk, &amm, s);
                        scale += t.norm();
                        terms.push(t);
                    }
                }
            }
            Ok(Summed { value: sum_terms(d, &terms), abs_scale: scale })
        }
    }
}

/// `A₂∞` by the explicit Fourier sum.
pub fn a2_direct(c: &CoefficientExpansion) -> CMat {
    -gram(c, c.order(1), c.order(1))
}

/// `A₂∞` as `−⟨μ₁₁, ξ_kξ_l/(A₀ξ·ξ)⟩`, contracting the middle indices of the
/// four-index H-measure of `A₁`.
pub fn a2_via_measure(c: &CoefficientExpansion) -> Result<CMat> {
    let mu = h_measure_pair(c.order(1), c.order(1))?;
    let w = measure_pairing(&mu, &c.psi(), Complex64::new(1.0, 0.0))?;
    let m = w.to_matrix().ok_or_else(|| Error::RankMismatch("A2 pairing".into()))?;
    Ok(-m)
}

fn a3_parts(c: &CoefficientExpansion, path: SumPath) -> Result<Summed> {
    let (a1, a2) = (c.order(1), c.order(2));
    let quad = -(gram(c, a1, a2) + gram(c, a2, a1));
    let cub = cubic(c, a1, a1, a1, path)?;
    Ok(Summed { value: quad + cub.value, abs_scale: cub.abs_scale })
}

fn a4_parts(c: &CoefficientExpansion, path: SumPath) -> Result<Summed> {
    let (a1, a2, a3) = (c.order(1), c.order(2), c.order(3));
    let mut value = -(gram(c, a1, a3) + gram(c, a3, a1) + gram(c, a2, a2));
    let mut scale = 0.0;
    for (p, q, r) in [(a1, a1, a2), (a1, a2, a1), (a2, a1, a1)] {
        let s = cubic(c, p, q, r, path)?;
        value += s.value;
        scale += s.abs_scale;
    }
    let s = quartic(c, path)?;
    Ok(Summed { value: value + s.value, abs_scale: scale + s.abs_scale })
}

/// `A₃∞` with the cubic group evaluated by FFT.
pub fn a3_correction(c: &CoefficientExpansion) -> Result<CMat> {
    a3_correction_with(c, SumPath::Fft)
}

pub fn a3_correction_with(c: &CoefficientExpansion, path: SumPath) -> Result<CMat> {
    Ok(a3_parts(c, path)?.value)
}

/// `A₄∞` with the cubic and quartic groups evaluated by FFT.
pub fn a4_correction(c: &CoefficientExpansion) -> Result<CMat> {
    a4_correction_with(c, SumPath::Fft)
}

pub fn a4_correction_with(c: &CoefficientExpansion, path: SumPath) -> Result<CMat> {
    Ok(a4_parts(c, path)?.value)
}

/// Agreement between two evaluation routes of one correction.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossCheck {
    pub quantity: String,
    pub primary: CMat,
    pub reference: CMat,
    /// `‖primary − reference‖_F`.
    pub abs_delta: f64,
    /// `abs_delta / max(‖reference‖_F, Σ‖term‖_F)`.
    pub rel_delta: f64,
    /// Whether the check ran on a random sub-sample of the modes.
    pub sampled: bool,
}

impl CrossCheck {
    fn new(quantity: &str, primary: CMat, reference: CMat, abs_scale: f64, sampled: bool) -> Self {
        let abs_delta = (&primary - &reference).norm();
        let denom = reference.norm().max(abs_scale).max(f64::MIN_POSITIVE);
        CrossCheck { quantity: quantity.into(), primary, reference, abs_delta, rel_delta: abs_delta / denom, sampled }
    }
}

/// FFT vs brute force for `A₃∞` and `A₄∞`, plus direct vs measure for `A₂∞`.
pub fn cross_check(c: &CoefficientExpansion, max_order: u8, sampled: bool) -> Result<Vec<CrossCheck>> {
    let a2m = a2_via_measure(c)?;
    let a2d = a2_direct(c);
    let scale2 = gram_scale(c);
    let mut out = vec![CrossCheck::new("A2: direct vs measure", a2d, a2m, scale2, sampled)];
    if max_order >= 3 {
        let f = a3_parts(c, SumPath::Fft)?;
        let b = a3_parts(c, SumPath::Brute)?;
        out.push(CrossCheck::new("A3: fft vs brute-force", f.value, b.value, b.abs_scale, sampled));
    }
    if max_order >= 4 {
        let f = a4_parts(c, SumPath::Fft)?;
        let b = a4_parts(c, SumPath::Brute)?;
        out.push(CrossCheck::new("A4: fft vs brute-force", f.value, b.value, b.abs_scale, sampled));
    }
    Ok(out)
}

fn gram_scale(c: &CoefficientExpansion) -> f64 {
    let a1 = c.order(1);
    a1.iter()
        .filter(|(k, _)| !k.is_zero())
        .filter_map(|(k, a)| {
            let b = a1.coeff(&-*k)?;
            let kv = kvec(k);
            Some(outer(c.dim(), &matvec(a, &kv), &matvec(b, &kv), Complex64::new(1.0 / c.quad(k), 0.0)).norm())
        })
        .sum()
}

/// One reported correction tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Correction {
    pub value: CMat,
    pub real: DMatrix<f64>,
    /// Largest `|Im|` entry, kept as a diagnostic before dropping it.
    pub max_abs_imag: f64,
}

impl Correction {
    fn new(value: CMat) -> Self {
        let real = value.map(|z| z.re);
        let max_abs_imag = value.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        Correction { value, real, max_abs_imag }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossCheckMode {
    /// Full brute force for support radius ≤ 3, a random sub-sample above.
    Auto,
    Off,
}

#[derive(Clone, Debug)]
pub struct ReportOptions {
    /// Orders to compute, from `{2, 3, 4}`. `A₁∞ = 0` is always reported.
    pub orders: Vec<u8>,
    pub cross_check: CrossCheckMode,
    pub seed: u64,
    /// Number of `±k` mode pairs kept when sampling.
    pub sample_pairs: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { orders: vec![2, 3, 4], cross_check: CrossCheckMode::Auto, seed: 0, sample_pairs: 4 }
    }
}

/// Corrections `A₁∞..A₄∞` with provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrectionReport {
    /// Keyed by order 1..=4; absent orders were not requested.
    pub corrections: BTreeMap<u8, Correction>,
    pub truncation: usize,
    pub support_radius: usize,
    pub paths: Vec<String>,
    pub cross_checks: Vec<CrossCheck>,
    /// Wall-clock seconds per stage. Not part of any determinism contract.
    pub timings: Vec<(String, f64)>,
}

impl CorrectionReport {
    pub fn get(&self, order: u8) -> Option<&Correction> {
        self.corrections.get(&order)
    }

    pub fn worst_cross_check(&self) -> f64 {
        self.cross_checks.iter().map(|c| c.rel_delta).fold(0.0, f64::max)
    }
}

/// All orders `2..=max_order` with default options.
pub fn correction_report(c: &CoefficientExpansion, max_order: u8) -> Result<CorrectionReport> {
    let opts = ReportOptions { orders: (2..=max_order).collect(), ..ReportOptions::default() };
    correction_report_with(c, &opts)
}

pub fn correction_report_with(c: &CoefficientExpansion, opts: &ReportOptions) -> Result<CorrectionReport> {
    if let Some(o) = opts.orders.iter().find(|o| !(2..=4).contains(*o)) {
        return Err(Error::InvalidArgument(format!("order {o} (allowed 2, 3, 4)")));
    }
    let d = c.dim();
    let mut corrections = BTreeMap::new();
    let mut timings = Vec::new();
    let mut paths = vec!["A2: direct".to_string()];
    corrections.insert(1, Correction::new(CMat::zeros(d, d)));
    for &o in &opts.orders {
        let t = Instant::now();
        let v = match o {
            2 => a2_direct(c),
            3 => a3_correction(c)?,
            _ => a4_correction(c)?,
        };
        timings.push((format!("A{o}"), t.elapsed().as_secs_f64()));
        corrections.insert(o, Correction::new(v));
    }
    for o in [3u8, 4] {
        if opts.orders.contains(&o) {
            paths.push(format!("A{o}: fft"));
        }
    }
    let max_order = opts.orders.iter().copied().max().unwrap_or(2);
    let mut cross_checks = Vec::new();
    if opts.cross_check == CrossCheckMode::Auto {
        let t = Instant::now();
        let radius = c.support_radius();
        if radius <= FULL_CROSS_CHECK_RADIUS {
            cross_checks = cross_check(c, max_order, false)?;
        } else {
            let sub = sample_modes(c, opts.sample_pairs, opts.seed)?;
            cross_checks = cross_check(&sub, max_order, true)?;
        }
        paths.push("cross-check: brute-force".into());
        timings.push(("cross-check".into(), t.elapsed().as_secs_f64()));
    }
    Ok(CorrectionReport {
        corrections,
        truncation: c.trunc(),
        support_radius: c.support_radius(),
        paths,
        cross_checks,
        timings,
    })
}

/// Restrict the expansion to `pairs` random `±k` pairs (seeded).
fn sample_modes(c: &CoefficientExpansion, pairs: usize, seed: u64) -> Result<CoefficientExpansion> {
    let mut half: Vec<Mode> = (1..=3)
        .flat_map(|i| c.order(i).iter().map(|(k, _)| *k).collect::<Vec<_>>())
        .filter(|k| *k > -*k)
        .collect();
    half.sort();
    half.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    half.shuffle(&mut rng);
    let keep: Vec<Mode> = half.into_iter().take(pairs).flat_map(|k| [k, -k]).collect();
    c.restricted(&keep)
}
