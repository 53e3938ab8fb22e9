//! Random instance generators and property checks shared by the integration
//! suites.
#![allow(dead_code)]

use hcorr_core::corrections::{a2_direct, a3_correction, a4_correction, CoefficientExpansion};
use hcorr_core::fourier::{multiplier_apply, poly_product, CMat, Shape, Symbol, TrigPoly};
use hcorr_core::hmeasure::{p_product_limit, LimitSpec};
use hcorr_core::{Lattice, Mode};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Modes `k` with `k > −k` in the box of radius `k_max`.
pub fn half_modes(d: usize, k_max: usize) -> Vec<Mode> {
    Lattice::new(d, k_max).unwrap().modes().into_iter().filter(|k| *k > -*k).collect()
}

fn cplx(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Real zero-mean scalar sequence on `|k|∞ ≤ k_max`, each half-lattice mode
/// kept with probability `density`.
pub fn random_scalar(rng: &mut ChaCha8Rng, d: usize, k_max: usize, density: f64) -> TrigPoly {
    let l = Lattice::new(d, k_max).unwrap();
    let mut entries = Vec::new();
    for k in half_modes(d, k_max) {
        if rng.gen_bool(density) {
            let z = cplx(rng);
            entries.push((k, z));
            entries.push((-k, z.conj()));
        }
    }
    if entries.is_empty() {
        let k = half_modes(d, k_max)[0];
        entries = vec![(k, Complex64::new(1.0, 0.0)), (-k, Complex64::new(1.0, 0.0))];
    }
    TrigPoly::scalar(l, entries).unwrap().mark_real(1e-15).unwrap()
}

/// Real, symmetric-valued, zero-mean matrix sequence; every stored
/// coefficient has Frobenius norm `≤ amp`.
pub fn random_matrix_poly(rng: &mut ChaCha8Rng, d: usize, k_max: usize, amp: f64, density: f64) -> TrigPoly {
    let l = Lattice::new(d, k_max).unwrap();
    let mut entries = Vec::new();
    for k in half_modes(d, k_max) {
        if !rng.gen_bool(density) {
            continue;
        }
        let x = CMat::from_fn(d, d, |_, _| cplx(rng));
        let s = &x + x.transpose();
        let s = s.scale(amp * rng.gen_range(0.2..1.0) / s.norm());
        entries.push((k, s.clone()));
        entries.push((-k, s.map(|z| z.conj())));
    }
    TrigPoly::from_coeffs(l, Shape::Matrix, entries).unwrap()
}

/// SPD matrix with spectrum in `[a, cond·a]`, `a ∈ [0.5, 1]`.
pub fn random_spd(rng: &mut ChaCha8Rng, d: usize, cond: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    let q = g.qr().q();
    let a = rng.gen_range(0.5..1.0);
    let ev: Vec<f64> = (0..d).map(|i| if i == 0 { a } else { a * rng.gen_range(1.0..cond) }).collect();
    let m = &q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(ev)) * q.transpose();
    (&m + m.transpose()) * 0.5
}

pub struct ExpansionCfg {
    pub d: usize,
    pub k_max: usize,
    pub amp: f64,
    pub density: f64,
    pub orders: usize,
    pub cond: f64,
}

pub fn random_expansion(rng: &mut ChaCha8Rng, cfg: &ExpansionCfg) -> CoefficientExpansion {
    let a0 = random_spd(rng, cfg.d, cfg.cond);
    let orders = (1..=cfg.orders)
        .map(|i| (i, random_matrix_poly(rng, cfg.d, cfg.k_max, cfg.amp, cfg.density)))
        .collect();
    CoefficientExpansion::new(a0, orders).unwrap()
}

/// 1-D expansion with only `a₁` present.
pub fn random_1d(rng: &mut ChaCha8Rng, k_max: usize) -> (CoefficientExpansion, f64) {
    let a0 = rng.gen_range(0.5..2.0);
    let a1 = random_matrix_poly(rng, 1, k_max, 0.5, 1.0);
    (CoefficientExpansion::new(DMatrix::from_element(1, 1, a0), vec![(1, a1)]).unwrap(), a0)
}

/// `m_j = ∫₀¹ a(y)ʲ dy` by the trapezoid rule (exact for trigonometric
/// polynomials of degree below the sample count).
pub fn moments(a: &TrigPoly, samples: usize) -> [f64; 5] {
    let mut m = [0.0; 5];
    for i in 0..samples {
        let v = a.eval(&[i as f64 / samples as f64])[(0, 0)].re;
        let mut p = 1.0;
        for slot in m.iter_mut() {
            *slot += p;
            p *= v;
        }
    }
    m.map(|x| x / samples as f64)
}

pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}

pub fn rel_frob(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// A mixed bag of real, even, degree-0 homogeneous symbols.
pub fn random_scalar_symbol(rng: &mut ChaCha8Rng, d: usize) -> Symbol {
    match rng.gen_range(0..3) {
        0 => Symbol::one(d),
        1 => {
            let a0 = random_spd(rng, d, 3.0);
            let l: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            Symbol::oscillation_contracted(&a0, &l, &r).unwrap()
        }
        _ => {
            let mut e = vec![0u32; d];
            e[rng.gen_range(0..d)] = 2;
            Symbol::rational(d, vec![(e, 1.0), (vec![0; d], 0.5)], vec![]).unwrap()
        }
    }
}

// ---------------------------------------------------------------------------
// Properties. Each returns an error message on violation.

pub type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cfg_from(d: usize, k: usize, orders: usize) -> ExpansionCfg {
    ExpansionCfg { d, k_max: k, amp: 0.3, density: if d == 3 { 0.3 } else { 0.7 }, orders, cond: 4.0 }
}

/// Reality flags survive products and real multipliers; corrections of real
/// symmetric data have negligible imaginary parts.
pub fn prop_reality(seed: u64, d: usize, k: usize) -> Check {
    let mut r = rng(seed);
    let u = random_scalar(&mut r, d, k, 0.6);
    let v = random_scalar(&mut r, d, k, 0.6);
    ensure(u.flags().real, || "hermitian input not flagged real".into())?;
    let uv = poly_product(&u, &v).map_err(|e| e.to_string())?;
    ensure(uv.check_real(1e-12).is_ok(), || "product lost reality".into())?;
    let s = random_scalar_symbol(&mut r, d);
    let su = multiplier_apply(&s, &u).map_err(|e| e.to_string())?;
    ensure(su.check_real(1e-12).is_ok(), || format!("{} multiplier lost reality", s.label()))?;
    let c = random_expansion(&mut r, &cfg_from(d, k.min(2), 3));
    for (o, v) in [(2, a2_direct(&c)), (3, a3_correction(&c).unwrap()), (4, a4_correction(&c).unwrap())] {
        let scale = v.norm().max(1e-300);
        let im = v.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        ensure(im <= 1e-12 * scale.max(1.0), || format!("A{o} imaginary part {im:e}"))?;
        let re = v.map(|z| z.re);
        ensure((&re - re.transpose()).norm() <= 1e-12 * scale.max(1.0), || format!("A{o} not symmetric"))?;
    }
    Ok(())
}

/// `A₂∞ ≤ 0` for order-1-only data.
pub fn prop_a2_nsd(seed: u64, d: usize, k: usize) -> Check {
    let mut r = rng(seed);
    let c = random_expansion(&mut r, &cfg_from(d, k, 1));
    let a2 = a2_direct(&c).map(|z| z.re);
    let max_ev = SymmetricEigen::new((&a2 + a2.transpose()) * 0.5).eigenvalues.max();
    ensure(max_ev <= 1e-13 * a2.norm().max(1e-300), || format!("A2 eigenvalue {max_ev:e} > 0"))
}

/// `(A₀, A₁, A₂, A₃) ↦ c(A₀, A₁, A₂, A₃)` scales every correction by `c`.
pub fn prop_scaling_covariance(seed: u64, d: usize, k: usize, c: f64) -> Check {
    let mut r = rng(seed);
    let e = random_expansion(&mut r, &cfg_from(d, k.min(2), 3));
    let s = e.scaled(c).map_err(|e| e.to_string())?;
    let pairs = [
        (a2_direct(&e), a2_direct(&s)),
        (a3_correction(&e).unwrap(), a3_correction(&s).unwrap()),
        (a4_correction(&e).unwrap(), a4_correction(&s).unwrap()),
    ];
    for (i, (base, scaled)) in pairs.iter().enumerate() {
        let want = base * Complex64::new(c, 0.0);
        let err = (scaled - &want).norm();
        // a correction can vanish by symmetry; the floor sits far below the
        // size of any nonzero term for coefficients of size ~0.3 (1e-15 absolute)
        ensure(err <= 1e-11 * want.norm().max(1e-4 * c), || format!("A{} scaling error {err:e}", i + 2))?;
    }
    Ok(())
}

/// `u ↦ cu` multiplies the p-fold limit by `c^p`.
pub fn prop_power_scaling(seed: u64, d: usize, k: usize, p: usize, c: f64) -> Check {
    let mut r = rng(seed);
    let u = random_scalar(&mut r, d, k, 0.6);
    let symbols: Vec<Symbol> = (0..p).map(|_| random_scalar_symbol(&mut r, d)).collect();
    let one = Complex64::new(1.0, 0.0);
    let base = p_product_limit(&LimitSpec::power(&u, symbols.clone()).unwrap(), one).unwrap()[(0, 0)];
    let cu = u.scaled(Complex64::new(c, 0.0));
    let scaled = p_product_limit(&LimitSpec::power(&cu, symbols).unwrap(), one).unwrap()[(0, 0)];
    let want = base * c.powi(p as i32);
    let floor = u.iter().map(|(_, m)| m.norm()).sum::<f64>().powi(p as i32) * c.abs().powi(p as i32);
    ensure((scaled - want).norm() <= 1e-12 * floor, || format!("p={p}: {scaled} vs {want}"))
}

/// Enlarging the lattice box without adding modes changes nothing.
pub fn prop_truncation_completeness(seed: u64, d: usize, k: usize, extra: usize) -> Check {
    let mut r = rng(seed);
    let e = random_expansion(&mut r, &cfg_from(d, k.min(2), 3));
    let big = e.with_trunc(e.trunc() + extra).map_err(|e| e.to_string())?;
    let pairs = [
        (a2_direct(&e), a2_direct(&big)),
        (a3_correction(&e).unwrap(), a3_correction(&big).unwrap()),
        (a4_correction(&e).unwrap(), a4_correction(&big).unwrap()),
    ];
    for (i, (a, b)) in pairs.iter().enumerate() {
        let err = (a - b).norm();
        ensure(err <= 1e-13 * a.norm().max(1e-2), || format!("A{} changed by {err:e}", i + 2))?;
    }
    let u = random_scalar(&mut r, d, k, 0.6);
    let ub = u.with_lattice(Lattice::new(d, k + extra).unwrap()).unwrap();
    let sym: Vec<Symbol> = (0..3).map(|_| random_scalar_symbol(&mut r, d)).collect();
    let one = Complex64::new(1.0, 0.0);
    let a = p_product_limit(&LimitSpec::power(&u, sym.clone()).unwrap(), one).unwrap();
    let b = p_product_limit(&LimitSpec::power(&ub, sym).unwrap(), one).unwrap();
    ensure((&a - &b).norm() <= 1e-13 * a.norm().max(1.0), || "p-product limit depends on the box".into())
}
