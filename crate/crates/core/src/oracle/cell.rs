use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::corrections::CoefficientExpansion;
use crate::error::{Error, Result};
use crate::fourier::{Shape, TrigPoly};
use crate::mode::{box_modes, Lattice, Mode};

/// Solution of the cell problem at one `γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSolution {
    pub gamma: f64,
    pub k_solver: usize,
    /// `χ_j` for each coordinate direction `e_j`.
    pub correctors: Vec<TrigPoly>,
    pub a_eff: DMatrix<f64>,
    /// Largest `|Im|` entry of the averaged flux (should vanish).
    pub max_abs_imag: f64,
    /// Equation residual including the modes just outside the Galerkin box,
    /// relative to the right-hand side. Measures truncation.
    pub residual: f64,
    /// Relative residual of the linear solve inside the box.
    pub solver_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellOptions {
    /// Relative residual at which the iteration stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CellOptions {
    fn default() -> Self {
        CellOptions { tol: 1e-14, max_iter: 2000 }
    }
}

/// Four times the data support radius (at least 4).
pub fn default_k_solver(c: &CoefficientExpansion) -> usize {
    4 * c.support_radius().max(1)
}

/// Refuse `γ` when `A_γ(y)` drops below `α/2` on a dense grid.
pub fn check_ellipticity(c: &CoefficientExpansion, gamma: f64) -> Result<()> {
    let d = c.dim();
    let b = c.perturbation(gamma)?;
    let bound = 0.5 * c.alpha();
    let n = (8 * b.support_radius()).max(16) as i64;
    let mut worst = f64::INFINITY;
    // box indices -n..=n shifted onto 2n+1 equispaced points per axis
    for idx in box_modes(d, n) {
        let x: Vec<f64> = idx.0.iter().take(d).map(|&v| (v + n) as f64 / (2 * n + 1) as f64).collect();
        let bx = b.eval(&x);
        let a = DMatrix::from_fn(d, d, |i, j| c.a0()[(i, j)] + 0.5 * (bx[(i, j)].re + bx[(j, i)].re));
        worst = worst.min(SymmetricEigen::new(a).eigenvalues.min());
    }
    if worst < bound {
        return Err(Error::Ellipticity { gamma, min_eig: worst, bound });
    }
    Ok(())
}

pub fn cell_solve(c: &CoefficientExpansion, gamma: f64, k_solver: usize) -> Result<CellSolution> {
    cell_solve_with(c, gamma, k_solver, &CellOptions::default())
}

/// Galerkin projection onto `0 < |k|∞ ≤ K_solver`.
///
/// With `φ_k = 2πi χ̂_k` and `B = A_γ − A₀`, the projected equations read
/// `(A₀k·k) φ_k + Σ_l (k·B̂_{k−l} l) φ_l = −k·B̂_k e_j`. The system is
/// Hermitian positive definite and is solved by conjugate gradients
/// preconditioned with the constant part `A₀k·k`. The operator is applied by
/// sparse convolution with the stored modes of `B`.
pub fn cell_solve_with(c: &CoefficientExpansion, gamma: f64, k_solver: usize, opts: &CellOptions) -> Result<CellSolution> {
    if k_solver == 0 {
        return Err(Error::InvalidArgument("K_solver must be at least 1".into()));
    }
    check_ellipticity(c, gamma)?;
    let d = c.dim();
    let b = c.perturbation(gamma)?;
    let op = Operator::new(c, &b, k_solver);
    let mut correctors = Vec::with_capacity(d);
    let mut a_eff = DMatrix::zeros(d, d);
    let mut max_abs_imag: f64 = 0.0;
    let (mut res_num, mut res_den) = (0.0, 0.0);
    let mut solver_residual: f64 = 0.0;
    let mut iterations = 0;
    for j in 0..d {
        let rhs = op.rhs(j, k_solver as i64);
        let (phi, its, rel) = op.pcg(&rhs, opts);
        iterations = iterations.max(its);
        solver_residual = solver_residual.max(rel);
        let (num, den) = op.extended_residual(&phi, j);
        res_num += num;
        res_den += den;
        let flux = op.mean_flux(&phi, j);
        for i in 0..d {
            a_eff[(i, j)] = c.a0()[(i, j)] + flux[i].re;
            max_abs_imag = max_abs_imag.max(flux[i].im.abs());
        }
        correctors.push(op.corrector(&phi)?);
    }
    let residual = if res_den > 0.0 { (res_num / res_den).sqrt() } else { 0.0 };
    Ok(CellSolution {
        gamma,
        k_solver,
        correctors,
        a_eff,
        max_abs_imag,
        residual,
        solver_residual,
        iterations,
        converged: solver_residual <= opts.tol * 10.0,
    })
}

type M3 = [[Complex64; 3]; 3];

struct Operator {
    dim: usize,
    /// Half-width of the index box (`K_solver + support`), so that the
    /// extended residual fits.
    half: i64,
    k_solver: i64,
    modes: Vec<Mode>,
    diag: Vec<f64>,
    b: Vec<(Mode, M3)>,
    lattice: Lattice,
}

impl Operator {
    fn new(c: &CoefficientExpansion, b: &TrigPoly, k_solver: usize) -> Self {
        let dim = c.dim();
        let support = b.support_radius() as i64;
        let half = k_solver as i64 + support;
        let modes = box_modes(dim, half);
        let diag = modes
            .iter()
            .map(|k| {
                let kf = k.as_f64();
                (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| kf[i] * c.a0()[(i, j)] * kf[j]).sum()
            })
            .collect();
        let zero = Complex64::new(0.0, 0.0);
        let b = b
            .iter()
            .filter(|(_, m)| m.iter().any(|z| *z != zero))
            .map(|(k, m)| {
                let mut a = [[zero; 3]; 3];
                for i in 0..dim {
                    for j in 0..dim {
                        a[i][j] = m[(i, j)];
                    }
                }
                (*k, a)
            })
            .collect();
        let lattice = Lattice::new(dim, k_solver).expect("validated dimension");
        Operator { dim, half, k_solver: k_solver as i64, modes, diag, b, lattice }
    }

    fn index(&self, k: &Mode) -> Option<usize> {
        let w = 2 * self.half + 1;
        let mut idx = 0i64;
        for i in 0..self.dim {
            let v = k.0[i];
            if v.abs() > self.half {
                return None;
            }
            idx = idx * w + (v + self.half);
        }
        Some(idx as usize)
    }

    fn inner(&self, k: &Mode) -> bool {
        !k.is_zero() && k.max_norm() as i64 <= self.k_solver
    }

    fn form(&self, k: &Mode, b: &M3, l: &Mode) -> Complex64 {
        let (kf, lf) = (k.as_f64(), l.as_f64());
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += b[i][j] * (kf[i] * lf[j]);
            }
        }
        s
    }

    /// `(D + M)φ` on every box mode; `φ` vanishes outside the inner box.
    fn apply_full(&self, phi: &[Complex64]) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = phi.iter().zip(&self.diag).map(|(p, d)| p * d).collect();
        for (m, bm) in &self.b {
            for (li, l) in self.modes.iter().enumerate() {
                if phi[li] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let k = *l + *m;
                if k.is_zero() {
                    continue;
                }
                if let Some(ki) = self.index(&k) {
                    out[ki] += self.form(&k, bm, l) * phi[li];
                }
            }
        }
        out
    }

    fn apply(&self, phi: &[Complex64]) -> Vec<Complex64> {
        let mut out = self.apply_full(phi);
        for (o, k) in out.iter_mut().zip(&self.modes) {
            if !self.inner(k) {
                *o = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// `−k·B̂_k e_j` on modes with `|k|∞ ≤ radius`.
    fn rhs(&self, j: usize, radius: i64) -> Vec<Complex64> {
        let mut r = vec![Complex64::new(0.0, 0.0); self.modes.len()];
        for (m, bm) in &self.b {
            if m.is_zero() || m.max_norm() as i64 > radius {
                continue;
            }
            if let Some(i) = self.index(m) {
                let mf = m.as_f64();
                r[i] = -(0..self.dim).map(|a| bm[a][j] * mf[a]).sum::<Complex64>();
            }
        }
        r
    }

    fn pcg(&self, b: &[Complex64], opts: &CellOptions) -> (Vec<Complex64>, usize, f64) {
        let n = b.len();
        let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let dot = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>();
        let precond = |r: &[Complex64]| -> Vec<Complex64> {
            r.iter().zip(&self.diag).map(|(z, d)| if *d > 0.0 { z / d } else { *z * 0.0 }).collect()
        };
        let bn = norm(b);
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        if bn == 0.0 {
            return (x, 0, 0.0);
        }
        let mut r = b.to_vec();
        let mut z = precond(&r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z).re;
        let mut its = 0;
        while its < opts.max_iter {
            its += 1;
            let ap = self.apply(&p);
            let alpha = rz / dot(&p, &ap).re;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            if norm(&r) <= opts.tol * bn {
                break;
            }
            z = precond(&r);
            let rz_new = dot(&r, &z).re;
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        let ax = self.apply(&x);
        let true_res = norm(&ax.iter().zip(b).map(|(a, b)| b - a).collect::<Vec<_>>()) / bn;
        (x, its, true_res)
    }

    /// Squared residual of the untruncated equations over the extended box,
    /// and the squared norm of the matching right-hand side.
    fn extended_residual(&self, phi: &[Complex64], j: usize) -> (f64, f64) {
        let rhs = self.rhs(j, self.half);
        let full = self.apply_full(phi);
        let mut num = 0.0;
        for (i, k) in self.modes.iter().enumerate() {
            if !k.is_zero() {
                num += (full[i] - rhs[i]).norm_sqr();
            }
        }
        (num, rhs.iter().map(|z| z.norm_sqr()).sum())
    }

    /// `Σ_l B̂_{−l} l φ_l`, the mean of `B∇χ_j`.
    fn mean_flux(&self, phi: &[Complex64], _j: usize) -> [Complex64; 3] {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (m, bm) in &self.b {
            let l = -*m;
            let Some(li) = self.index(&l) else { continue };
            if phi[li] == Complex64::new(0.0, 0.0) {
                continue;
            }
            let lf = l.as_f64();
            for i in 0..self.dim {
                for n in 0..self.dim {
                    out[i] += bm[i][n] * lf[n] * phi[li];
                }
            }
        }
        out
    }

    /// `χ̂_k = φ_k / (2πi)`.
    fn corrector(&self, phi: &[Complex64]) -> Result<TrigPoly> {
        let scale = Complex64::new(0.0, -1.0 / (2.0 * std::f64::consts::PI));
        let entries = self
            .modes
            .iter()
            .zip(phi)
            .filter(|(k, p)| self.inner(k) && **p != Complex64::new(0.0, 0.0))
            .map(|(k, p)| (*k, p * scale));
        let chi = TrigPoly::scalar(self.lattice, entries)?;
        debug_assert_eq!(chi.shape(), Shape::Scalar);
        chi.mark_zero_mean()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::CMat;

    fn cosine_1d(amp: f64) -> CoefficientExpansion {
        let l = Lattice::new(1, 1).unwrap();
        let a = CMat::from_element(1, 1, Complex64::new(amp, 0.0));
        let a1 = TrigPoly::from_coeffs(l, Shape::Matrix, vec![(Mode::d1(1), a.clone()), (Mode::d1(-1), a)]).unwrap();
        CoefficientExpansion::new(DMatrix::from_element(1, 1, 1.0), vec![(1, a1)]).unwrap()
    }

    #[test]
    fn gamma_zero_is_a0() {
        let c = cosine_1d(1.0);
        let s = cell_solve(&c, 0.0, 8).unwrap();
        assert_eq!(s.a_eff[(0, 0)], 1.0);
        assert!(s.correctors[0].is_zero() && s.converged);
    }

    #[test]
    fn one_dimensional_cosine_matches_closed_form() {
        let c = cosine_1d(1.0);
        let s = cell_solve(&c, 0.1, 32).unwrap();
        assert!((s.a_eff[(0, 0)] - (1.0f64 - 0.04).sqrt()).abs() < 1e-12, "{}", s.a_eff[(0, 0)]);
        assert!(s.converged && s.residual < 1e-12);
    }

    #[test]
    fn residual_shrinks_with_k_solver() {
        let c = cosine_1d(1.0);
        let r: Vec<f64> = [2, 4, 8].iter().map(|&k| cell_solve(&c, 0.2, k).unwrap().residual).collect();
        assert!(r[1] <= r[0] && r[2] <= r[1], "{r:?}");
    }

    #[test]
    fn refuses_non_elliptic_gamma() {
        let c = cosine_1d(1.0);
        assert!(cell_solve(&c, 0.2, 8).is_ok());
        let err = cell_solve(&c, 0.3, 8).unwrap_err();
        assert_eq!(err.code(), "ellipticity");
        match err {
            Error::Ellipticity { gamma, .. } => assert_eq!(gamma, 0.3),
            _ => unreachable!(),
        }
    }
}
