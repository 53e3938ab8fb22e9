use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::cell::{cell_solve, CellSolution};
use super::harmonic::harmonic_mean_1d;
use crate::corrections::CoefficientExpansion;
use crate::error::{Error, Result};

/// Fit degree; the top coefficient is kept only as a truncation sentinel.
pub const DEFAULT_DEGREE: usize = 7;
/// Largest accepted condition number of the scaled Vandermonde matrix.
pub const MAX_CONDITION: f64 = 1e8;
/// Default sample offsets in the amplitude-scaled variable `t = ργ`.
const T_GRID: [f64; 4] = [0.015, 0.03, 0.045, 0.06];

/// Taylor coefficients of `γ ↦ A_eff(γ)` from sampled effective tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaFit {
    pub gammas: Vec<f64>,
    pub tensors: Vec<DMatrix<f64>>,
    /// `C₀ … C_{degree−1}`; `C_i` estimates `A_i∞`.
    pub coefficients: Vec<DMatrix<f64>>,
    /// The discarded top coefficient `C_degree`.
    pub sentinel: DMatrix<f64>,
    pub degree: usize,
    /// Condition number of the scaled Vandermonde matrix.
    pub condition: f64,
    /// Largest least-squares residual over the tensor entries.
    pub fit_residual: f64,
    /// Largest truncation residual of the cell solutions (0 for 1-D means).
    pub max_cell_residual: f64,
}

impl GammaFit {
    pub fn coefficient(&self, i: usize) -> Option<&DMatrix<f64>> {
        self.coefficients.get(i)
    }
}

/// `±{0.015, 0.03, 0.045, 0.06}/ρ ∪ {0}` with `ρ` the
/// [amplitude](CoefficientExpansion::amplitude) of the expansion.
pub fn default_gammas(c: &CoefficientExpansion) -> Vec<f64> {
    let rho = c.amplitude();
    let scale = if rho > 0.0 { 1.0 / rho } else { 1.0 };
    let mut g: Vec<f64> = T_GRID.iter().flat_map(|t| [-t * scale, t * scale]).collect();
    g.push(0.0);
    g.sort_by(f64::total_cmp);
    g
}

/// Fits the cell-problem effective tensors at `gammas`.
///
/// Cell solves for distinct `γ` run in parallel; results are gathered in
/// input order, so the fit is deterministic.
pub fn gamma_fit(c: &CoefficientExpansion, gammas: &[f64], k_solver: usize, degree: usize) -> Result<GammaFit> {
    check_grid(gammas, degree)?;
    let sols: Vec<Result<CellSolution>> = gammas.par_iter().map(|&g| cell_solve(c, g, k_solver)).collect();
    let mut tensors = Vec::with_capacity(gammas.len());
    let mut worst: f64 = 0.0;
    for s in sols {
        let s = s?;
        if !s.converged {
            return Err(Error::NonConvergence { gamma: s.gamma, residual: s.solver_residual });
        }
        worst = worst.max(s.residual);
        tensors.push(s.a_eff);
    }
    let mut fit = fit_polynomial(gammas, &tensors, degree)?;
    fit.max_cell_residual = worst;
    Ok(fit)
}

/// Same fit with the 1-D harmonic mean as the sampled tensor.
pub fn gamma_fit_harmonic_1d(c: &CoefficientExpansion, gammas: &[f64], degree: usize) -> Result<GammaFit> {
    check_grid(gammas, degree)?;
    let tensors = gammas
        .iter()
        .map(|&g| Ok(DMatrix::from_element(1, 1, harmonic_mean_1d(c, g)?)))
        .collect::<Result<Vec<_>>>()?;
    fit_polynomial(gammas, &tensors, degree)
}

fn check_grid(gammas: &[f64], degree: usize) -> Result<()> {
    let mut g = gammas.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    if degree < 1 || g.len() < degree + 2 {
        return Err(Error::InvalidArgument(format!(
            "{} distinct gamma samples for degree {degree} (need at least {})",
            g.len(),
            degree + 2
        )));
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite gamma".into()));
    }
    Ok(())
}

/// Entrywise least squares in the monomials `(γ/s)^j`, `s = max|γ|`, via SVD.
pub fn fit_polynomial(gammas: &[f64], tensors: &[DMatrix<f64>], degree: usize) -> Result<GammaFit> {
    check_grid(gammas, degree)?;
    let (r, c) = tensors.first().map(|t| t.shape()).ok_or_else(|| Error::InvalidArgument("no samples".into()))?;
    let scale = gammas.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    let v = DMatrix::from_fn(gammas.len(), degree + 1, |i, j| (gammas[i] / scale).powi(j as i32));
    let svd = v.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::IllConditionedFit(format!("condition number {condition:e} exceeds {MAX_CONDITION:e}")));
    }
    let mut coeffs = vec![DMatrix::zeros(r, c); degree + 1];
    let mut fit_residual: f64 = 0.0;
    for a in 0..r {
        for b in 0..c {
            let y = DVector::from_iterator(gammas.len(), tensors.iter().map(|t| t[(a, b)]));
            let x = svd.solve(&y, 0.0).map_err(|e| Error::IllConditionedFit(e.into()))?;
            fit_residual = fit_residual.max((&v * &x - &y).norm());
            for j in 0..=degree {
                coeffs[j][(a, b)] = x[j] / scale.powi(j as i32);
            }
        }
    }
    let sentinel = coeffs.pop().expect("degree >= 1");
    Ok(GammaFit {
        gammas: gammas.to_vec(),
        tensors: tensors.to_vec(),
        coefficients: coeffs,
        sentinel,
        degree,
        condition,
        fit_residual,
        max_cell_residual: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{CMat, Shape, TrigPoly};
    use crate::mode::{Lattice, Mode};
    use num_complex::Complex64;

    fn cosine_1d() -> CoefficientExpansion {
        let l = Lattice::new(1, 1).unwrap();
        let a = CMat::from_element(1, 1, Complex64::new(1.0, 0.0));
        let a1 = TrigPoly::from_coeffs(l, Shape::Matrix, vec![(Mode::d1(1), a.clone()), (Mode::d1(-1), a)]).unwrap();
        CoefficientExpansion::new(DMatrix::from_element(1, 1, 1.0), vec![(1, a1)]).unwrap()
    }

    #[test]
    fn exact_polynomial_is_recovered() {
        let g: Vec<f64> = (-4..=4).map(|i| i as f64 * 0.1).collect();
        let t: Vec<DMatrix<f64>> = g.iter().map(|x| DMatrix::from_element(1, 1, 1.0 - 2.0 * x * x + 0.5 * x.powi(3))).collect();
        let f = fit_polynomial(&g, &t, 5).unwrap();
        for (i, e) in [1.0, 0.0, -2.0, 0.5, 0.0].iter().enumerate() {
            assert!((f.coefficients[i][(0, 0)] - e).abs() < 1e-10, "C{i}");
        }
        assert!(f.sentinel[(0, 0)].abs() < 1e-8);
    }

    #[test]
    fn cosine_coefficients_from_both_oracles() {
        let c = cosine_1d();
        let g = default_gammas(&c);
        for f in [gamma_fit_harmonic_1d(&c, &g, DEFAULT_DEGREE).unwrap(), gamma_fit(&c, &g, 32, DEFAULT_DEGREE).unwrap()] {
            assert!((f.coefficients[0][(0, 0)] - 1.0).abs() < 1e-12);
            assert!(f.coefficients[1][(0, 0)].abs() < 1e-6);
            assert!((f.coefficients[2][(0, 0)] + 2.0).abs() < 2e-3);
            assert!(f.coefficients[3][(0, 0)].abs() < 2e-3);
            assert!((f.coefficients[4][(0, 0)] + 2.0).abs() < 2e-3);
        }
    }

    #[test]
    fn rejects_short_or_degenerate_grids() {
        let c = cosine_1d();
        assert_eq!(gamma_fit_harmonic_1d(&c, &[0.0, 0.01, 0.02], 5).unwrap_err().code(), "invalid-argument");
        let g: Vec<f64> = (0..12).map(|i| 1.0 + 1e-9 * i as f64).collect();
        let t = vec![DMatrix::from_element(1, 1, 1.0); 12];
        assert_eq!(fit_polynomial(&g, &t, 7).unwrap_err().code(), "ill-conditioned-fit");
    }
}
