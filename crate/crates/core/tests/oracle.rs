mod common;

use common::*;
use hcorr_core::corrections::CoefficientExpansion;
use hcorr_core::fourier::{Symbol, TrigPoly};
use hcorr_core::hmeasure::LimitSpec;
use hcorr_core::oracle::{
    cell_solve, default_gammas, finite_n_limit, gamma_fit, harmonic_mean_1d, Bump, WindowSpec, DEFAULT_DEGREE,
};
use hcorr_core::{Lattice, Mode};
use nalgebra::DMatrix;
use num_complex::Complex64;

#[test]
fn harmonic_mean_matches_cell_solver_in_one_dimension() {
    let mut r = rng(31);
    for _ in 0..10 {
        let orders: Vec<(usize, TrigPoly)> = (1..=3).map(|i| (i, random_matrix_poly(&mut r, 1, 3, 0.3, 0.8))).collect();
        let c = CoefficientExpansion::new(DMatrix::from_element(1, 1, 1.0), orders).unwrap();
        // t = γρ ≤ 0.25 keeps |A_γ − A₀| below α/2 for up to three orders
        for gamma in [0.1, 0.25].map(|t| t / c.amplitude()) {
            let h = harmonic_mean_1d(&c, gamma).unwrap();
            let s = cell_solve(&c, gamma, 32).unwrap();
            assert!((h - s.a_eff[(0, 0)]).abs() <= 1e-8, "{h} vs {}", s.a_eff[(0, 0)]);
        }
    }
}

#[test]
fn cell_solution_invariants() {
    let mut r = rng(32);
    for d in 2..=3 {
        let k = if d == 3 { 1 } else { 2 };
        let c = random_expansion(&mut r, &ExpansionCfg { d, k_max: k, amp: 0.15, density: 0.7, orders: 2, cond: 3.0 });
        let s = cell_solve(&c, 0.3 / c.amplitude(), 4 * k).unwrap();
        assert!(s.converged);
        assert!((&s.a_eff - s.a_eff.transpose()).norm() <= 1e-10);
        assert!(s.correctors.iter().all(|chi| chi.coeff(&Mode::ZERO).is_none()));
        assert!(s.max_abs_imag <= 1e-12);
    }
}

#[test]
fn truncation_residual_decreases_with_k_solver() {
    let mut r = rng(33);
    let c = random_expansion(&mut r, &ExpansionCfg { d: 2, k_max: 2, amp: 0.2, density: 1.0, orders: 1, cond: 2.0 });
    let gamma = 0.3 / c.amplitude();
    let res: Vec<f64> = [2, 4, 8, 16].iter().map(|&k| cell_solve(&c, gamma, k).unwrap().residual).collect();
    for w in res.windows(2) {
        assert!(w[1] <= w[0], "{res:?}");
    }
    assert!(res[0] > res[3] && res[0] > 0.0, "{res:?}");
}

#[test]
fn fit_of_trivial_expansion() {
    let c = CoefficientExpansion::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]), vec![]).unwrap();
    let gammas = default_gammas(&c);
    let f = gamma_fit(&c, &gammas, 4, DEFAULT_DEGREE).unwrap();
    assert!((&f.coefficients[0] - c.a0()).norm() < 1e-14);
    // Rounding in the samples is amplified by 1/γ_max^j in C_j.
    let g_max = gammas.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    for (j, ci) in f.coefficients.iter().enumerate().skip(1) {
        assert!(ci.norm() * g_max.powi(j as i32) < 1e-12 * c.a0().norm(), "C{j}");
    }
}

#[test]
fn non_elliptic_gamma_is_named() {
    let one = Complex64::new(1.0, 0.0);
    let l = Lattice::new(1, 1).unwrap();
    let a1 = TrigPoly::from_coeffs(
        l,
        hcorr_core::fourier::Shape::Matrix,
        vec![(Mode::d1(1), hcorr_core::fourier::CMat::from_element(1, 1, one)), (Mode::d1(-1), hcorr_core::fourier::CMat::from_element(1, 1, one))],
    )
    .unwrap();
    let c = CoefficientExpansion::new(DMatrix::from_element(1, 1, 1.0), vec![(1, a1)]).unwrap();
    let err = gamma_fit(&c, &[-0.5, -0.1, -0.05, 0.0, 0.05, 0.1, 0.15, 0.2, 0.25], 8, 7).unwrap_err();
    assert_eq!(err.code(), "ellipticity");
    assert!(err.to_string().contains("-0.5"));
}

/// A Ψ-type multiplier smears the finite-n spectrum around `nk`, giving an
/// `O(n⁻²)` error once the transient cross-mode terms have decayed.
#[test]
fn multiplier_limit_converges_at_second_order() {
    let one = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.5, -0.3);
    let l = Lattice::new(2, 1).unwrap();
    let u = TrigPoly::scalar(l, [(Mode::d2(1, 1), one), (Mode::d2(-1, -1), one), (Mode::d2(1, 0), z), (Mode::d2(-1, 0), z.conj())])
        .unwrap();
    let psi = Symbol::oscillation_contracted(&DMatrix::identity(2, 2), &[1.0, 0.0], &[1.0, 0.0]).unwrap();
    let spec = LimitSpec::power(&u, vec![psi.clone(), psi]).unwrap();
    let run = finite_n_limit(&spec, &WindowSpec::Shared(Bump::centered(0.4)), &[16, 32, 64], 512).unwrap();
    for w in run.errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.0..5.0).contains(&ratio), "{:?}", run.errors);
    }
}
