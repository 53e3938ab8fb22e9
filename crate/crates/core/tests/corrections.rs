mod common;

use common::*;
use hcorr_core::corrections::{
    a2_direct, a2_via_measure, a3_correction, a3_correction_with, a4_correction, a4_correction_with,
    correction_report_with, CoefficientExpansion, CrossCheckMode, ReportOptions, SumPath,
};
use hcorr_core::fourier::{CMat, Shape, TrigPoly};
use hcorr_core::oracle::{default_gammas, gamma_fit_harmonic_1d, DEFAULT_DEGREE};
use hcorr_core::{Lattice, Mode};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn scalar_matrix_poly(k: usize, entries: &[(i64, Complex64)]) -> TrigPoly {
    let l = Lattice::new(1, k).unwrap();
    let mut all = Vec::new();
    for &(m, z) in entries {
        all.push((Mode::d1(m), CMat::from_element(1, 1, z)));
        all.push((Mode::d1(-m), CMat::from_element(1, 1, z.conj())));
    }
    TrigPoly::from_coeffs(l, Shape::Matrix, all).unwrap()
}

fn mean_of_product(polys: &[&TrigPoly], samples: usize) -> f64 {
    (0..samples)
        .map(|i| {
            let x = [i as f64 / samples as f64];
            polys.iter().map(|p| p.eval(&x)[(0, 0)].re).product::<f64>()
        })
        .sum::<f64>()
        / samples as f64
}

#[test]
fn two_mode_cubic_term() {
    let one = Complex64::new(1.0, 0.0);
    let a1 = scalar_matrix_poly(2, &[(1, one), (2, one)]);
    let c = CoefficientExpansion::new(DMatrix::from_element(1, 1, 1.0), vec![(1, a1.clone())]).unwrap();
    let m3 = mean_of_product(&[&a1, &a1, &a1], 64);
    assert!((m3 - 6.0).abs() < 1e-12);
    assert!((a3_correction(&c).unwrap()[(0, 0)].re - m3).abs() < 1e-12);
}

/// With all three orders present the 1-D expansion of `1/⟨1/a⟩` gives
/// `A₃ = −2⟨a₁a₂⟩/A₀ + m₃/A₀²` and
/// `A₄ = −⟨a₂²⟩/A₀ − 2⟨a₁a₃⟩/A₀ + 3⟨a₁²a₂⟩/A₀² + (m₂² − m₄)/A₀³`.
#[test]
fn one_dimensional_general_orders() {
    let mut r = rng(21);
    for _ in 0..20 {
        let a0: f64 = 0.5 + (r.next_u32() as f64 / u32::MAX as f64) * 1.5;
        let orders: Vec<TrigPoly> = (0..3).map(|_| random_matrix_poly(&mut r, 1, 3, 0.4, 0.8)).collect();
        let c = CoefficientExpansion::new(
            DMatrix::from_element(1, 1, a0),
            orders.iter().cloned().enumerate().map(|(i, p)| (i + 1, p)).collect(),
        )
        .unwrap();
        let (a1, a2, a3) = (&orders[0], &orders[1], &orders[2]);
        let m = |ps: &[&TrigPoly]| mean_of_product(ps, 64);
        let m2 = m(&[a1, a1]);
        let want3 = -2.0 * m(&[a1, a2]) / a0 + m(&[a1, a1, a1]) / (a0 * a0);
        let want4 = -m(&[a2, a2]) / a0 - 2.0 * m(&[a1, a3]) / a0 + 3.0 * m(&[a1, a1, a2]) / (a0 * a0)
            + (m2 * m2 - m(&[a1, a1, a1, a1])) / a0.powi(3);
        let got3 = a3_correction(&c).unwrap()[(0, 0)];
        let got4 = a4_correction(&c).unwrap()[(0, 0)];
        assert!((got3.re - want3).abs() <= 1e-12 * (1.0 + want3.abs()), "{got3} vs {want3}");
        assert!((got4.re - want4).abs() <= 1e-12 * (1.0 + want4.abs()), "{got4} vs {want4}");
        assert!(got3.im.abs() < 1e-14 && got4.im.abs() < 1e-14);
    }
}

#[test]
fn harmonic_mean_fit_agrees_with_formulas() {
    let mut r = rng(5);
    for _ in 0..5 {
        let orders: Vec<(usize, TrigPoly)> = (1..=3).map(|i| (i, random_matrix_poly(&mut r, 1, 2, 0.3, 1.0))).collect();
        let c = CoefficientExpansion::new(DMatrix::from_element(1, 1, 1.3), orders).unwrap();
        let fit = gamma_fit_harmonic_1d(&c, &default_gammas(&c), DEFAULT_DEGREE).unwrap();
        let f = [a2_direct(&c), a3_correction(&c).unwrap(), a4_correction(&c).unwrap()];
        for (i, v) in f.iter().enumerate() {
            let want = v[(0, 0)].re;
            let got = fit.coefficients[i + 2][(0, 0)];
            assert!((got - want).abs() <= 1e-3 * want.abs().max(1e-3), "C{}: {got} vs {want}", i + 2);
        }
    }
}

#[test]
fn measure_route_matches_direct_route() {
    let mut r = rng(8);
    for d in 1..=3 {
        let c = random_expansion(&mut r, &ExpansionCfg { d, k_max: 2, amp: 0.5, density: 0.7, orders: 1, cond: 3.0 });
        let (a, b) = (a2_direct(&c), a2_via_measure(&c).unwrap());
        assert!((&a - &b).norm() <= 1e-13 * a.norm().max(1.0));
    }
}

#[test]
fn paths_agree_in_three_dimensions() {
    let mut r = rng(9);
    let c = random_expansion(&mut r, &ExpansionCfg { d: 3, k_max: 2, amp: 0.5, density: 0.5, orders: 3, cond: 4.0 });
    let pairs = [
        (a3_correction_with(&c, SumPath::Fft).unwrap(), a3_correction_with(&c, SumPath::Brute).unwrap()),
        (a4_correction_with(&c, SumPath::Fft).unwrap(), a4_correction_with(&c, SumPath::Brute).unwrap()),
    ];
    for (f, b) in pairs {
        assert!((&f - &b).norm() <= 1e-12 * b.norm().max(1.0));
    }
}

#[test]
fn large_support_uses_sampled_cross_check() {
    let mut r = rng(12);
    let c = random_expansion(&mut r, &ExpansionCfg { d: 2, k_max: 5, amp: 0.3, density: 0.3, orders: 2, cond: 2.0 });
    assert!(c.support_radius() > 3);
    let opts = ReportOptions { seed: 3, ..ReportOptions::default() };
    let rep = correction_report_with(&c, &opts).unwrap();
    assert!(rep.cross_checks.iter().all(|x| x.sampled));
    assert!(rep.worst_cross_check() <= 1e-12);
    let again = correction_report_with(&c, &opts).unwrap();
    assert_eq!(rep.cross_checks, again.cross_checks);
    let off = correction_report_with(&c, &ReportOptions { cross_check: CrossCheckMode::Off, ..opts }).unwrap();
    assert!(off.cross_checks.is_empty());
    assert_eq!(off.corrections, rep.corrections);
}

#[test]
fn restriction_matches_spec_example() {
    // A₀ = I, Â_{1,±(1,0)} = I in two dimensions: A₂∞ = diag(−2, 0)
    let l = Lattice::new(2, 1).unwrap();
    let id = CMat::identity(2, 2);
    let a1 = TrigPoly::from_coeffs(l, Shape::Matrix, vec![(Mode::d2(1, 0), id.clone()), (Mode::d2(-1, 0), id)]).unwrap();
    let c = CoefficientExpansion::new(DMatrix::identity(2, 2), vec![(1, a1)]).unwrap();
    let a2 = a2_direct(&c).map(|z| z.re);
    assert_eq!(a2, DMatrix::from_row_slice(2, 2, &[-2.0, 0.0, 0.0, 0.0]));
}

use rand::RngCore;
