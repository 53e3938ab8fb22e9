use crate::corrections::CoefficientExpansion;
use crate::error::{Error, Result};
use crate::sum::pairwise_sum_real;

/// Panels of the first quadrature level.
const BASE_PANELS: usize = 4096;
const MAX_PANELS: usize = 1 << 20;
/// Agreement required between successive panel doublings.
const CHECK_TOL: f64 = 1e-13;

/// `(∫₀¹ dy / A_γ(y))⁻¹` with its refinement check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarmonicMean {
    pub value: f64,
    pub panels: usize,
    /// `|I(N) − I(2N)|` for the reported `N = panels`.
    pub check: f64,
}

pub fn harmonic_mean_1d(c: &CoefficientExpansion, gamma: f64) -> Result<f64> {
    Ok(harmonic_mean_1d_checked(c, gamma)?.value)
}

/// Composite trapezoid rule on the periodic integrand, doubling the panel
/// count from 4096 until two levels agree. For an analytic periodic
/// integrand the rule converges geometrically.
pub fn harmonic_mean_1d_checked(c: &CoefficientExpansion, gamma: f64) -> Result<HarmonicMean> {
    if c.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: c.dim() });
    }
    let b = c.perturbation(gamma)?;
    let a0 = c.a0()[(0, 0)];
    let bound = 0.5 * c.alpha();
    let coeffs: Vec<(f64, f64, f64)> = b.iter().map(|(k, m)| (k.0[0] as f64, m[(0, 0)].re, m[(0, 0)].im)).collect();
    let a_at = |y: f64| {
        let mut s = a0;
        for &(k, re, im) in &coeffs {
            let (sn, cs) = (2.0 * std::f64::consts::PI * k * y).sin_cos();
            s += re * cs - im * sn;
        }
        s
    };
    let level = |n: usize| -> Result<f64> {
        let vals: Vec<f64> = (0..n).map(|i| a_at(i as f64 / n as f64)).collect();
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if min < bound {
            return Err(Error::Ellipticity { gamma, min_eig: min, bound });
        }
        let inv: Vec<f64> = vals.iter().map(|a| 1.0 / a).collect();
        Ok(pairwise_sum_real(&inv) / n as f64)
    };
    let mut n = BASE_PANELS;
    let mut coarse = level(n)?;
    loop {
        let fine = level(2 * n)?;
        let check = (fine - coarse).abs();
        if check <= CHECK_TOL * fine.abs() {
            return Ok(HarmonicMean { value: 1.0 / fine, panels: 2 * n, check });
        }
        if 2 * n >= MAX_PANELS {
            return Err(Error::NonConvergence { gamma, residual: check });
        }
        n *= 2;
        coarse = fine;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{CMat, Shape, TrigPoly};
    use crate::mode::{Lattice, Mode};
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    #[test]
    fn closed_form_and_trivial_cases() {
        let l = Lattice::new(1, 1).unwrap();
        let a = CMat::from_element(1, 1, Complex64::new(0.1, 0.0));
        let a1 = TrigPoly::from_coeffs(l, Shape::Matrix, vec![(Mode::d1(1), a.clone()), (Mode::d1(-1), a)]).unwrap();
        let c = CoefficientExpansion::new(DMatrix::from_element(1, 1, 1.0), vec![(1, a1)]).unwrap();
        assert_eq!(harmonic_mean_1d(&c, 0.0).unwrap(), 1.0);
        let v = harmonic_mean_1d(&c, 1.0).unwrap();
        assert!((v - 0.9797958971132712).abs() < 1e-14, "{v}");
        assert_eq!(harmonic_mean_1d(&c, 6.0).unwrap_err().code(), "ellipticity");
    }
}
