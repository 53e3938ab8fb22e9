//! Order-fixed pairwise reductions.
//!
//! The split points depend only on the slice length, so results are
//! bit-reproducible for a given enumeration order.

use nalgebra::DMatrix;
use num_complex::Complex64;

const LEAF: usize = 8;

pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= LEAF {
        return xs.iter().fold(Complex64::new(0.0, 0.0), |a, &b| a + b);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_real(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_real(&xs[..mid]) + pairwise_sum_real(&xs[mid..])
}

/// Pairwise sum of equally shaped matrices; `None` for an empty slice.
pub fn pairwise_sum_mats(xs: &[DMatrix<Complex64>]) -> Option<DMatrix<Complex64>> {
    match xs.len() {
        0 => None,
        1 => Some(xs[0].clone()),
        n => {
            let mid = n / 2;
            let a = pairwise_sum_mats(&xs[..mid])?;
            let b = pairwise_sum_mats(&xs[mid..])?;
            Some(a + b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<Complex64> = (0..1000).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        let s = pairwise_sum(&xs);
        assert_eq!(s, Complex64::new(499500.0, -499500.0));
        assert_eq!(pairwise_sum_real(&[1.0, 2.0, 3.0]), 6.0);
        assert!(pairwise_sum_mats(&[]).is_none());
    }
}
