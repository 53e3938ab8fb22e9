//! Dense periodic grids and the n-dimensional FFT used by the product paths.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{CMat, TrigPoly};
use crate::mode::{box_modes, Mode};
use crate::sum::pairwise_sum;

/// Grid size per axis for a `p`-fold product of factors with support
/// radius `k`: the next power of two `≥ p·(2k)+1`.
pub fn fft_size_for(p: usize, k: usize) -> usize {
    (p * 2 * k.max(1) + 1).next_power_of_two()
}

/// Point values of a tensor field on an `n^d` periodic grid, one array per
/// tensor component (row-major component index).
#[derive(Clone, Debug)]
pub struct FieldGrid {
    pub dim: usize,
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    pub comps: Vec<Vec<Complex64>>,
}

impl FieldGrid {
    pub fn points(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    fn zeros(dim: usize, n: usize, rows: usize, cols: usize) -> Self {
        let len = n.pow(dim as u32);
        FieldGrid { dim, n, rows, cols, comps: vec![vec![Complex64::new(0.0, 0.0); len]; rows * cols] }
    }

    /// Synthesize `u(x_j) = Σ_k û_k e^{2πi k·x_j}` on the grid, optionally
    /// transposing each coefficient first.
    pub fn from_poly(u: &TrigPoly, n: usize, transpose: bool) -> Self {
        let (r, c) = u.coeff_dims();
        let (rows, cols) = if transpose { (c, r) } else { (r, c) };
        let mut g = FieldGrid::zeros(u.dim(), n, rows, cols);
        for (k, coeff) in u.iter() {
            let idx = grid_index(k, u.dim(), n);
            for i in 0..rows {
                for j in 0..cols {
                    let v = if transpose { coeff[(j, i)] } else { coeff[(i, j)] };
                    g.comps[i * cols + j][idx] += v;
                }
            }
        }
        for comp in g.comps.iter_mut() {
            fftn(comp, g.dim, n, true);
        }
        g
    }

    /// Pointwise tensor product `self · other`; 1×1 fields broadcast as scalars.
    pub fn pointwise_mul(&self, other: &FieldGrid) -> FieldGrid {
        let len = self.points();
        if self.rows == 1 && self.cols == 1 {
            let mut out = other.clone();
            for comp in out.comps.iter_mut() {
                comp.iter_mut().zip(&self.comps[0]).for_each(|(o, s)| *o *= s);
            }
            return out;
        }
        if other.rows == 1 && other.cols == 1 {
            let mut out = self.clone();
            for comp in out.comps.iter_mut() {
                comp.iter_mut().zip(&other.comps[0]).for_each(|(o, s)| *o *= s);
            }
            return out;
        }
        assert_eq!(self.cols, other.rows, "inner dimensions checked by caller");
        let mut out = FieldGrid::zeros(self.dim, self.n, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let dst = &mut out.comps[i * other.cols + j];
                for m in 0..self.cols {
                    let a = &self.comps[i * self.cols + m];
                    let b = &other.comps[m * other.cols + j];
                    for p in 0..len {
                        dst[p] += a[p] * b[p];
                    }
                }
            }
        }
        out
    }

    /// Trace of a square field, as a 1×1 field.
    pub fn trace(&self) -> FieldGrid {
        let mut out = FieldGrid::zeros(self.dim, self.n, 1, 1);
        for i in 0..self.rows.min(self.cols) {
            let src = &self.comps[i * self.cols + i];
            out.comps[0].iter_mut().zip(src).for_each(|(o, s)| *o += s);
        }
        out
    }

    /// Grid average per component (the zero Fourier mode).
    pub fn mean(&self) -> CMat {
        let len = self.points() as f64;
        CMat::from_fn(self.rows, self.cols, |i, j| pairwise_sum(&self.comps[i * self.cols + j]) / len)
    }

    /// Analysis: Fourier coefficients for modes with `|k|∞ ≤ radius`.
    pub fn coefficients(&self, radius: usize) -> Vec<(Mode, CMat)> {
        let len = self.points() as f64;
        let spectra: Vec<Vec<Complex64>> = self
            .comps
            .iter()
            .map(|c| {
                let mut s = c.clone();
                fftn(&mut s, self.dim, self.n, false);
                s
            })
            .collect();
        box_modes(self.dim, radius as i64)
            .into_iter()
            .map(|k| {
                let idx = grid_index(&k, self.dim, self.n);
                let m = CMat::from_fn(self.rows, self.cols, |i, j| spectra[i * self.cols + j][idx] / len);
                (k, m)
            })
            .collect()
    }
}

/// Flat row-major index of mode `k` on an `n^d` grid (negative modes wrap).
pub(crate) fn grid_index(k: &Mode, dim: usize, n: usize) -> usize {
    let n_i = n as i64;
    k.0[..dim].iter().fold(0usize, |acc, &c| acc * n + c.rem_euclid(n_i) as usize)
}

/// In-place unnormalized n-d DFT; `inverse` uses `e^{+2πi}` (synthesis).
pub(crate) fn fftn(data: &mut [Complex64], dim: usize, n: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let total = n.pow(dim as u32);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        for start in 0..total {
            // first element of each line along `axis`
            if (start / stride) % n != 0 {
                continue;
            }
            for (t, l) in line.iter_mut().enumerate() {
                *l = data[start + t * stride];
            }
            fft.process(&mut line);
            for (t, l) in line.iter().enumerate() {
                data[start + t * stride] = *l;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode::Lattice;

    #[test]
    fn padding_sizes() {
        assert_eq!(fft_size_for(2, 1), 8);
        assert_eq!(fft_size_for(4, 3), 32);
        assert_eq!(fft_size_for(4, 0), 16);
    }

    #[test]
    fn synthesis_then_analysis_roundtrips() {
        let l = Lattice::new(2, 2).unwrap();
        let u = TrigPoly::scalar(
            l,
            vec![(Mode::d2(1, -2), Complex64::new(0.5, 0.25)), (Mode::d2(-2, 0), Complex64::new(-1.0, 0.0))],
        )
        .unwrap();
        let g = FieldGrid::from_poly(&u, 8, false);
        for (k, c) in g.coefficients(2) {
            assert!((c[(0, 0)] - u.coeff_or_zero(&k)[(0, 0)]).norm() < 1e-15);
        }
    }
}
