use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fourier::{contract_pair, CMat, Symbol, SymbolKind, TrigPoly};
use crate::hmeasure::{p_product_limit, LimitSpec};
use crate::mode::Mode;
use crate::sum::pairwise_sum;

/// Smooth bump `∏_a b((x_a − c_a)/r)` with `b(t) = exp(1 − 1/(1 − t²))`
/// on `|t| < 1`, supported inside the open unit cube.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub center: [f64; 3],
    pub radius: f64,
}

impl Bump {
    pub fn centered(radius: f64) -> Self {
        Bump { center: [0.5; 3], radius }
    }

    fn validate(&self, d: usize) -> Result<()> {
        let ok = self.radius > 0.0
            && self.center.iter().take(d).all(|c| c - self.radius >= 0.0 && c + self.radius <= 1.0);
        if !ok {
            return Err(Error::InvalidArgument(format!("bump {self:?} is not supported inside the unit cube")));
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .map(|(x, c)| {
                let t = (x - c) / self.radius;
                if t.abs() < 1.0 {
                    (1.0 - 1.0 / (1.0 - t * t)).exp()
                } else {
                    0.0
                }
            })
            .product()
    }
}

/// Per-factor windows `φᵢ`.
#[derive(Clone, Debug, PartialEq)]
pub enum WindowSpec {
    Shared(Bump),
    PerFactor(Vec<Bump>),
}

impl WindowSpec {
    fn bumps(&self, p: usize) -> Result<Vec<Bump>> {
        match self {
            WindowSpec::Shared(b) => Ok(vec![*b; p]),
            WindowSpec::PerFactor(v) if v.len() == p => Ok(v.clone()),
            WindowSpec::PerFactor(v) => Err(Error::FactorCount(v.len())),
        }
    }
}

/// Finite-`n` estimates of `∫ ∏ A_ψᵢ(φᵢ uᵢ(n·)) dx` against the closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRun {
    pub n_values: Vec<usize>,
    pub window: WindowSpec,
    /// Samples per axis.
    pub grid: usize,
    pub estimates: Vec<CMat>,
    /// `p_product_limit · ∫∏φᵢ`.
    pub closed_form: CMat,
    pub phi_integral: f64,
    /// `‖I_n − closed_form‖_F`.
    pub errors: Vec<f64>,
    /// `errors / max(‖closed_form‖_F, scale)`.
    pub rel_errors: Vec<f64>,
    /// `∫∏φᵢ · ∏ Σ_k ‖ûᵢ,k‖`: magnitude floor for the relative error, so a
    /// vanishing limit does not divide by zero.
    pub scale: f64,
}

/// Real-space quadrature of the p-fold product at each `n`.
///
/// Each factor is sampled as `φᵢ(x) uᵢ(nx)` on a uniform grid of the unit
/// cube, filtered by `ψᵢ(ξ/|ξ|)` through a discrete transform (zero bin set to
/// 0), multiplied pointwise and integrated with the trapezoid rule. The grid
/// must carry at least `8·n·K` samples per axis.
pub fn finite_n_limit(spec: &LimitSpec, window: &WindowSpec, n_values: &[usize], grid: usize) -> Result<QuadratureRun> {
    let factors = spec.factors();
    let p = factors.len();
    let d = factors[0].0.dim();
    let bumps = window.bumps(p)?;
    for b in &bumps {
        b.validate(d)?;
    }
    let k = factors.iter().map(|(u, _)| u.support_radius()).max().unwrap_or(0).max(1);
    let n_max = n_values.iter().copied().max().ok_or_else(|| Error::InvalidArgument("no n values".into()))?;
    if n_values.contains(&0) {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if grid < 8 * n_max * k {
        return Err(Error::GridTooCoarse(format!("{grid} samples per axis < 8·n·K = {}", 8 * n_max * k)));
    }
    let points = grid.pow(d as u32);
    let coords: Vec<Vec<f64>> = (0..points).map(|i| point(i, d, grid)).collect();
    let windows: Vec<Vec<f64>> = bumps.iter().map(|b| coords.iter().map(|x| b.eval(x)).collect()).collect();
    let prod_phi: Vec<Complex64> =
        (0..points).map(|i| Complex64::new(windows.iter().map(|w| w[i]).product(), 0.0)).collect();
    let phi_integral = pairwise_sum(&prod_phi).re / points as f64;
    let closed_form = p_product_limit(spec, Complex64::new(phi_integral, 0.0))?;
    let scale = phi_integral.abs()
        * factors
            .iter()
            .map(|(u, _)| u.iter().map(|(_, c)| c.norm()).sum::<f64>())
            .product::<f64>();

    let mut planner = FftPlanner::new();
    let mut estimates = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let fields = factors
            .iter()
            .zip(&windows)
            .map(|((u, s), w)| {
                let mut f = sample(u, n, w, d, grid);
                filter(&mut f, s, d, grid, &mut planner)?;
                Ok(f)
            })
            .collect::<Result<Vec<_>>>()?;
        let values = (0..points)
            .map(|i| {
                let mut acc: Option<CMat> = None;
                for (f, &t) in fields.iter().zip(&spec.contraction().transpose) {
                    let m = f.at(i);
                    let m = if t { m.transpose() } else { m };
                    acc = Some(match acc {
                        None => m,
                        Some(a) => contract_pair(&a, &m)?,
                    });
                }
                let m = acc.expect("at least two factors");
                Ok(if spec.contraction().trace { CMat::from_element(1, 1, m.trace()) } else { m })
            })
            .collect::<Result<Vec<_>>>()?;
        let (r, c) = values[0].shape();
        let est = CMat::from_fn(r, c, |a, b| {
            let col: Vec<Complex64> = values.iter().map(|v| v[(a, b)]).collect();
            pairwise_sum(&col) / points as f64
        });
        estimates.push(est);
    }
    let errors: Vec<f64> = estimates.iter().map(|e| (e - &closed_form).norm()).collect();
    let denom = closed_form.norm().max(scale).max(f64::MIN_POSITIVE);
    let rel_errors = errors.iter().map(|e| e / denom).collect();
    Ok(QuadratureRun {
        n_values: n_values.to_vec(),
        window: window.clone(),
        grid,
        estimates,
        closed_form,
        phi_integral,
        errors,
        rel_errors,
        scale,
    })
}

fn point(mut i: usize, d: usize, n: usize) -> Vec<f64> {
    let mut x = vec![0.0; d];
    for a in (0..d).rev() {
        x[a] = (i % n) as f64 / n as f64;
        i /= n;
    }
    x
}

/// Component-major samples of a tensor field.
struct Field {
    rows: usize,
    cols: usize,
    comps: Vec<Vec<Complex64>>,
}

impl Field {
    fn at(&self, i: usize) -> CMat {
        CMat::from_fn(self.rows, self.cols, |a, b| self.comps[a * self.cols + b][i])
    }
}

/// `φ(x) u(nx)` by direct summation over the stored modes.
fn sample(u: &TrigPoly, n: usize, window: &[f64], d: usize, grid: usize) -> Field {
    let (rows, cols) = u.coeff_dims();
    let points = window.len();
    let mut comps = vec![vec![Complex64::new(0.0, 0.0); points]; rows * cols];
    for (k, c) in u.iter() {
        // per-axis phase tables e^{2πi n k_a j / grid}
        let tables: Vec<Vec<Complex64>> = (0..d)
            .map(|a| {
                let f = (n as i64 * k.0[a]).rem_euclid(grid as i64) as f64;
                (0..grid).map(|j| Complex64::from_polar(1.0, 2.0 * PI * f * j as f64 / grid as f64)).collect()
            })
            .collect();
        for i in 0..points {
            let mut rem = i;
            let mut ph = Complex64::new(1.0, 0.0);
            for a in (0..d).rev() {
                ph *= tables[a][rem % grid];
                rem /= grid;
            }
            for (ci, comp) in comps.iter_mut().enumerate() {
                comp[i] += c[(ci / cols, ci % cols)] * ph;
            }
        }
    }
    for comp in comps.iter_mut() {
        for (v, w) in comp.iter_mut().zip(window) {
            *v *= w;
        }
    }
    Field { rows, cols, comps }
}

/// Apply `ψ(ξ)` on the discrete frequency grid; the zero bin is set to 0.
fn filter(f: &mut Field, s: &Symbol, d: usize, grid: usize, planner: &mut FftPlanner<f64>) -> Result<()> {
    let points = grid.pow(d as u32);
    for comp in f.comps.iter_mut() {
        fftn(comp, d, grid, false, planner);
    }
    let freq = |j: usize| if j < grid / 2 { j as i64 } else { j as i64 - grid as i64 };
    let scalar = s.kind() == SymbolKind::Scalar || (d == 1 && f.rows == 1);
    let (out_rows, out_cols) = if scalar { (f.rows, f.cols) } else { (s.dim(), f.cols) };
    if !scalar && f.rows != s.dim() {
        return Err(Error::ShapeMismatch(format!("{}x{} symbol on {}x{} field", s.dim(), s.dim(), f.rows, f.cols)));
    }
    let mut out = vec![vec![Complex64::new(0.0, 0.0); points]; out_rows * out_cols];
    for i in 0..points {
        let mut rem = i;
        let mut xi = [0i64; 3];
        for a in (0..d).rev() {
            xi[a] = freq(rem % grid);
            rem /= grid;
        }
        let xi = Mode(xi);
        if xi.is_zero() {
            continue;
        }
        let sv = s.evaluate(&xi);
        for r in 0..out_rows {
            for c in 0..out_cols {
                out[r * out_cols + c][i] = if scalar {
                    sv[(0, 0)] * f.comps[r * f.cols + c][i]
                } else {
                    (0..f.rows).map(|m| sv[(r, m)] * f.comps[m * f.cols + c][i]).sum()
                };
            }
        }
    }
    let norm = 1.0 / points as f64;
    for comp in out.iter_mut() {
        fftn(comp, d, grid, true, planner);
        comp.iter_mut().for_each(|v| *v *= norm);
    }
    *f = Field { rows: out_rows, cols: out_cols, comps: out };
    Ok(())
}

/// Unnormalised d-dimensional transform, one axis at a time.
fn fftn(data: &mut [Complex64], d: usize, n: usize, inverse: bool, planner: &mut FftPlanner<f64>) {
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let outer = data.len() / (n * stride);
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * n * stride + inner;
                for j in 0..n {
                    line[j] = data[base + j * stride];
                }
                fft.process(&mut line);
                for j in 0..n {
                    data[base + j * stride] = line[j];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode::Lattice;

    fn cosine() -> TrigPoly {
        let l = Lattice::new(1, 1).unwrap();
        TrigPoly::scalar(l, [(Mode::d1(1), Complex64::new(1.0, 0.0)), (Mode::d1(-1), Complex64::new(1.0, 0.0))]).unwrap()
    }

    #[test]
    fn power_limits_converge() {
        let u = cosine();
        let w = WindowSpec::Shared(Bump::centered(0.4));
        for (p, expect) in [(2, 2.0), (3, 0.0), (4, 6.0)] {
            let spec = LimitSpec::power(&u, vec![Symbol::one(1); p]).unwrap();
            let run = finite_n_limit(&spec, &w, &[8, 32], 256).unwrap();
            assert!((run.closed_form[(0, 0)].re - expect * run.phi_integral).abs() < 1e-12);
            assert!(run.errors[1] < run.errors[0], "p={p}: {:?}", run.errors);
            assert!(run.rel_errors[1] < 5e-2);
        }
    }

    #[test]
    fn zero_sequence_and_coarse_grid() {
        let l = Lattice::new(1, 1).unwrap();
        let z = TrigPoly::scalar(l, []).unwrap();
        let spec = LimitSpec::power(&z, vec![Symbol::one(1); 2]).unwrap();
        let w = WindowSpec::Shared(Bump::centered(0.4));
        let run = finite_n_limit(&spec, &w, &[4, 8], 64).unwrap();
        assert!(run.estimates.iter().all(|e| e[(0, 0)] == Complex64::new(0.0, 0.0)));
        assert_eq!(finite_n_limit(&spec, &w, &[16], 64).unwrap_err().code(), "grid-too-coarse");
    }
}
