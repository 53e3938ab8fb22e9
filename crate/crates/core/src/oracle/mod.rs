//! Independent oracles for the correction formulas and the limit theorem.
//!
//! * [`cell_solve`]: spectral Galerkin solution of the periodic cell problem
//!   `−div(A_γ(∇χ_j + e_j)) = 0`, giving the exact effective tensor at one `γ`.
//! * [`harmonic_mean_1d`]: the closed-form 1-D effective coefficient.
//! * [`gamma_fit`]: Taylor coefficients in `γ` by polynomial least squares.
//! * [`finite_n_limit`]: real-space quadrature of `∫ ∏ A_ψᵢ(φᵢ uᵢ(n·))` at
//!   finite `n`.
//!
//! None of these routes reuse the FFT product or constrained-sum code they
//! are meant to check.

mod cell;
mod fit;
mod harmonic;
mod quadrature;

pub use cell::{cell_solve, cell_solve_with, check_ellipticity, default_k_solver, CellOptions, CellSolution};
pub use fit::{default_gammas, gamma_fit, gamma_fit_harmonic_1d, fit_polynomial, GammaFit, DEFAULT_DEGREE, MAX_CONDITION};
pub use harmonic::{harmonic_mean_1d, harmonic_mean_1d_checked, HarmonicMean};
pub use quadrature::{finite_n_limit, Bump, QuadratureRun, WindowSpec};
