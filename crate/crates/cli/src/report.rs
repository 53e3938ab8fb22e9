//! Report documents. Everything except `timings` is a deterministic function
//! of the input bytes and the command-line flags.

use std::collections::BTreeMap;

use hcorr_core::fourier::CMat;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

pub const REPORT_SCHEMA: &str = "hcorr-report/1";

#[derive(Clone, Debug, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for Tool {
    fn default() -> Self {
        Tool { name: "hcorr", version: env!("CARGO_PKG_VERSION") }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InputEcho {
    pub sha256: String,
    pub dimension: usize,
    pub truncation: usize,
    pub support_radius: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Complex {
    fn from(z: Complex64) -> Self {
        Complex { re: z.re, im: z.im }
    }
}

/// Rows of a real matrix.
pub type Rows = Vec<Vec<f64>>;

pub fn rows(m: &DMatrix<f64>) -> Rows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

pub fn complex_rows(m: &CMat) -> Vec<Vec<Complex>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrectionEntry {
    pub real: Rows,
    pub max_abs_imag: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheckEntry {
    pub quantity: String,
    pub abs_delta: f64,
    pub rel_delta: f64,
    pub sampled: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleEntry {
    pub method: &'static str,
    pub gammas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_solver: Option<usize>,
    pub degree: usize,
    pub condition: f64,
    pub fit_residual: f64,
    pub max_cell_residual: f64,
    /// `C0 … C{degree−1}`.
    pub coefficients: BTreeMap<String, Rows>,
    pub sentinel: Rows,
    /// `A1`: `‖C1‖`; `A2…A4`: relative Frobenius distance to the formula.
    pub deltas: BTreeMap<String, f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadratureEntry {
    pub n_values: Vec<usize>,
    pub grid: usize,
    pub window: Window,
    pub phi_integral: f64,
    pub closed_form: Complex,
    pub estimates: Vec<Complex>,
    pub errors: Vec<f64>,
    pub rel_errors: Vec<f64>,
    pub error_decreasing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Window {
    pub kind: &'static str,
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Verification {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub paths: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cross_checks: Vec<CrossCheckEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub oracles: Vec<OracleEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureEntry>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitEntry {
    pub p: usize,
    pub symbols: Vec<String>,
    pub value: Complex,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub tool: Tool,
    pub command: &'static str,
    pub input: InputEcho,
    pub parameters: BTreeMap<String, serde_json::Value>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub corrections: BTreeMap<String, CorrectionEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<LimitEntry>,
    pub verification: Verification,
    /// Wall-clock seconds; excluded from the determinism contract.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
