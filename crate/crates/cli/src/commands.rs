use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use hcorr_core::corrections::{correction_report_with, CoefficientExpansion, CrossCheckMode, ReportOptions};
use hcorr_core::fourier::CMat;
use hcorr_core::hmeasure::{p_product_limit, LimitSpec};
use hcorr_core::oracle::{
    default_gammas, default_k_solver, finite_n_limit, gamma_fit, gamma_fit_harmonic_1d, Bump, GammaFit, WindowSpec,
    DEFAULT_DEGREE,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::document::{InputDocument, SequenceDocument};
use crate::error::{exit, CliError};
use crate::report::*;

/// Worst accepted relative delta between the FFT and brute-force routes.
pub const CROSS_CHECK_TOL: f64 = 1e-10;
/// Worst accepted relative delta between oracle fits and the formulas.
pub const ORACLE_TOL: f64 = 1e-3;
/// `‖C₁‖ / ‖A₀‖` accepted by the oracle fits.
pub const C1_TOL: f64 = 1e-6;
/// Default finite-n window.
pub const WINDOW: Bump = Bump { center: [0.5; 3], radius: 0.4 };

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Cell,
    Harmonic1d,
    Both,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Cell => "cell",
            Method::Harmonic1d => "harmonic1d",
            Method::Both => "both",
        }
    }
}

/// A report and the exit status it implies.
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
}

fn read(path: &Path) -> Result<(String, String), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|e| CliError::Parse(e.to_string()))?;
    Ok((text, digest))
}

fn echo(c: &CoefficientExpansion, sha256: String) -> InputEcho {
    InputEcho { sha256, dimension: c.dim(), truncation: c.trunc(), support_radius: c.support_radius() }
}

fn base_report(command: &'static str, input: InputEcho) -> Report {
    Report {
        schema: REPORT_SCHEMA,
        tool: Tool::default(),
        command,
        input,
        parameters: BTreeMap::new(),
        corrections: BTreeMap::new(),
        limit: None,
        verification: Verification::default(),
        timings: BTreeMap::new(),
    }
}

fn parse_orders(orders: &[u8]) -> Result<Vec<u8>, CliError> {
    let mut o = orders.to_vec();
    o.sort_unstable();
    o.dedup();
    if o.is_empty() || o.iter().any(|x| !(2..=4).contains(x)) {
        return Err(CliError::Parse(format!("--orders {orders:?}: choose from 2, 3, 4")));
    }
    Ok(o)
}

pub fn load_expansion(path: &Path) -> Result<(CoefficientExpansion, String), CliError> {
    let (text, digest) = read(path)?;
    Ok((InputDocument::parse(&text)?.load()?, digest))
}

/// Corrections `A1..A4` of the requested orders with cross-path checks.
pub fn compute(input: &Path, orders: &[u8], seed: u64) -> Result<Outcome, CliError> {
    let (c, digest) = load_expansion(input)?;
    let orders = parse_orders(orders)?;
    let opts = ReportOptions { orders: orders.clone(), cross_check: CrossCheckMode::Auto, seed, ..ReportOptions::default() };
    let rep = correction_report_with(&c, &opts)?;
    let mut report = base_report("compute", echo(&c, digest));
    report.parameters.insert("orders".into(), json!(orders));
    report.parameters.insert("seed".into(), json!(seed));
    for (o, corr) in &rep.corrections {
        report
            .corrections
            .insert(format!("A{o}"), CorrectionEntry { real: rows(&corr.real), max_abs_imag: corr.max_abs_imag });
    }
    let worst = rep.worst_cross_check();
    report.verification = Verification {
        paths: rep.paths.clone(),
        cross_checks: rep
            .cross_checks
            .iter()
            .map(|x| CrossCheckEntry {
                quantity: x.quantity.clone(),
                abs_delta: x.abs_delta,
                rel_delta: x.rel_delta,
                sampled: x.sampled,
            })
            .collect(),
        cross_check_tolerance: Some(CROSS_CHECK_TOL),
        passed: worst <= CROSS_CHECK_TOL,
        ..Verification::default()
    };
    report.timings = rep.timings.iter().cloned().collect();
    let exit_code = if report.verification.passed { exit::OK } else { exit::CROSS_CHECK };
    Ok(Outcome { report, exit_code })
}

/// Distance of a fit to the formula values, per order.
fn deltas(c: &CoefficientExpansion, fit: &GammaFit, formulas: &BTreeMap<u8, DMatrix<f64>>) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    let a0 = c.a0().norm();
    out.insert("A1".into(), fit.coefficients[1].norm() / a0);
    let rho = c.amplitude();
    for (&o, a) in formulas {
        let Some(ci) = fit.coefficient(o as usize) else { continue };
        // a vanishing correction is compared against its natural size
        let floor = 0.01 * a0 * rho.powi(o as i32);
        out.insert(format!("A{o}"), (ci - a).norm() / a.norm().max(floor).max(f64::MIN_POSITIVE));
    }
    out
}

fn oracle_entry(
    method: &'static str,
    c: &CoefficientExpansion,
    fit: &GammaFit,
    k_solver: Option<usize>,
    formulas: &BTreeMap<u8, DMatrix<f64>>,
) -> OracleEntry {
    let deltas = deltas(c, fit, formulas);
    let passed = deltas.iter().all(|(k, v)| if k == "A1" { *v <= C1_TOL } else { *v <= ORACLE_TOL });
    OracleEntry {
        method,
        gammas: fit.gammas.clone(),
        k_solver,
        degree: fit.degree,
        condition: fit.condition,
        fit_residual: fit.fit_residual,
        max_cell_residual: fit.max_cell_residual,
        coefficients: fit.coefficients.iter().enumerate().map(|(i, m)| (format!("C{i}"), rows(m))).collect(),
        sentinel: rows(&fit.sentinel),
        deltas,
        passed,
    }
}

/// Oracle fits side by side with the formula values.
pub fn verify(input: &Path, method: Option<Method>, gammas: Option<Vec<f64>>, k_solver: Option<usize>) -> Result<Outcome, CliError> {
    let (c, digest) = load_expansion(input)?;
    let method = method.unwrap_or(if c.dim() == 1 { Method::Both } else { Method::Cell });
    if method != Method::Cell && c.dim() != 1 {
        return Err(CliError::Parse(format!("--method {} needs a one-dimensional input", method.name())));
    }
    let gammas = gammas.unwrap_or_else(|| default_gammas(&c));
    let k_solver = k_solver.unwrap_or_else(|| default_k_solver(&c));
    let opts = ReportOptions { cross_check: CrossCheckMode::Off, ..ReportOptions::default() };
    let rep = correction_report_with(&c, &opts)?;
    let mut report = base_report("verify", echo(&c, digest));
    report.parameters.insert("method".into(), json!(method.name()));
    report.parameters.insert("gammas".into(), json!(gammas));
    report.parameters.insert("k_solver".into(), json!(k_solver));
    report.parameters.insert("degree".into(), json!(DEFAULT_DEGREE));
    let mut formulas = BTreeMap::new();
    for (o, corr) in &rep.corrections {
        report
            .corrections
            .insert(format!("A{o}"), CorrectionEntry { real: rows(&corr.real), max_abs_imag: corr.max_abs_imag });
        if *o >= 2 {
            formulas.insert(*o, corr.real.clone());
        }
    }
    report.timings = rep.timings.iter().cloned().collect();
    let mut oracles = Vec::new();
    if matches!(method, Method::Cell | Method::Both) {
        let t = Instant::now();
        let fit = gamma_fit(&c, &gammas, k_solver, DEFAULT_DEGREE)?;
        report.timings.insert("oracle:cell".into(), t.elapsed().as_secs_f64());
        oracles.push(oracle_entry("cell", &c, &fit, Some(k_solver), &formulas));
    }
    if matches!(method, Method::Harmonic1d | Method::Both) {
        let t = Instant::now();
        let fit = gamma_fit_harmonic_1d(&c, &gammas, DEFAULT_DEGREE)?;
        report.timings.insert("oracle:harmonic1d".into(), t.elapsed().as_secs_f64());
        oracles.push(oracle_entry("harmonic1d", &c, &fit, None, &formulas));
    }
    let passed = oracles.iter().all(|o| o.passed);
    report.verification = Verification { oracles, oracle_tolerance: Some(ORACLE_TOL), passed, ..Verification::default() };
    Ok(Outcome { report, exit_code: if passed { exit::OK } else { exit::CROSS_CHECK } })
}

/// Closed-form p-fold product limit, optionally with the finite-n table.
pub fn limit(input: &Path, p: Option<usize>, check_n: &[usize]) -> Result<Outcome, CliError> {
    let (text, digest) = read(input)?;
    let doc = SequenceDocument::parse(&text)?;
    let u = doc.load()?;
    let symbols = doc.symbols(p)?;
    let labels: Vec<String> = symbols.iter().map(|s| s.label().to_string()).collect();
    let spec = LimitSpec::power(&u, symbols)?;
    let t = Instant::now();
    let value = p_product_limit(&spec, Complex64::new(1.0, 0.0))?;
    let mut report = base_report(
        "limit",
        InputEcho { sha256: digest, dimension: u.dim(), truncation: u.trunc(), support_radius: u.support_radius() },
    );
    report.timings.insert("limit".into(), t.elapsed().as_secs_f64());
    report.parameters.insert("p".into(), json!(spec.p()));
    report.parameters.insert("check_n".into(), json!(check_n));
    report.limit = Some(LimitEntry { p: spec.p(), symbols: labels, value: scalar(&value).into() });
    let mut passed = true;
    if !check_n.is_empty() {
        let t = Instant::now();
        let k = u.support_radius().max(1);
        let n_max = check_n.iter().copied().max().unwrap_or(1);
        let grid = (8 * n_max * k).next_power_of_two();
        let run = finite_n_limit(&spec, &WindowSpec::Shared(WINDOW), check_n, grid)?;
        report.timings.insert("quadrature".into(), t.elapsed().as_secs_f64());
        let error_decreasing = run.errors.windows(2).all(|w| w[1] < w[0]);
        passed = error_decreasing;
        report.verification.quadrature = Some(QuadratureEntry {
            n_values: run.n_values.clone(),
            grid: run.grid,
            window: Window { kind: "bump", center: WINDOW.center[..u.dim()].to_vec(), radius: WINDOW.radius },
            phi_integral: run.phi_integral,
            closed_form: scalar(&run.closed_form).into(),
            estimates: run.estimates.iter().map(|e| scalar(e).into()).collect(),
            errors: run.errors.clone(),
            rel_errors: run.rel_errors.clone(),
            error_decreasing,
        });
    }
    report.verification.passed = passed;
    Ok(Outcome { report, exit_code: if passed { exit::OK } else { exit::CROSS_CHECK } })
}

fn scalar(m: &CMat) -> Complex64 {
    m[(0, 0)]
}
