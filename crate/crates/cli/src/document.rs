//! Input documents: coefficient expansions and scalar sequences as JSON trees.

use std::collections::BTreeMap;

use hcorr_core::corrections::{CoefficientExpansion, INPUT_TOL};
use hcorr_core::fourier::{CMat, Shape, Symbol, TrigPoly};
use hcorr_core::{Error as CoreError, Lattice, Mode};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const INPUT_SCHEMA: &str = "hcorr-input/1";
pub const SEQUENCE_SCHEMA: &str = "hcorr-sequence/1";

fn default_true() -> bool {
    true
}

/// One Fourier coefficient of an order `Aᵢ`; `re`/`im` are row-major `d×d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixEntry {
    pub k: Vec<i64>,
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub im: Vec<f64>,
}

/// `A_γ = A₀ + γA₁ + γ²A₂ + γ³A₃`.
///
/// With `hermitian_complete` set (the default) only one of each `±k` pair
/// needs to be listed; the conjugate partner is generated on load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    #[serde(default)]
    pub schema: Option<String>,
    pub dimension: usize,
    /// Row-major `d×d`.
    pub a0: Vec<f64>,
    /// Keys "1", "2", "3".
    #[serde(default)]
    pub orders: BTreeMap<String, Vec<MatrixEntry>>,
    /// Lattice box radius; defaults to the largest `|k|∞` present (at least 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(default = "default_true")]
    pub hermitian_complete: bool,
    #[serde(default = "default_true")]
    pub symmetric_required: bool,
}

fn mode_of(k: &[i64], d: usize) -> Result<Mode, CliError> {
    if k.len() != d {
        return Err(CoreError::DimensionMismatch { expected: d, found: k.len() }.into());
    }
    Ok(Mode::new(k)?)
}

fn truncation_of(explicit: Option<usize>, ks: impl Iterator<Item = Mode>) -> usize {
    let needed = ks.map(|k| k.max_norm() as usize).max().unwrap_or(0).max(1);
    explicit.unwrap_or(needed)
}

fn matrix(re: &[f64], im: &[f64], d: usize, what: &str) -> Result<CMat, CliError> {
    if re.len() != d * d || !(im.is_empty() || im.len() == d * d) {
        return Err(CliError::Parse(format!("{what}: expected {} row-major entries", d * d)));
    }
    Ok(CMat::from_fn(d, d, |i, j| Complex64::new(re[i * d + j], im.get(i * d + j).copied().unwrap_or(0.0))))
}

/// Adds `conj(c_k)` at `−k` for every listed `k` whose partner is absent.
/// Listing both with inconsistent values is an error.
fn complete<T: Clone>(
    entries: Vec<(Mode, T)>,
    conj: impl Fn(&T) -> T,
    close: impl Fn(&T, &T) -> bool,
) -> Result<Vec<(Mode, T)>, CliError> {
    let mut map: BTreeMap<Mode, T> = BTreeMap::new();
    for (k, v) in &entries {
        if map.insert(*k, v.clone()).is_some() {
            return Err(CoreError::DuplicateMode(k.to_string()).into());
        }
    }
    let mut out = entries.clone();
    for (k, v) in &entries {
        let partner = -*k;
        match map.get(&partner) {
            Some(p) if k.is_zero() || close(p, &conj(v)) => {}
            Some(_) => return Err(CoreError::NotHermitian(k.to_string()).into()),
            None => {
                map.insert(partner, conj(v));
                out.push((partner, conj(v)));
            }
        }
    }
    Ok(out)
}

impl InputDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: InputDocument = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        if let Some(s) = &doc.schema {
            if s != INPUT_SCHEMA {
                return Err(CliError::Parse(format!("unknown schema {s:?} (expected {INPUT_SCHEMA:?})")));
            }
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn load(&self) -> Result<CoefficientExpansion, CliError> {
        let d = self.dimension;
        Lattice::new(d, 1)?;
        if self.a0.len() != d * d {
            return Err(CliError::Parse(format!("a0: expected {} row-major entries", d * d)));
        }
        let a0 = DMatrix::from_row_slice(d, d, &self.a0);
        let mut parsed = Vec::new();
        for (key, entries) in &self.orders {
            let i: usize = key.parse().map_err(|_| CliError::Parse(format!("order key {key:?} is not 1, 2 or 3")))?;
            let mut list = Vec::with_capacity(entries.len());
            for e in entries {
                list.push((mode_of(&e.k, d)?, matrix(&e.re, &e.im, d, &format!("order {key}, k = {:?}", e.k))?));
            }
            let list = if self.hermitian_complete {
                complete(list, |m| m.map(|z| z.conj()), |a, b| (a - b).norm() <= INPUT_TOL * a.norm().max(1.0))?
            } else {
                list
            };
            parsed.push((i, list));
        }
        let trunc = truncation_of(self.truncation, parsed.iter().flat_map(|(_, l)| l.iter().map(|(k, _)| *k)));
        let lattice = Lattice::new(d, trunc)?;
        let orders = parsed
            .into_iter()
            .map(|(i, list)| Ok((i, TrigPoly::from_coeffs(lattice, Shape::Matrix, list)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(CoefficientExpansion::new_with(a0, orders, self.symmetric_required)?)
    }

    /// Full-lattice document (no completion needed) that reloads bit-equal.
    pub fn from_expansion(c: &CoefficientExpansion) -> Self {
        let d = c.dim();
        let mut orders = BTreeMap::new();
        for i in 1..=3 {
            let p = c.order(i);
            if p.is_empty() {
                continue;
            }
            let entries = p
                .iter()
                .map(|(k, m)| MatrixEntry {
                    k: k.components(d).to_vec(),
                    re: row_major(m, |z| z.re),
                    im: if m.iter().all(|z| z.im == 0.0) { vec![] } else { row_major(m, |z| z.im) },
                })
                .collect();
            orders.insert(i.to_string(), entries);
        }
        InputDocument {
            schema: Some(INPUT_SCHEMA.into()),
            dimension: d,
            a0: (0..d * d).map(|n| c.a0()[(n / d, n % d)]).collect(),
            orders,
            truncation: Some(c.trunc()),
            hermitian_complete: false,
            symmetric_required: true,
        }
    }
}

fn row_major(m: &CMat, f: impl Fn(&Complex64) -> f64) -> Vec<f64> {
    let (r, c) = m.shape();
    (0..r * c).map(|n| f(&m[(n / c, n % c)])).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarEntry {
    pub k: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Built-in symbol vocabulary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SymbolSpec {
    /// `ψ ≡ value`.
    Constant { value: f64 },
    /// `a·ξ ξ·b / (A₀ξ·ξ)` with `A₀` row-major.
    Psi0 { a0: Vec<f64>, left: Vec<f64>, right: Vec<f64> },
    /// `Σ cᵢ ξ^αᵢ / Σ dⱼ ξ^βⱼ` in `ξ/|ξ|`; empty denominator means 1.
    Rational {
        numerator: Vec<Monomial>,
        #[serde(default)]
        denominator: Vec<Monomial>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub coeff: f64,
}

impl SymbolSpec {
    pub fn build(&self, d: usize) -> Result<Symbol, CliError> {
        let mono = |m: &[Monomial]| m.iter().map(|t| (t.exponents.clone(), t.coeff)).collect::<Vec<_>>();
        Ok(match self {
            SymbolSpec::Constant { value } => Symbol::constant(d, Complex64::new(*value, 0.0)),
            SymbolSpec::Psi0 { a0, left, right } => {
                if a0.len() != d * d {
                    return Err(CliError::UnsupportedSymbol(format!("psi0: a0 needs {} entries", d * d)));
                }
                Symbol::oscillation_contracted(&DMatrix::from_row_slice(d, d, a0), left, right)
                    .map_err(|e| CliError::UnsupportedSymbol(format!("psi0: {e}")))?
            }
            SymbolSpec::Rational { numerator, denominator } => {
                Symbol::rational(d, mono(numerator), mono(denominator))
                    .map_err(|e| CliError::UnsupportedSymbol(format!("rational: {e}")))?
            }
        })
    }
}

/// A real scalar sequence `u` with the symbols of a product limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceDocument {
    #[serde(default)]
    pub schema: Option<String>,
    pub dimension: usize,
    pub coefficients: Vec<ScalarEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(default = "default_true")]
    pub hermitian_complete: bool,
    /// One symbol for every factor, or `p` symbols; defaults to `ψ ≡ 1`.
    /// Kept as raw JSON so an unknown kind is reported as an unsupported
    /// symbol rather than a parse error.
    #[serde(default)]
    pub symbols: Vec<serde_json::Value>,
}

impl SequenceDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: SequenceDocument = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        if let Some(s) = &doc.schema {
            if s != SEQUENCE_SCHEMA {
                return Err(CliError::Parse(format!("unknown schema {s:?} (expected {SEQUENCE_SCHEMA:?})")));
            }
        }
        Ok(doc)
    }

    pub fn load(&self) -> Result<TrigPoly, CliError> {
        let d = self.dimension;
        Lattice::new(d, 1)?;
        let mut list = Vec::with_capacity(self.coefficients.len());
        for e in &self.coefficients {
            list.push((mode_of(&e.k, d)?, Complex64::new(e.re, e.im)));
        }
        let list = if self.hermitian_complete {
            complete(list, |z| z.conj(), |a, b| (a - b).norm() <= INPUT_TOL * a.norm().max(1.0))?
        } else {
            list
        };
        let lattice = Lattice::new(d, truncation_of(self.truncation, list.iter().map(|(k, _)| *k)))?;
        Ok(TrigPoly::scalar(lattice, list)?.mark_zero_mean()?)
    }

    /// `p` symbols for the product; `p` defaults to the number of symbols
    /// listed (2 when none are).
    pub fn symbols(&self, p: Option<usize>) -> Result<Vec<Symbol>, CliError> {
        let specs = self
            .symbols
            .iter()
            .map(|v| serde_json::from_value::<SymbolSpec>(v.clone()).map_err(|e| CliError::UnsupportedSymbol(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let p = p.unwrap_or(if specs.len() > 1 { specs.len() } else { 2 });
        let d = self.dimension;
        match specs.len() {
            0 => Ok(vec![Symbol::one(d); p]),
            1 => Ok(vec![specs[0].build(d)?; p]),
            n if n == p => specs.iter().map(|s| s.build(d)).collect(),
            n => Err(CliError::Parse(format!("{n} symbols listed for p = {p}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn completion_adds_partners_and_rejects_mismatch() {
        let doc = r#"{"dimension": 1, "a0": [2.0], "orders": {"1": [{"k": [2], "re": [0.5], "im": [0.25]}]}}"#;
        let c = InputDocument::parse(doc).unwrap().load().unwrap();
        let p = c.order(1);
        assert_eq!(p.coeff(&Mode::d1(-2)).unwrap()[(0, 0)], Complex64::new(0.5, -0.25));
        assert_eq!(p.trunc(), 2);
        let bad = r#"{"dimension": 1, "a0": [2.0], "orders": {"1": [{"k": [1], "re": [0.5]}, {"k": [-1], "re": [0.4]}]}}"#;
        let err = InputDocument::parse(bad).unwrap().load().unwrap_err();
        assert_eq!(err.code(), "not-hermitian");
    }

    #[test]
    fn validation_errors_carry_invariant_names() {
        let cases = [
            (r#"{"dimension": 1, "a0": [-1.0]}"#, "a0-not-spd"),
            (r#"{"dimension": 4, "a0": [1.0]}"#, "unsupported-dimension"),
            (r#"{"dimension": 1, "a0": [1.0], "orders": {"1": [{"k": [0], "re": [0.1]}]}}"#, "nonzero-mean"),
            (r#"{"dimension": 1, "a0": [1.0], "orders": {"4": []}}"#, "invalid-argument"),
            (r#"{"dimension": 1, "a0": [1.0], "orders": {"x": []}}"#, "parse-error"),
            (r#"{"dimension": 1, "a0": [1.0], "orders": {"1": [{"k": [1, 0], "re": [0.1]}]}}"#, "dimension-mismatch"),
            (
                r#"{"dimension": 2, "a0": [1.0, 0.0, 0.0, 1.0], "orders": {"1": [{"k": [1, 0], "re": [0.0, 0.1, 0.0, 0.0]}]}}"#,
                "not-symmetric",
            ),
            (r#"{"dimension": 1, "a0": [1.0], "extra": 1}"#, "parse-error"),
        ];
        for (doc, code) in cases {
            let err = InputDocument::parse(doc).and_then(|d| d.load()).unwrap_err();
            assert_eq!(err.code(), code, "{doc}");
        }
        let relaxed = r#"{"dimension": 2, "a0": [1.0, 0.0, 0.0, 1.0], "symmetric_required": false,
            "orders": {"1": [{"k": [1, 0], "re": [0.0, 0.1, 0.0, 0.0]}]}}"#;
        assert!(InputDocument::parse(relaxed).unwrap().load().is_ok());
    }

    #[test]
    fn sequence_symbols() {
        let doc = SequenceDocument::parse(
            r#"{"dimension": 2, "coefficients": [{"k": [1, 0], "re": 1.0}],
                "symbols": [{"kind": "psi0", "a0": [1, 0, 0, 1], "left": [1, 0], "right": [1, 0]},
                            {"kind": "rational", "numerator": [{"exponents": [0, 2], "coeff": 1.0}]}]}"#,
        )
        .unwrap();
        assert_eq!(doc.symbols(None).unwrap().len(), 2);
        assert_eq!(doc.symbols(Some(3)).unwrap_err().code(), "parse-error");
        let u = doc.load().unwrap();
        assert_eq!(u.len(), 2);
    }
}
