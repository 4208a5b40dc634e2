use std::collections::BTreeMap;

use reductive_core::algebra::Polynomial;
use reductive_core::jacobi::{EigenStructure, LjrVerdict};
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "reductive-lab/1";

/// A number printed exactly when it is a small rational, otherwise as a float.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Exact(String),
    Float(f64),
}

impl Number {
    pub fn from_f64(x: f64) -> Self {
        match exact_string(x) {
            Some(s) => Number::Exact(s),
            None => Number::Float(x),
        }
    }
}

/// `p/q` with q ≤ 3600 when |x − p/q| ≤ 1e−9; terminating decimals are
/// written out ("1.25"), the rest as fractions ("1/36").
pub fn exact_string(x: f64) -> Option<String> {
    if !x.is_finite() {
        return None;
    }
    for q in 1..=3600i64 {
        let p = (x * q as f64).round();
        if (x - p / q as f64).abs() <= 1e-9 {
            let p = p as i64;
            if q == 1 {
                return Some(p.to_string());
            }
            let mut r = q;
            while r % 2 == 0 {
                r /= 2;
            }
            while r % 5 == 0 {
                r /= 5;
            }
            if r == 1 {
                let mut s = format!("{:.12}", p as f64 / q as f64);
                while s.ends_with('0') {
                    s.pop();
                }
                return Some(s);
            }
            return Some(format!("{p}/{q}"));
        }
    }
    None
}

/// Coefficients from the leading power down to the constant term.
pub fn descending(p: &Polynomial) -> Vec<Number> {
    p.coeffs().iter().rev().map(|&c| Number::from_f64(c)).collect()
}

pub fn poly_string(p: &Polynomial) -> String {
    let mut terms = Vec::new();
    for (k, &c) in p.coeffs().iter().enumerate().rev() {
        let c = if c.abs() < 1e-12 { 0.0 } else { c };
        if c == 0.0 {
            continue;
        }
        let mag = match exact_string(c.abs()) {
            Some(s) => s,
            None => format!("{:.10}", c.abs()),
        };
        let var = match k {
            0 => String::new(),
            1 => "λ".to_string(),
            _ => format!("λ^{k}"),
        };
        let body = match (mag.as_str(), k) {
            ("1", 0) => "1".to_string(),
            ("1", _) => var,
            (_, 0) => mag,
            _ => format!("{mag} {var}"),
        };
        let sign = if c < 0.0 { "-" } else { "+" };
        terms.push((sign, body));
    }
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (sign, body)) in terms.iter().enumerate() {
        match (i, *sign) {
            (0, "-") => out.push_str(&format!("-{body}")),
            (0, _) => out.push_str(body),
            _ => out.push_str(&format!(" {sign} {body}")),
        }
    }
    out
}

/// Non-finite values are not representable in JSON; they become null.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub residual: f64,
    pub coefficient: f64,
    pub gap: f64,
    pub zero: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRow {
    pub kind: String,
    pub k: usize,
    pub l: usize,
    pub max_norm: f64,
    pub vanishes: bool,
    pub t_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub k: usize,
    pub l: usize,
    pub difference_constant: bool,
    pub sum_constant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSummary {
    pub accepted: usize,
    pub discarded: usize,
    pub kernel_dim: usize,
    pub block_dims: Vec<usize>,
    pub mean_lambdas: Vec<f64>,
    pub lambda_constant: Vec<bool>,
    pub pairs: Vec<PairRow>,
    pub components: Vec<ComponentRow>,
}

impl From<&EigenStructure> for EigenSummary {
    fn from(e: &EigenStructure) -> Self {
        EigenSummary {
            accepted: e.accepted,
            discarded: e.discarded,
            kernel_dim: e.kernel_dim,
            block_dims: e.block_dims.clone(),
            mean_lambdas: e.mean_lambdas.clone(),
            lambda_constant: e.lambda_constant.clone(),
            pairs: e
                .pair_constant
                .iter()
                .map(|&(k, l, d, s)| PairRow { k, l, difference_constant: d, sum_constant: s })
                .collect(),
            components: e
                .components
                .iter()
                .map(|c| ComponentRow {
                    kind: c.kind.label().to_string(),
                    k: c.k,
                    l: c.l,
                    max_norm: c.max_norm,
                    vanishes: c.vanishes,
                    t_eigenvalue: c.t_eigenvalue,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub exists: bool,
    pub minimal: bool,
    pub degree: Option<usize>,
    /// Leading coefficient first.
    pub coefficients: Vec<Number>,
    pub polynomial: Option<String>,
    pub residual: Option<f64>,
    pub rbar_agrees: bool,
    pub failed_conditions: Vec<String>,
}

impl From<&LjrVerdict> for Verdict {
    fn from(v: &LjrVerdict) -> Self {
        let poly = v.polynomial.as_ref().filter(|_| v.exists);
        Verdict {
            exists: v.exists,
            minimal: v.minimal,
            degree: poly.and_then(|p| p.degree()),
            coefficients: poly.map(descending).unwrap_or_default(),
            polynomial: poly.map(poly_string),
            residual: finite(v.max_residual),
            rbar_agrees: v.rbar_agrees,
            failed_conditions: v.failed_conditions.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub quantity: String,
    pub expected: Number,
    pub computed: Option<f64>,
    pub deviation: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl Comparison {
    pub fn close(quantity: impl Into<String>, expected: f64, computed: f64, tolerance: f64) -> Self {
        let dev = (expected - computed).abs();
        Comparison {
            quantity: quantity.into(),
            expected: Number::from_f64(expected),
            computed: finite(computed),
            deviation: finite(dev),
            tolerance,
            pass: dev <= tolerance,
        }
    }

    pub fn below(quantity: impl Into<String>, computed: f64, tolerance: f64) -> Self {
        Comparison {
            quantity: quantity.into(),
            expected: Number::Exact(format!("< {tolerance:e}")),
            computed: finite(computed),
            deviation: None,
            tolerance,
            pass: computed < tolerance,
        }
    }

    pub fn flag(quantity: impl Into<String>, expected: bool, computed: bool) -> Self {
        Comparison {
            quantity: quantity.into(),
            expected: Number::Exact(expected.to_string()),
            computed: Some(if computed { 1.0 } else { 0.0 }),
            deviation: None,
            tolerance: 0.0,
            pass: expected == computed,
        }
    }

    pub fn label(quantity: impl Into<String>, expected: &str, computed: &str) -> Self {
        Comparison {
            quantity: format!("{} = {computed}", quantity.into()),
            expected: Number::Exact(expected.to_string()),
            computed: None,
            deviation: None,
            tolerance: 0.0,
            pass: expected == computed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub space: Option<String>,
    pub name: Option<String>,
    pub dimension: Option<usize>,
    pub torsion_class: Option<String>,
    pub eigen_structure: Option<EigenSummary>,
    pub verdict: Option<Verdict>,
    pub comparisons: Vec<Comparison>,
    pub residuals: BTreeMap<String, Option<f64>>,
    pub seed: u64,
    pub samples: usize,
    pub tolerances: Settings,
    pub wall_time_ms: Option<f64>,
    pub pass: bool,
    pub details: serde_json::Value,
}

impl Report {
    pub fn new(command: &str, seed: u64, samples: usize, tolerances: Settings) -> Self {
        Report {
            schema: SCHEMA.into(),
            command: command.into(),
            space: None,
            name: None,
            dimension: None,
            torsion_class: None,
            eigen_structure: None,
            verdict: None,
            comparisons: Vec::new(),
            residuals: BTreeMap::new(),
            seed,
            samples,
            tolerances,
            wall_time_ms: None,
            pass: true,
            details: serde_json::Value::Null,
        }
    }

    pub fn residual(&mut self, key: &str, v: f64) {
        self.residuals.insert(key.into(), finite(v));
    }

    /// Sets `pass` from the comparisons.
    pub fn settle(&mut self) {
        self.pass = self.comparisons.iter().all(|c| c.pass);
    }

    /// Canonical JSON: object keys sorted, one trailing newline.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn comparison_table(&self) -> String {
        let mut out = String::from("| quantity | expected | computed | deviation | pass |\n|---|---|---|---|---|\n");
        for c in &self.comparisons {
            let exp = match &c.expected {
                Number::Exact(s) => s.clone(),
                Number::Float(f) => format!("{f:.10}"),
            };
            let fmt = |x: Option<f64>| x.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} |\n",
                c.quantity,
                exp,
                fmt(c.computed),
                fmt(c.deviation),
                if c.pass { "yes" } else { "NO" }
            ));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(s) = &self.space {
            out.push_str(&format!("space: {s}"));
            if let Some(n) = &self.name {
                out.push_str(&format!(" ({n})"));
            }
            out.push('\n');
        }
        if let Some(d) = self.dimension {
            out.push_str(&format!("dimension: {d}\n"));
        }
        if let Some(t) = &self.torsion_class {
            out.push_str(&format!("torsion: {t}\n"));
        }
        if let Some(v) = &self.verdict {
            match (&v.polynomial, v.exists) {
                (Some(p), true) => out.push_str(&format!("relation: {p}\n")),
                _ => out.push_str("relation: none\n"),
            }
            for f in &v.failed_conditions {
                out.push_str(&format!("  {f}\n"));
            }
        }
        for (k, v) in &self.residuals {
            let s = v.map(|x| format!("{x:.3e}")).unwrap_or_else(|| "-".into());
            out.push_str(&format!("{k}: {s}\n"));
        }
        if !self.details.is_null() {
            out.push_str(&serde_json::to_string_pretty(&self.details).expect("details serialize"));
            out.push('\n');
        }
        if !self.comparisons.is_empty() {
            out.push('\n');
            out.push_str(&self.comparison_table());
        }
        out.push_str(&format!("seed: {}  samples: {}  pass: {}\n", self.seed, self.samples, self.pass));
        out
    }
}
