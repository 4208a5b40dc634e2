use std::collections::BTreeMap;
use std::time::Instant;

use reductive_core::algebra::{Mat, Polynomial, Tolerances};
use reductive_core::catalog::{self, CatalogEntry, Expectation};
use reductive_core::jacobi::{
    check_ljr, minimal_ljr, universal_jr, universal_relation_residual, verify_twistor, JacobiFamily, LjrVerdict,
};
use reductive_core::liealg::{BilinearForm, LieAlgebra};
use reductive_core::reductive::{build_triple, scalar_curvature, to_model, InfinitesimalModel};
use reductive_core::sampling;
use reductive_core::vcp::{self, classify_gvcp, fit_vcp_multiple, ThreeForm, GVCP_SAMPLES};
use serde::Deserialize;
use serde_json::json;

use crate::report::{finite, poly_string, Comparison, EigenSummary, Number, Report, Settings, Verdict};

pub const DEFAULT_SAMPLES: usize = 64;
pub const SEED_ENV: &str = "REDUCTIVE_LAB_SEED";
pub const COEFF_TOL: f64 = 1e-7;
pub const TWISTOR_TOL: f64 = 1e-7;
pub const UNIVERSAL_TOL: f64 = 1e-7;

/// Input or validation failure; maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError {
    pub kind: String,
    pub message: String,
}

impl InputError {
    pub fn new(kind: &str, message: impl Into<String>) -> Self {
        InputError { kind: kind.into(), message: message.into() }
    }

    pub fn to_json(&self) -> String {
        json!({"schema": crate::report::SCHEMA, "error": {"kind": self.kind, "message": self.message}}).to_string()
    }
}

impl From<reductive_core::Error> for InputError {
    fn from(e: reductive_core::Error) -> Self {
        let kind = format!("{e:?}");
        let kind = kind.split(['(', ' ', '{']).next().unwrap_or("Error").to_string();
        InputError::new(&kind, e.to_string())
    }
}

type Out = Result<Report, InputError>;

#[derive(Debug, Clone)]
pub struct Options {
    pub tol: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    pub timing: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options { tol: None, samples: DEFAULT_SAMPLES, seed: sampling::DEFAULT_SEED, timing: false }
    }
}

/// Explicit seed, else the environment fallback, else the library default.
pub fn resolve_seed(explicit: Option<u64>) -> Result<u64, InputError> {
    if let Some(s) = explicit {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| InputError::new("Input", format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(sampling::DEFAULT_SEED),
    }
}

impl Options {
    fn validate(&self) -> Result<(), InputError> {
        if self.samples == 0 {
            return Err(InputError::new("Input", "--samples must be positive"));
        }
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(InputError::new("Input", "--tol must be a positive number"));
            }
        }
        Ok(())
    }

    fn residual_tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn report(&self, command: &str, residual: f64) -> Report {
        let t = Tolerances::default();
        Report::new(
            command,
            self.seed,
            self.samples,
            Settings { residual, coefficient: COEFF_TOL, gap: t.gap, zero: t.zero },
        )
    }

    fn family(&self, model: InfinitesimalModel) -> JacobiFamily {
        let mut f = JacobiFamily::with_samples(model, self.samples, self.seed);
        if let Some(t) = self.tol {
            f.tol.residual = t;
        }
        f
    }
}

fn timed(opts: &Options, f: impl FnOnce() -> Out) -> Out {
    let start = Instant::now();
    let mut r = f()?;
    if opts.timing {
        r.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(r)
}

fn describe(r: &mut Report, e: &CatalogEntry) {
    r.space = Some(e.id.clone());
    r.name = Some(e.name.clone());
    r.dimension = Some(e.dim());
}

fn torsion_class(model: &InfinitesimalModel) -> &'static str {
    classify_gvcp(&ThreeForm::from_model(model)).name()
}

/// a2, a4, … → λ(λ^{2m} + a2 λ^{2m−2} + … + a_{2m}).
pub fn relation_from_even_coefficients(a: &[f64]) -> Polynomial {
    let m = a.len();
    let mut c = vec![0.0; 2 * m + 2];
    c[2 * m + 1] = 1.0;
    for (i, &ai) in a.iter().enumerate() {
        c[2 * m + 1 - 2 * (i + 1)] = ai;
    }
    Polynomial::new(c)
}

pub fn parse_poly_list(s: &str) -> Result<Vec<f64>, InputError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|t| catalog::parse_number(t.trim()).map_err(InputError::from)).collect()
}

pub fn catalog_cmd(opts: &Options) -> Out {
    opts.validate()?;
    timed(opts, || {
        let mut r = opts.report("catalog", opts.residual_tol(1e-8));
        let rows: Vec<_> = catalog::registry()
            .iter()
            .map(|e| {
                let expected = match (&e.expected, e.expected_polynomial()) {
                    (Expectation::NoRelation, _) => "none".to_string(),
                    (_, Some(p)) => poly_string(&p),
                    _ => "unspecified".to_string(),
                };
                json!({
                    "id": e.id,
                    "name": e.name,
                    "dimension": e.dim(),
                    "expected_relation": expected,
                    "expected_gvcp": e.expected_gvcp.map(|g| g.name()),
                    "note": e.note,
                })
            })
            .collect();
        r.details = json!({ "entries": rows });
        Ok(r)
    })
}

pub fn verify_cmd(id: &str, poly: &str, opts: &Options) -> Out {
    opts.validate()?;
    let a = parse_poly_list(poly)?;
    let entry = catalog::build(id)?;
    timed(opts, || {
        let tol = opts.residual_tol(1e-8);
        let mut r = opts.report("verify", tol);
        describe(&mut r, &entry);
        let p = relation_from_even_coefficients(&a);
        let res = check_ljr(&opts.family(entry.model.clone()), &p);
        r.residual("relation_residual", res);
        r.comparisons.push(Comparison::below(format!("‖P(𝒯)ℛ₀‖/‖ℛ₀‖ for {}", poly_string(&p)), res, tol));
        r.details = json!({ "polynomial": poly_string(&p) });
        r.settle();
        Ok(r)
    })
}

fn expectation_rows(entry: &CatalogEntry, v: &LjrVerdict, tol: f64) -> Vec<Comparison> {
    let mut rows = Vec::new();
    if let Some(exists) = entry.expected_exists() {
        rows.push(Comparison::flag("relation exists", exists, v.exists));
    }
    if v.exists {
        rows.push(Comparison::below("relation residual", v.max_residual, tol));
    }
    let computed = v.polynomial.as_ref().filter(|_| v.exists);
    if let (Some(exp), Some(got)) = (entry.expected_polynomial(), computed) {
        if exp.degree() != got.degree() {
            rows.push(Comparison::close(
                "degree",
                exp.degree().unwrap_or(0) as f64,
                got.degree().unwrap_or(0) as f64,
                0.0,
            ));
        } else {
            let d = exp.degree().unwrap_or(0);
            for k in (0..d).rev().filter(|k| (d - k) % 2 == 0) {
                rows.push(Comparison::close(format!("a{}", d - k), exp.coeff(k), got.coeff(k), COEFF_TOL));
            }
        }
    }
    if entry.expected == Expectation::BergerNotNearlyParallel {
        let np = 2.0 * entry.scalar_curvature() / 189.0;
        let a2 = computed.map(|p| p.coeff(1)).unwrap_or(f64::NAN);
        let gap = (a2 - np).abs();
        rows.push(Comparison {
            quantity: "distance of a2 from 2·scal/189".into(),
            expected: Number::Exact(format!("> {COEFF_TOL:e}")),
            computed: finite(gap),
            deviation: None,
            tolerance: COEFF_TOL,
            pass: gap > COEFF_TOL,
        });
    }
    if let Some(g) = entry.expected_gvcp {
        rows.push(Comparison::label("torsion class", g.name(), torsion_class(&entry.model)));
    }
    rows
}

pub fn minpoly_cmd(id: &str, opts: &Options) -> Out {
    opts.validate()?;
    let entry = catalog::build(id)?;
    timed(opts, || {
        let tol = opts.residual_tol(1e-8);
        let mut r = opts.report("minpoly", tol);
        describe(&mut r, &entry);
        r.torsion_class = Some(torsion_class(&entry.model).into());
        let v = minimal_ljr(&opts.family(entry.model.clone()))?;
        r.eigen_structure = Some(EigenSummary::from(&v.eigen_structure));
        r.verdict = Some(Verdict::from(&v));
        r.residual("relation_residual", v.max_residual);
        r.comparisons = expectation_rows(&entry, &v, tol);
        r.details = json!({
            "scalar_curvature": finite(entry.scalar_curvature()),
            "c2": entry.c2.and_then(finite),
            "expected": entry.expected_polynomial().map(|p| poly_string(&p)),
        });
        r.settle();
        Ok(r)
    })
}

pub fn gvcp_cmd(id: &str, opts: &Options) -> Out {
    opts.validate()?;
    let entry = catalog::build(id)?;
    timed(opts, || {
        let mut r = opts.report("gvcp", opts.residual_tol(1e-8));
        describe(&mut r, &entry);
        let tau = ThreeForm::from_model(&entry.model);
        let class = classify_gvcp(&tau);
        r.torsion_class = Some(class.name().into());
        if let Some(g) = entry.expected_gvcp {
            r.comparisons.push(Comparison::label("torsion class", g.name(), class.name()));
        }
        r.details = json!({
            "spectrum": vcp::is_gvcp(&tau, GVCP_SAMPLES),
            "vcp_multiple": fit_vcp_multiple(&tau),
            "torsion_norm": tau.norm(),
        });
        r.settle();
        Ok(r)
    })
}

/// `lo:hi:n`, inclusive of both ends.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, InputError> {
    let bad = || InputError::new("Input", format!("grid {s:?} is not lo:hi:n"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo = catalog::parse_number(parts[0])?;
    let hi = catalog::parse_number(parts[1])?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

pub fn appendix_cmd(grid: &str, opts: &Options) -> Out {
    opts.validate()?;
    let grid = parse_grid(grid)?;
    timed(opts, || {
        let tol = opts.residual_tol(1e-10);
        let mut r = opts.report("appendix", tol);
        let mut rows = Vec::new();
        for &s in &grid {
            let checks = vcp::appendix_component_checks(s, opts.samples, opts.seed)?;
            let fit = fit_vcp_multiple(&vcp::residual_torsion_form(s)?).map(|c| c * c);
            rows.push(json!({
                "s": s,
                "vcp_multiple_c2": fit,
                "c2": finite(checks.c2),
                "vcp1": finite(checks.vcp1),
                "vcp2": finite(checks.vcp2),
                "vcp3": finite(checks.vcp3),
                "all_identities_hold": checks.all_pass(tol),
            }));
        }
        r.residual("cayley_hamilton", vcp::cayley_hamilton_residual(opts.samples, opts.seed));
        r.details = json!({ "rows": rows });
        Ok(r)
    })
}

pub fn twistor_cmd(id: &str, d: usize, opts: &Options) -> Out {
    opts.validate()?;
    let entry = catalog::build(id)?;
    timed(opts, || {
        let tol = opts.residual_tol(TWISTOR_TOL);
        let mut r = opts.report("twistor", tol);
        describe(&mut r, &entry);
        let res = verify_twistor(&opts.family(entry.model.clone()), d, opts.samples.min(16))?;
        r.residual("trace_free", res);
        r.comparisons.push(Comparison::below(format!("trace-free part of ℛ_{}", d + 1), res, tol));
        r.details = json!({ "d": d });
        r.settle();
        Ok(r)
    })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Num(f64),
    Str(String),
}

impl Scalar {
    fn value(&self) -> Result<f64, InputError> {
        match self {
            Scalar::Num(x) => Ok(*x),
            Scalar::Str(s) => Ok(catalog::parse_number(s)?),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Multiple of the Killing form.
    Killing(Scalar),
    /// Name of an entry of `forms`.
    Form(String),
}

/// A Lie algebra with an isotropy subalgebra and an invariant form.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSpace {
    pub dim: usize,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    /// `[i, j, k, c]` for [e_i, e_j] = c e_k + ….
    pub brackets: Vec<(usize, usize, usize, Scalar)>,
    #[serde(default)]
    pub forms: BTreeMap<String, Vec<Vec<Scalar>>>,
    /// Rows are vectors spanning h.
    #[serde(default)]
    pub h_basis: Vec<Vec<Scalar>>,
    pub metric: Metric,
    #[serde(default)]
    pub name: Option<String>,
    /// a2, a4, … of an expected relation.
    #[serde(default)]
    pub expected: Option<Vec<Scalar>>,
}

fn square(rows: &[Vec<Scalar>], n: usize, what: &str) -> Result<Mat, InputError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(InputError::new("DimensionMismatch", format!("{what} must be {n}×{n}")));
    }
    let mut m = Mat::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            m[(i, j)] = x.value()?;
        }
    }
    Ok(m)
}

impl CustomSpace {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        serde_json::from_str(text).map_err(|e| InputError::new("Input", e.to_string()))
    }

    pub fn algebra(&self) -> Result<(LieAlgebra, Mat, BilinearForm), InputError> {
        let n = self.dim;
        if n == 0 {
            return Err(InputError::new("Input", "dim must be positive"));
        }
        let labels = self.labels.clone().unwrap_or_else(|| (0..n).map(|i| format!("e{i}")).collect());
        let brackets = self
            .brackets
            .iter()
            .map(|(i, j, k, c)| Ok((*i, *j, *k, c.value()?)))
            .collect::<Result<Vec<_>, InputError>>()?;
        let g = LieAlgebra::from_constants(n, labels, &brackets)?;
        let jac = g.jacobi_residual();
        if jac > 1e-10 {
            return Err(InputError::new("Input", format!("brackets violate the Jacobi identity (residual {jac:e})")));
        }
        let mut h = Mat::zeros(n, self.h_basis.len());
        for (c, v) in self.h_basis.iter().enumerate() {
            if v.len() != n {
                return Err(InputError::new("DimensionMismatch", format!("h_basis vector {c} has length {}", v.len())));
            }
            for (i, x) in v.iter().enumerate() {
                h[(i, c)] = x.value()?;
            }
        }
        let b = match &self.metric {
            Metric::Killing(c) => g.killing_form().scaled(c.value()?, "killing multiple"),
            Metric::Form(name) => {
                let rows = self
                    .forms
                    .get(name)
                    .ok_or_else(|| InputError::new("Input", format!("unknown form {name:?}")))?;
                BilinearForm::new(square(rows, n, name)?, name.clone())
            }
        };
        Ok((g, h, b))
    }
}

pub fn custom_cmd(text: &str, opts: &Options) -> Out {
    opts.validate()?;
    let space = CustomSpace::parse(text)?;
    let (g, h, b) = space.algebra()?;
    let expected = match &space.expected {
        Some(a) => Some(a.iter().map(Scalar::value).collect::<Result<Vec<_>, _>>()?),
        None => None,
    };
    let triple = build_triple(g, h, b)?;
    timed(opts, || {
        let tol = opts.residual_tol(1e-8);
        let mut r = opts.report("custom", tol);
        let model = to_model(&triple);
        r.space = Some("custom".into());
        r.name = space.name.clone();
        r.dimension = Some(model.dim());
        r.torsion_class = Some(torsion_class(&model).into());
        let (sym_tau, sym_rbar) = model.symmetry_defects();
        r.residual("reductivity", triple.reductivity_residual());
        r.residual("torsion_symmetry", sym_tau);
        r.residual("curvature_symmetry", sym_rbar);
        r.residual("holonomy", model.holonomy_residual());
        let family = opts.family(model.clone());
        let v = minimal_ljr(&family)?;
        r.eigen_structure = Some(EigenSummary::from(&v.eigen_structure));
        r.verdict = Some(Verdict::from(&v));
        r.residual("relation_residual", v.max_residual);
        if v.exists {
            r.comparisons.push(Comparison::below("relation residual", v.max_residual, tol));
        }
        if let Some(a) = &expected {
            let p = relation_from_even_coefficients(a);
            let res = check_ljr(&family, &p);
            r.residual("expected_relation", res);
            r.comparisons.push(Comparison::below(format!("expected {}", poly_string(&p)), res, tol));
        }
        let xs = sampling::unit_vectors(model.dim(), 8, opts.seed ^ 0xc0);
        let universal = xs.iter().map(|x| universal_relation_residual(&family, x)).fold(0.0, f64::max);
        r.residual("universal_relation", universal);
        r.comparisons.push(Comparison::below("universal relation", universal, UNIVERSAL_TOL));
        let mut twistor_d = None;
        if let Some(deg) = v.polynomial.as_ref().filter(|_| v.exists).and_then(|p| p.degree()) {
            if (1..=6).contains(&deg) {
                let d = deg - 1;
                let res = verify_twistor(&family, d, opts.samples.min(16))?;
                twistor_d = Some(d);
                r.residual("twistor", res);
                r.comparisons.push(Comparison::below(format!("trace-free part of ℛ_{}", d + 1), res, TWISTOR_TOL));
            }
        }
        let universal_degree = xs.first().and_then(|x| universal_jr(&family, x).degree());
        r.details = json!({
            "scalar_curvature": finite(scalar_curvature(&model)),
            "universal_degree": universal_degree,
            "twistor_d": twistor_d,
        });
        r.settle();
        Ok(r)
    })
}
