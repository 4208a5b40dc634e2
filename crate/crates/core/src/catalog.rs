//! Named example spaces and models, addressable by identifiers such as
//! `berger:n=2,s=1`, `nk:flag,b=-1/6` or `np:v3,scal=21/8`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::algebra::{Mat, Polynomial, Vector};
use crate::error::{Error, Result};
use crate::liealg::{
    block_diag, matrix_direct_sum, so, sp, su, su_indefinite, u, AltForm, CMat, LieAlgebra, MatrixAlgebra,
};
use crate::reductive::{
    build_triple, build_triple_with_m, extend_fibered, extend_fibered_general, scalar_curvature, sectional_curvature,
    to_model, FiberedExtension, InfinitesimalModel, ReductiveTriple,
};
use crate::sampling;
use crate::vcp::{g2_sigma, GvcpType};

/// What the minimal linear Jacobi relation of an entry should be.
#[derive(Debug, Clone, PartialEq)]
pub enum Expectation {
    /// A fixed polynomial (ascending coefficients in λ).
    Polynomial(Polynomial),
    /// λ(λ² + c²) with c² the constant eigenvalue of −τ_u² on the horizontal block.
    Berger,
    /// λ(λ² + 2·scal/189).
    NearlyParallel,
    /// A relation of Berger type exists but differs from λ(λ² + 2·scal/189).
    BergerNotNearlyParallel,
    /// No linear Jacobi relation exists.
    NoRelation,
    Unspecified,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: String,
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub triple: Option<ReductiveTriple>,
    pub model: InfinitesimalModel,
    pub expected: Expectation,
    pub expected_gvcp: Option<GvcpType>,
    pub note: String,
    /// c² for Berger and Heisenberg entries.
    pub c2: Option<f64>,
}

impl CatalogEntry {
    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn scalar_curvature(&self) -> f64 {
        scalar_curvature(&self.model)
    }

    /// The expected polynomial, resolved against the model where it depends on it.
    pub fn expected_polynomial(&self) -> Option<Polynomial> {
        match &self.expected {
            Expectation::Polynomial(p) => Some(p.clone()),
            Expectation::Berger | Expectation::BergerNotNearlyParallel => {
                self.c2.map(|c2| Polynomial::monomial(1).mul(&Polynomial::quadratic(c2)))
            }
            Expectation::NearlyParallel => {
                let mu = 2.0 * self.scalar_curvature() / 189.0;
                Some(Polynomial::monomial(1).mul(&Polynomial::quadratic(mu)))
            }
            Expectation::NoRelation | Expectation::Unspecified => None,
        }
    }

    pub fn expected_exists(&self) -> Option<bool> {
        match self.expected {
            Expectation::NoRelation => Some(false),
            Expectation::Unspecified => None,
            _ => Some(true),
        }
    }
}

/// Identifiers of the registered entries.
pub const REGISTRY: &[&str] = &[
    "group:su2",
    "sym:s2",
    "sym:cp2",
    "berger:n=1,s=0",
    "berger:n=1,s=1",
    "berger:n=2,s=1",
    "berger:n=2,s=-1/4",
    "berger:n=3,s=1",
    "berger:n=2,s=-3,kappa=-1",
    "heisenberg:n=1,c=1",
    "heisenberg:n=2,c=1",
    "heisenberg:n=3,c=2",
    "nk:flag",
    "nk:flag,b=-1/6",
    "nk:cp3",
    "nk:s3xs3",
    "nk:s6",
    "np:spin7",
    "np:squashed-s7",
    "np:v1",
    "np:v3",
    "neg:su4-su3",
    "neg:sp2-sp1",
    "aw:n11,s=1.5",
    "aw:n11,s=0.5",
    "wilking:s=1",
    "qhopf:n=1,s=1",
];

pub fn registry() -> Vec<CatalogEntry> {
    REGISTRY.iter().map(|id| build(id).expect("registered entry builds")).collect()
}

/// A parsed identifier: family, optional variant and numeric parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryId {
    pub family: String,
    pub variant: Option<String>,
    pub params: BTreeMap<String, f64>,
}

/// Accepts decimals and fractions such as `-1/6`.
pub fn parse_number(s: &str) -> Result<f64> {
    let bad = || Error::Input(format!("not a number: {s:?}"));
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let num: f64 = a.trim().parse().map_err(|_| bad())?;
            let den: f64 = b.trim().parse().map_err(|_| bad())?;
            if den == 0.0 {
                return Err(bad());
            }
            num / den
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

pub fn parse_id(id: &str) -> Result<EntryId> {
    let (family, rest) = id.split_once(':').unwrap_or((id, ""));
    if family.is_empty() {
        return Err(Error::Input(format!("empty family in {id:?}")));
    }
    let mut variant = None;
    let mut params = BTreeMap::new();
    for tok in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match tok.split_once('=') {
            Some((k, v)) => {
                if params.insert(k.trim().to_string(), parse_number(v)?).is_some() {
                    return Err(Error::Input(format!("duplicate parameter {k:?}")));
                }
            }
            None if variant.is_none() => variant = Some(tok.to_string()),
            None => return Err(Error::Input(format!("unexpected token {tok:?} in {id:?}"))),
        }
    }
    Ok(EntryId { family: family.to_string(), variant, params })
}

fn param(p: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    p.get(key).copied().unwrap_or(default)
}

fn int_param(p: &BTreeMap<String, f64>, key: &str, default: usize) -> Result<usize> {
    let v = param(p, key, default as f64);
    if v < 1.0 || v.fract() != 0.0 {
        return Err(Error::Input(format!("{key} must be a positive integer, got {v}")));
    }
    Ok(v as usize)
}

fn check_params(p: &BTreeMap<String, f64>, allowed: &[&str]) -> Result<()> {
    for k in p.keys() {
        if k != "scal" && !allowed.contains(&k.as_str()) {
            return Err(Error::Input(format!("unknown parameter {k:?}")));
        }
    }
    Ok(())
}

fn variant<'a>(e: &'a EntryId, allowed: &[&str]) -> Result<&'a str> {
    match e.variant.as_deref() {
        Some(v) if allowed.contains(&v) => Ok(v),
        other => Err(Error::Input(format!("unknown {} variant {:?}; expected one of {:?}", e.family, other, allowed))),
    }
}

/// Multiply each a_{2k} by t^{-k}: the relation after scaling the metric by t.
pub fn rescale_relation(p: &Polynomial, t: f64) -> Polynomial {
    let c = p.coeffs();
    let d = c.len() - 1;
    Polynomial::new(
        c.iter()
            .enumerate()
            .map(|(i, &a)| {
                let k = (d - i) / 2;
                a / t.powi(k as i32)
            })
            .collect(),
    )
}

fn lambda() -> Polynomial {
    Polynomial::monomial(1)
}

fn berger_poly(c2: f64) -> Polynomial {
    lambda().mul(&Polynomial::quadratic(c2))
}

pub fn build(id: &str) -> Result<CatalogEntry> {
    let e = parse_id(id)?;
    let p = &e.params;
    let mut entry = match e.family.as_str() {
        "group" => {
            variant(&e, &["su2"])?;
            check_params(p, &[])?;
            group_su2()?
        }
        "sym" => {
            let v = variant(&e, &["s2", "cp2"])?;
            check_params(p, &[])?;
            symmetric_pair(if v == "s2" { 1 } else { 2 })?
        }
        "berger" => {
            check_params(p, &["n", "s", "kappa"])?;
            let n = int_param(p, "n", 2)?;
            let kappa = param(p, "kappa", 1.0);
            let s = param(p, "s", if kappa > 0.0 { 1.0 } else { -3.0 });
            berger_entry(n, kappa, s)?
        }
        "heisenberg" => {
            check_params(p, &["n", "c"])?;
            let n = int_param(p, "n", 1)?;
            let c = param(p, "c", 1.0);
            heisenberg_entry(n, c)?
        }
        "nk" => {
            let v = variant(&e, &["flag", "cp3", "s3xs3", "s6"])?;
            check_params(p, &["b"])?;
            nearly_kaehler(v, param(p, "b", -1.0 / 12.0))?
        }
        "np" => {
            let v = variant(&e, &["spin7", "squashed-s7", "v1", "v3"])?;
            check_params(p, &["b"])?;
            let default = match v {
                "v1" => -1.0 / 30.0,
                "v3" => -1.0 / 12.0,
                _ => -6.0 / 5.0,
            };
            nearly_parallel(v, param(p, "b", default))?
        }
        "neg" => {
            let v = variant(&e, &["su4-su3", "sp2-sp1"])?;
            check_params(p, &["b"])?;
            negative_case(v, param(p, "b", -1.0 / 12.0))?
        }
        "aw" => {
            variant(&e, &["n11"])?;
            check_params(p, &["s"])?;
            aw_entry(param(p, "s", 1.5))?
        }
        "wilking" => {
            check_params(p, &["s"])?;
            wilking_entry(param(p, "s", 1.0))?
        }
        "qhopf" => {
            check_params(p, &["n", "s"])?;
            if int_param(p, "n", 1)? != 1 {
                return Err(Error::Input("qhopf is implemented for n = 1 only".into()));
            }
            let ext = quaternionic_hopf(param(p, "s", 1.0))?;
            CatalogEntry {
                id: String::new(),
                name: "Sp(2)×Sp(1)/Sp(1)×Sp(1), fibered metric".into(),
                params: BTreeMap::new(),
                model: to_model(&ext.triple),
                triple: Some(ext.triple),
                expected: Expectation::Unspecified,
                expected_gvcp: None,
                note: "quaternionic Hopf bundle over HP¹ with rescaled Sp(1) fibers".into(),
                c2: None,
            }
        }
        other => return Err(Error::Input(format!("unknown catalog family {other:?}"))),
    };
    if let Some(&target) = p.get("scal") {
        entry = normalize_scalar_curvature(entry, target)?;
    }
    entry.id = id.to_string();
    entry.params = e.params.clone();
    Ok(entry)
}

/// Rescale the metric so that the scalar curvature becomes `target`.
pub fn normalize_scalar_curvature(mut entry: CatalogEntry, target: f64) -> Result<CatalogEntry> {
    let scal = entry.scalar_curvature();
    if !(target > 0.0 && scal > 0.0) {
        return Err(Error::Input(format!("cannot rescale scalar curvature {scal} to {target}")));
    }
    let t = scal / target;
    if let Expectation::Polynomial(p) = &entry.expected {
        entry.expected = Expectation::Polynomial(rescale_relation(p, t));
    }
    entry.c2 = entry.c2.map(|c| c / t);
    entry.model = entry.model.rescaled(t);
    if let Some(tr) = entry.triple.take() {
        let b = tr.b.scaled(t, format!("{}·{t}", tr.b.name));
        let m = &tr.m_basis / t.sqrt();
        entry.triple = Some(build_triple_with_m(tr.g, tr.h_basis, b, m)?);
    }
    Ok(entry)
}

fn triple_entry(triple: ReductiveTriple, name: &str, expected: Expectation, gvcp: Option<GvcpType>, note: &str) -> CatalogEntry {
    CatalogEntry {
        id: String::new(),
        name: name.into(),
        params: BTreeMap::new(),
        model: to_model(&triple),
        triple: Some(triple),
        expected,
        expected_gvcp: gvcp,
        note: note.into(),
        c2: None,
    }
}

fn killing_triple(g: &LieAlgebra, h: Mat, b: f64) -> Result<ReductiveTriple> {
    let form = g.killing_form().scaled(b, format!("{b}·killing"));
    build_triple(g.clone(), h, form)
}

fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn empty(g: &MatrixAlgebra) -> Mat {
    Mat::zeros(g.dim(), 0)
}

fn group_su2() -> Result<CatalogEntry> {
    let g = su(2);
    let t = build_triple(g.algebra.clone(), empty(&g), g.trace_form(-0.5, "-tr/2"))?;
    Ok(triple_entry(t, "SU(2) bi-invariant", Expectation::Polynomial(lambda()), Some(GvcpType::VolumeType3), "round S³ of radius 1"))
}

/// su(n+1)/u(n) with −½ tr: CP¹ or CP².
fn symmetric_pair(n: usize) -> Result<CatalogEntry> {
    let (base, _) = berger_base(n, 1.0)?;
    let name = format!("SU({})/U({n})", n + 1);
    Ok(triple_entry(base, &name, Expectation::Polynomial(lambda()), Some(GvcpType::NotGVCP), "symmetric pair"))
}

fn embed_k(n: usize, a: &CMat, lower: bool) -> CMat {
    let mut m = CMat::zeros(n + 1, n + 1);
    if lower {
        m[(0, 0)] = -a.trace();
        m.view_mut((1, 1), (n, n)).copy_from(a);
    } else {
        m.view_mut((0, 0), (n, n)).copy_from(a);
        m[(n, n)] = -a.trace();
    }
    m
}

/// Base triple su(n+1) ⊃ u(n) = {diag(−tr a, a)} (κ > 0), or su(1,n) with the
/// same subalgebra (κ < 0), together with the normal subalgebra su(n).
pub fn berger_base(n: usize, kappa_sign: f64) -> Result<(ReductiveTriple, Mat)> {
    if n == 0 {
        return Err(Error::Input("n must be at least 1".into()));
    }
    let (g, b) = if kappa_sign > 0.0 {
        let g = su(n + 1);
        let b = g.trace_form(-0.5, "-tr/2");
        (g, b)
    } else {
        let g = su_indefinite(1, n);
        let b = g.trace_form(0.5, "tr/2");
        (g, b)
    };
    let k: Vec<CMat> = u(n).generators.iter().map(|a| embed_k(n, a, true)).collect();
    let h: Vec<CMat> = if n > 1 { su(n).generators.iter().map(|a| embed_k(n, a, true)).collect() } else { Vec::new() };
    let kb = g.coords_matrix(&k)?;
    let hb = g.coords_matrix(&h)?;
    Ok((build_triple(g.algebra.clone(), kb, b)?, hb))
}

/// The circle bundle over CPⁿ (κ > 0) or complex hyperbolic space (κ < 0)
/// with the fibered metric for parameter s.
#[derive(Debug, Clone)]
pub struct BergerSpace {
    pub n: usize,
    pub kappa_sign: f64,
    pub extension: FiberedExtension,
    pub model: InfinitesimalModel,
    /// Constant eigenvalue of −τ_u² on the horizontal space, u the vertical unit vector.
    pub c2: f64,
    /// Relative spread of the horizontal eigenvalues of −τ_u².
    pub c2_spread: f64,
}

pub fn berger_total_space(n: usize, kappa_sign: f64, s: f64) -> Result<BergerSpace> {
    let (base, h) = berger_base(n, kappa_sign)?;
    let extension = extend_fibered(&base, &h, s)?;
    let model = to_model(&extension.triple);
    let dim = model.dim();
    let tu = model.tau_op(&crate::reductive::unit(dim, dim - 1));
    let t2 = -(&tu * &tu);
    let hor = t2.view((0, 0), (2 * n, 2 * n)).into_owned();
    let (vals, _) = crate::algebra::sorted_symmetric_eigen(&hor);
    let c2 = vals.iter().sum::<f64>() / vals.len() as f64;
    let c2_spread = (vals[vals.len() - 1] - vals[0]) / c2.abs().max(1e-300);
    Ok(BergerSpace { n, kappa_sign, extension, model, c2, c2_spread })
}

impl BergerSpace {
    /// The central element diag(−n i, i, …, i)/(n+1) of k in g coordinates.
    fn z_coords(&self) -> Vector {
        let n = self.n;
        let mut z = CMat::zeros(n + 1, n + 1);
        z[(0, 0)] = cz(0.0, -(n as f64) / (n as f64 + 1.0));
        for i in 1..=n {
            z[(i, i)] = cz(0.0, 1.0 / (n as f64 + 1.0));
        }
        let g = if self.kappa_sign > 0.0 { su(n + 1) } else { su_indefinite(1, n) };
        g.coords_of(&z).expect("Z lies in the algebra")
    }

    /// Squared radius of the Hopf circles, from the period 2π(n+1)/n of
    /// exp(tZ) modulo SU(n) and the length of the vertical field induced by Z.
    pub fn hopf_radius_sq(&self) -> f64 {
        let z = self.z_coords();
        let t = &self.extension.triple;
        let mut v = Vector::zeros(t.g.dim());
        v.rows_mut(0, z.len()).copy_from(&z);
        let speed2 = t.m_coords(&v).norm_squared();
        let period = (self.n as f64 + 1.0) / self.n as f64;
        period * period * speed2
    }

    /// |4c² − r²κ²| with κ = 4 (only meaningful for κ > 0).
    pub fn radius_relation_residual(&self) -> f64 {
        (4.0 * self.c2 - self.hopf_radius_sq() * 16.0).abs()
    }
}

/// s at which the fibered metric on S^{2n+1} is round.
pub fn berger_round_parameter(n: usize) -> f64 {
    -0.5 * (n as f64 - 1.0) / n as f64
}

fn berger_entry(n: usize, kappa: f64, s: f64) -> Result<CatalogEntry> {
    if kappa == 0.0 {
        return Err(Error::Input("kappa = 0 is the Heisenberg family".into()));
    }
    let sign = kappa.signum();
    let bs = berger_total_space(n, sign, s)?;
    let round = sign > 0.0 && (s - berger_round_parameter(n)).abs() < 1e-12;
    let expected = if round { Expectation::Polynomial(lambda()) } else { Expectation::Berger };
    let gvcp = if n == 1 { GvcpType::VolumeType3 } else { GvcpType::NotGVCP };
    let name = if sign > 0.0 {
        format!("U({})/U({n}) fibered over CP^{n}", n + 1)
    } else {
        format!("circle bundle over complex hyperbolic space of dim {n}")
    };
    let note = if round { "round metric".to_string() } else { format!("c² = {:.12}", bs.c2) };
    Ok(CatalogEntry {
        id: String::new(),
        name,
        params: BTreeMap::new(),
        model: bs.model,
        triple: Some(bs.extension.triple),
        expected,
        expected_gvcp: Some(gvcp),
        note,
        c2: Some(bs.c2),
    })
}

/// τ = c J∧e_{2n}, R̄ = c² J⊗J on ℝ^{2n+1}, J e_{2i} = e_{2i+1}.
pub fn heisenberg_model(n: usize, c: f64) -> Result<InfinitesimalModel> {
    if n == 0 || !(c > 0.0) {
        return Err(Error::Input(format!("heisenberg model needs n ≥ 1 and c > 0 (n = {n}, c = {c})")));
    }
    let dim = 2 * n + 1;
    let e = 2 * n;
    let omega = |i: usize, j: usize| -> f64 {
        if i >= e || j >= e || i / 2 != j / 2 || i == j {
            0.0
        } else if i % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    };
    let tau = |i: usize, j: usize, k: usize| -> f64 {
        c * if k == e {
            omega(i, j)
        } else if j == e {
            omega(k, i)
        } else if i == e {
            omega(j, k)
        } else {
            0.0
        }
    };
    InfinitesimalModel::from_fns(dim, tau, |i, j, k, l| c * c * omega(i, j) * omega(k, l))
}

fn heisenberg_entry(n: usize, c: f64) -> Result<CatalogEntry> {
    let model = heisenberg_model(n, c)?;
    Ok(CatalogEntry {
        id: String::new(),
        name: format!("Heisenberg group N^{}", 2 * n + 1),
        params: BTreeMap::new(),
        model,
        triple: None,
        expected: Expectation::Polynomial(berger_poly(c * c)),
        expected_gvcp: Some(if n == 1 { GvcpType::VolumeType3 } else { GvcpType::NotGVCP }),
        note: "left invariant metric of type H scaled by 1/c²".into(),
        c2: Some(c * c),
    })
}

fn real_rep(g: &MatrixAlgebra, basis: &Mat) -> Vec<Mat> {
    let gens = g.real_generators();
    basis
        .column_iter()
        .map(|col| {
            let mut m = Mat::zeros(gens[0].nrows(), gens[0].ncols());
            for (c, gm) in col.iter().zip(&gens) {
                m += gm * *c;
            }
            m
        })
        .collect()
}

fn labels(prefix: &str, r: usize) -> Vec<String> {
    (0..r).map(|i| format!("{prefix}{i}")).collect()
}

/// g2 ⊂ so(7) as the stabilizer of the 3-form, its standard representation and
/// su(3) ⊂ g2 as the stabilizer of e₇ (in g2 coordinates).
pub fn g2_and_su3() -> Result<(LieAlgebra, Vec<Mat>, Mat)> {
    let so7 = so(7);
    let basis = crate::liealg::stabilizer_subalgebra(&so7.algebra, &so7.real_generators(), &[g2_sigma().0])?;
    let g2 = so7.algebra.subalgebra(&basis, labels("g", basis.ncols()))?;
    let rep = real_rep(&so7, &basis);
    let mut e7 = AltForm::zero(7, 1);
    e7.set_alternating(&[6], 1.0);
    let su3 = crate::liealg::stabilizer_subalgebra(&g2, &rep, &[e7])?;
    Ok((g2, rep, su3))
}

/// The Cayley 4-form e₀∧φ + ⋆φ on ℝ⁸, φ the G2 form on span(e₁…e₇).
pub fn cayley_form() -> AltForm {
    let phi = g2_sigma();
    let perms = crate::liealg::permutations(7);
    let mut out = AltForm::zero(8, 4);
    for i in 0..7 {
        for j in i + 1..7 {
            for k in j + 1..7 {
                let c = phi.get(i, j, k);
                if c == 0.0 {
                    continue;
                }
                out.set_alternating(&[0, i + 1, j + 1, k + 1], c);
                let rest: Vec<usize> = (0..7).filter(|x| ![i, j, k].contains(x)).collect();
                let order: Vec<usize> = [i, j, k].iter().chain(&rest).copied().collect();
                let sign = perms.iter().find(|(p, _)| *p == order).map(|(_, s)| *s).unwrap();
                let idx: Vec<usize> = rest.iter().map(|x| x + 1).collect();
                out.set_alternating(&idx, sign * c);
            }
        }
    }
    out
}

fn nearly_kaehler(v: &str, b: f64) -> Result<CatalogEntry> {
    let reference = Polynomial::new(vec![0.0, 0.25, 0.0, 1.25, 0.0, 1.0]);
    let t = b / (-1.0 / 12.0);
    let (triple, name, note) = match v {
        "flag" => {
            let g = su(3);
            let h = g.coords_matrix(&g.generators[6..8])?;
            (killing_triple(&g.algebra, h, b)?, "SU(3)/T²", "flag manifold F³")
        }
        "cp3" => {
            let g = so(5);
            let mut omega = AltForm::zero(5, 2);
            omega.set_alternating(&[0, 1], 1.0);
            omega.set_alternating(&[2, 3], 1.0);
            let h = crate::liealg::stabilizer_subalgebra(&g.algebra, &g.real_generators(), &[omega])?;
            (killing_triple(&g.algebra, h, b)?, "SO(5)/U(2)", "CP³ with its 3-symmetric metric")
        }
        "s3xs3" => {
            let s2 = su(2);
            let g = matrix_direct_sum(&matrix_direct_sum(&s2, &s2), &s2);
            let diag: Vec<CMat> = s2.generators.iter().map(|a| block_diag(&[a, a, a])).collect();
            let h = g.coords_matrix(&diag)?;
            (killing_triple(&g.algebra, h, b)?, "SU(2)³/SU(2)", "S³×S³ with diagonal SU(2)")
        }
        "s6" => {
            let (g2, _, su3) = g2_and_su3()?;
            let triple = killing_triple(&g2, su3, b)?;
            return Ok(triple_entry(
                triple,
                "G2/SU(3)",
                Expectation::Polynomial(lambda()),
                Some(GvcpType::SU3Type6),
                "round S⁶; G2 and SU(3) as stabilizers",
            ));
        }
        _ => unreachable!(),
    };
    Ok(triple_entry(
        triple,
        name,
        Expectation::Polynomial(rescale_relation(&reference, t)),
        Some(GvcpType::SU3Type6),
        note,
    ))
}

/// q ∈ sp(1) (2×2) placed on quaternionic coordinate k of sp(2) (4×4).
fn sp1_in_sp2(q: &CMat, k: usize) -> CMat {
    let mut m = CMat::zeros(4, 4);
    let idx = [k, k + 2];
    for a in 0..2 {
        for b in 0..2 {
            m[(idx[a], idx[b])] = q[(a, b)];
        }
    }
    m
}

/// Traceless symmetric 3×3 matrices, orthonormal for tr(AB).
fn traceless_symmetric_basis() -> Vec<Mat> {
    let r2 = 2f64.sqrt();
    let r6 = 6f64.sqrt();
    let mut out = Vec::new();
    let mut m = Mat::zeros(3, 3);
    m[(0, 0)] = 1.0 / r2;
    m[(1, 1)] = -1.0 / r2;
    out.push(m);
    let mut m = Mat::zeros(3, 3);
    m[(0, 0)] = 1.0 / r6;
    m[(1, 1)] = 1.0 / r6;
    m[(2, 2)] = -2.0 / r6;
    out.push(m);
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let mut m = Mat::zeros(3, 3);
        m[(i, j)] = 1.0 / r2;
        m[(j, i)] = 1.0 / r2;
        out.push(m);
    }
    out
}

/// so(3) acting irreducibly on traceless Sym²(ℝ³), as a subalgebra of so(5).
pub fn irreducible_so3_in_so5() -> Result<(MatrixAlgebra, Mat)> {
    let g = so(5);
    let basis = traceless_symmetric_basis();
    let mut gens = Vec::new();
    for l in so(3).real_generators() {
        let mut a = CMat::zeros(5, 5);
        for (i, si) in basis.iter().enumerate() {
            for (j, sj) in basis.iter().enumerate() {
                let act = &l * sj - sj * &l;
                a[(i, j)] = cz((si * act).trace(), 0.0);
            }
        }
        gens.push(a);
    }
    let h = g.coords_matrix(&gens)?;
    Ok((g, h))
}

/// su(3) ⊕ su(2) ⊃ {diag(A, −tr A) ⊕ (A − ½ tr A)}, A ∈ u(2).
pub fn v3_algebra() -> Result<(MatrixAlgebra, Mat)> {
    let g = matrix_direct_sum(&su(3), &su(2));
    let mut h = Vec::new();
    for a in u(2).generators {
        let tr = a.trace();
        let a0 = &a - CMat::identity(2, 2) * (tr * 0.5);
        h.push(block_diag(&[&embed_k(2, &a, false), &a0]));
    }
    let hb = g.coords_matrix(&h)?;
    Ok((g, hb))
}

fn nearly_parallel(v: &str, b: f64) -> Result<CatalogEntry> {
    let (triple, name, expected, gvcp, note) = match v {
        "spin7" => {
            let so8 = so(8);
            let basis = crate::liealg::stabilizer_subalgebra(&so8.algebra, &so8.real_generators(), &[cayley_form()])?;
            let spin7 = so8.algebra.subalgebra(&basis, labels("p", basis.ncols()))?;
            let rep = real_rep(&so8, &basis);
            let mut e0 = AltForm::zero(8, 1);
            e0.set_alternating(&[0], 1.0);
            let g2 = crate::liealg::stabilizer_subalgebra(&spin7, &rep, &[e0])?;
            (
                killing_triple(&spin7, g2, b)?,
                "Spin(7)/G2",
                Expectation::Polynomial(lambda()),
                GvcpType::G2Type7,
                "round S⁷; Spin(7) and G2 as stabilizers",
            )
        }
        "squashed-s7" => {
            let sp1 = sp(1);
            let g = matrix_direct_sum(&sp(2), &sp1);
            let mut h = Vec::new();
            for q in &sp1.generators {
                h.push(block_diag(&[&sp1_in_sp2(q, 0), &CMat::zeros(2, 2)]));
            }
            for q in &sp1.generators {
                h.push(block_diag(&[&sp1_in_sp2(q, 1), q]));
            }
            let hb = g.coords_matrix(&h)?;
            (
                killing_triple(&g.algebra, hb, b)?,
                "Sp(2)×Sp(1)/Sp(1)×Sp(1)",
                Expectation::NearlyParallel,
                GvcpType::G2Type7,
                "squashed S⁷",
            )
        }
        "v1" => {
            let (g, h) = irreducible_so3_in_so5()?;
            let reference = lambda().mul(&Polynomial::quadratic(1.0));
            (
                killing_triple(&g.algebra, h, b)?,
                "SO(5)/SO(3) ≅ Sp(2)/SU(2)",
                Expectation::Polynomial(rescale_relation(&reference, b / (-1.0 / 30.0))),
                GvcpType::G2Type7,
                "Berger space V1, SO(3) acting on traceless symmetric matrices",
            )
        }
        "v3" => {
            let (g, h) = v3_algebra()?;
            let reference = lambda().mul(&Polynomial::quadratic(0.4));
            (
                killing_triple(&g.algebra, h, b)?,
                "SU(3)×SO(3)/U(2)",
                Expectation::Polynomial(rescale_relation(&reference, b / (-1.0 / 12.0))),
                GvcpType::G2Type7,
                "Aloff–Wallach space N(1,1) with its normal metric",
            )
        }
        _ => unreachable!(),
    };
    Ok(triple_entry(triple, name, expected, Some(gvcp), note))
}

fn negative_case(v: &str, b: f64) -> Result<CatalogEntry> {
    match v {
        "su4-su3" => {
            let g = su(4);
            let h: Vec<CMat> = su(3).generators.iter().map(|a| embed_k(3, a, true)).collect();
            let triple = killing_triple(&g.algebra, g.coords_matrix(&h)?, b)?;
            let mut e = triple_entry(
                triple,
                "SU(4)/SU(3)",
                Expectation::BergerNotNearlyParallel,
                Some(GvcpType::NotGVCP),
                "strict Berger sphere, normal metric",
            );
            // b·Killing = 8b·tr, so the metric is −16b times the one of −½ tr.
            let t = -16.0 * b;
            e.c2 = Some(berger_total_space(3, 1.0, 0.0)?.c2 / t);
            Ok(e)
        }
        "sp2-sp1" => {
            let g = sp(2);
            let h: Vec<CMat> = sp(1).generators.iter().map(|q| sp1_in_sp2(q, 1)).collect();
            let triple = killing_triple(&g.algebra, g.coords_matrix(&h)?, b)?;
            Ok(triple_entry(triple, "Sp(2)/Sp(1)", Expectation::NoRelation, None, "normal metric on S⁷"))
        }
        _ => unreachable!(),
    }
}

/// Base triple su(3) ⊃ u(2) = {diag(A, −tr A)} with form `b`, and the centre of u(2).
fn aw_base(scale: f64) -> Result<(ReductiveTriple, Mat)> {
    let g = su(3);
    let k: Vec<CMat> = u(2).generators.iter().map(|a| embed_k(2, a, false)).collect();
    let mut z = CMat::zeros(3, 3);
    z[(0, 0)] = cz(0.0, 1.0);
    z[(1, 1)] = cz(0.0, 1.0);
    z[(2, 2)] = cz(0.0, -2.0);
    let base = build_triple(g.algebra.clone(), g.coords_matrix(&k)?, g.trace_form(scale, "trace"))?;
    Ok((base, g.coords_matrix(&[z])?))
}

/// The N(1,1) family: su(3) ⊕ su(2) with B̂(s) = −½ tr ⊕ −(1/2s) tr, built as
/// the fibered extension of SU(3)/U(2) with three-dimensional fibers.
pub fn aloff_wallach_n11(s: f64) -> Result<(FiberedExtension, InfinitesimalModel)> {
    if s == 0.0 || s == -1.0 || s < -1.0 || !s.is_finite() {
        return Err(Error::InvalidS(s));
    }
    let (base, h) = aw_base(-0.5)?;
    let ext = extend_fibered_general(&base, &h, s)?;
    let model = to_model(&ext.triple);
    Ok((ext, model))
}

fn aw_entry(s: f64) -> Result<CatalogEntry> {
    let (ext, model) = aloff_wallach_n11(s)?;
    let np = (s - 1.5).abs() < 1e-12;
    Ok(CatalogEntry {
        id: String::new(),
        name: "SU(3)×SU(2)/U(2)".into(),
        params: BTreeMap::new(),
        model,
        triple: Some(ext.triple),
        expected: if np { Expectation::NearlyParallel } else { Expectation::Unspecified },
        expected_gvcp: Some(if np { GvcpType::G2Type7 } else { GvcpType::NotGVCP }),
        note: if np { "nearly parallel G2 member of the family".into() } else { "fibered metric".into() },
        c2: None,
    })
}

/// SU(3)×SO(3)/U(2) over CP² with B = −Killing(su(3)) on the base.
pub fn wilking(s: f64) -> Result<FiberedExtension> {
    let (base, h) = aw_base(-6.0)?;
    extend_fibered_general(&base, &h, s)
}

fn wilking_entry(s: f64) -> Result<CatalogEntry> {
    let ext = wilking(s)?;
    Ok(CatalogEntry {
        id: String::new(),
        name: "SU(3)×SO(3)/U(2) (Wilking)".into(),
        params: BTreeMap::new(),
        model: to_model(&ext.triple),
        triple: Some(ext.triple),
        expected: Expectation::Unspecified,
        expected_gvcp: None,
        note: "fibered over CP² with −Killing on su(3)".into(),
        c2: None,
    })
}

/// Sp(2) ⊃ Sp(1)×Sp(1) with B = −Killing, extended along the first Sp(1).
pub fn quaternionic_hopf(s: f64) -> Result<FiberedExtension> {
    let g = sp(2);
    let sp1 = sp(1);
    let fiber: Vec<CMat> = sp1.generators.iter().map(|q| sp1_in_sp2(q, 0)).collect();
    let normal: Vec<CMat> = sp1.generators.iter().map(|q| sp1_in_sp2(q, 1)).collect();
    let k = g.coords_matrix(&[fiber, normal.clone()].concat())?;
    let base = killing_triple(&g.algebra, k, -1.0)?;
    extend_fibered_general(&base, &g.coords_matrix(&normal)?, s)
}

/// Sectional curvatures on random planes and on the planes (X, ρ(Z_i)X) with X horizontal.
pub fn fibered_curvature_samples(ext: &FiberedExtension, samples: usize, seed: u64) -> Vec<f64> {
    let model = to_model(&ext.triple);
    let n = model.dim();
    let np = ext.base_dim;
    let mut rng = sampling::rng(seed);
    let mut out = Vec::new();
    for _ in 0..samples {
        let x = sampling::unit_vector(&mut rng, n);
        let y = sampling::unit_vector(&mut rng, n);
        if let Ok(k) = sectional_curvature(&model, &x, &y) {
            out.push(k);
        }
        let h = sampling::unit_vector(&mut rng, np);
        for rho in &ext.rho {
            let mut x = Vector::zeros(n);
            let mut y = Vector::zeros(n);
            x.rows_mut(0, np).copy_from(&h);
            y.rows_mut(0, np).copy_from(&(rho * &h));
            if let Ok(k) = sectional_curvature(&model, &x, &y) {
                out.push(k);
            }
        }
    }
    out
}

fn curvature_spread(s: f64) -> f64 {
    let ext = quaternionic_hopf(s).expect("admissible s");
    let ks = fibered_curvature_samples(&ext, 24, sampling::DEFAULT_SEED);
    let max = ks.iter().cloned().fold(f64::MIN, f64::max);
    let min = ks.iter().cloned().fold(f64::MAX, f64::min);
    max - min
}

/// The fiber parameter at which the quaternionic Hopf total space is round,
/// located by golden-section search on the sectional curvature spread.
pub fn quaternionic_round_parameter() -> f64 {
    let (mut a, mut b) = (-0.9, 4.0);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (curvature_spread(c), curvature_spread(d));
    while b - a > 1e-9 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = curvature_spread(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = curvature_spread(d);
        }
    }
    0.5 * (a + b)
}

/// Smallest sampled sectional curvature of the quaternionic Hopf total space.
pub fn quaternionic_min_curvature(s: f64, samples: usize, seed: u64) -> Result<f64> {
    let ext = quaternionic_hopf(s)?;
    Ok(fibered_curvature_samples(&ext, samples, seed).into_iter().fold(f64::MAX, f64::min))
}

pub fn nearly_kaehler_spaces() -> Vec<CatalogEntry> {
    ["nk:flag", "nk:cp3", "nk:s3xs3", "nk:s6"].iter().map(|id| build(id).expect("nearly Kähler entry")).collect()
}

pub fn nearly_parallel_g2_spaces() -> Vec<CatalogEntry> {
    ["np:spin7", "np:squashed-s7", "np:v1", "np:v3"].iter().map(|id| build(id).expect("nearly parallel entry")).collect()
}

pub fn negative_cases() -> Vec<CatalogEntry> {
    ["neg:su4-su3", "neg:sp2-sp1"].iter().map(|id| build(id).expect("negative entry")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::{check_ljr, minimal_ljr, JacobiFamily};
    use crate::reductive::{ricci, unit};
    use crate::vcp::{fit_vcp_multiple, residual_torsion_form, ThreeForm};

    fn casimir_spectrum(tau: &ThreeForm) -> Vec<f64> {
        let n = tau.dim();
        let mut c = Mat::zeros(n, n);
        for i in 0..n {
            let t = tau.op(&unit(n, i));
            c -= &t * &t;
        }
        crate::algebra::sorted_symmetric_eigen(&c).0
    }

    #[test]
    fn parses_identifiers() {
        let e = parse_id("nk:flag,b=-1/6").unwrap();
        assert_eq!(e.family, "nk");
        assert_eq!(e.variant.as_deref(), Some("flag"));
        assert!((e.params["b"] + 1.0 / 6.0).abs() < 1e-16);
        let e = parse_id("berger:n=2,s=1").unwrap();
        assert_eq!(e.variant, None);
        assert_eq!(e.params.len(), 2);
        assert!(parse_id("berger:n=2,n=3").is_err());
        assert!(parse_id("nk:flag,cp3").is_err());
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("x").is_err());
        assert!(matches!(build("nope:x"), Err(Error::Input(_))));
        assert!(matches!(build("nk:flag,q=1"), Err(Error::Input(_))));
        assert!(matches!(build("berger:n=0"), Err(Error::Input(_))));
    }

    #[test]
    fn rescaling_relation_divides_even_coefficients() {
        let p = Polynomial::new(vec![0.0, 0.25, 0.0, 1.25, 0.0, 1.0]);
        let q = rescale_relation(&p, 2.0);
        assert!(q.approx_eq(&Polynomial::new(vec![0.0, 1.0 / 16.0, 0.0, 10.0 / 16.0, 0.0, 1.0]), 1e-15));
    }

    #[test]
    fn berger_c2_matches_hopf_circle_data() {
        // Independent oracle: the Hopf circle has squared radius ½(n+1)/(n(1+s))
        // and 4c² = 16 r² for κ = 4.
        for n in 1..=3 {
            for &s in &[-0.5, 0.0, 1.0, 2.0] {
                let b = berger_total_space(n, 1.0, s).unwrap();
                let nf = n as f64;
                let r2 = 0.5 * (nf + 1.0) / (nf * (1.0 + s));
                assert!((b.hopf_radius_sq() - r2).abs() < 1e-12);
                assert!((b.c2 - 4.0 * r2).abs() < 1e-10, "n={n} s={s}: {}", b.c2);
                assert!(b.c2_spread < 1e-10);
                assert!(b.radius_relation_residual() < 1e-10);
            }
        }
    }

    #[test]
    fn berger_round_parameter_gives_unit_curvature() {
        for n in 2..=3 {
            let b = berger_total_space(n, 1.0, berger_round_parameter(n)).unwrap();
            assert!((b.c2 - 4.0).abs() < 1e-10);
            let d = b.model.dim();
            for (x, y) in crate::sampling::unit_vectors(d, 6, 5).iter().zip(crate::sampling::unit_vectors(d, 6, 6).iter()) {
                assert!((sectional_curvature(&b.model, x, y).unwrap() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn berger_negative_curvature_needs_s_below_minus_one() {
        assert!(matches!(berger_total_space(2, -1.0, 1.0), Err(Error::InadmissibleS(_))));
        assert!(matches!(berger_total_space(2, 1.0, -2.0), Err(Error::InadmissibleS(_))));
        let b = berger_total_space(2, -1.0, -3.0).unwrap();
        assert!(b.c2 > 0.0 && b.c2_spread < 1e-10);
    }

    #[test]
    fn heisenberg_curvatures() {
        for &c in &[1.0, 2.0] {
            let m = heisenberg_model(2, c).unwrap();
            let (x, jx, e) = (unit(5, 0), unit(5, 1), unit(5, 4));
            assert!((sectional_curvature(&m, &x, &jx).unwrap() + 0.75 * c * c).abs() < 1e-12);
            assert!((sectional_curvature(&m, &x, &e).unwrap() - 0.25 * c * c).abs() < 1e-12);
            assert!(ricci(&m, &e) > 0.0);
        }
        assert!(heisenberg_model(1, 0.0).is_err());
    }

    #[test]
    fn stabilizer_constructions_have_expected_dimensions() {
        let (g2, rep, su3) = g2_and_su3().unwrap();
        assert_eq!(g2.dim(), 14);
        assert_eq!(rep.len(), 14);
        assert_eq!(su3.ncols(), 8);
        assert!(g2.closure_residual(&su3) < 1e-9);
        let so8 = so(8);
        let spin7 = crate::liealg::stabilizer_subalgebra(&so8.algebra, &so8.real_generators(), &[cayley_form()]).unwrap();
        assert_eq!(spin7.ncols(), 21);
        let cp3 = build("nk:cp3").unwrap();
        assert_eq!(cp3.triple.unwrap().h_basis.ncols(), 4);
    }

    #[test]
    fn so3_acts_irreducibly_on_five_dimensions() {
        let (g, h) = irreducible_so3_in_so5().unwrap();
        assert_eq!(h.ncols(), 3);
        assert!(g.algebra.closure_residual(&h) < 1e-12);
        // Only multiples of the identity commute with the action.
        let rep = real_rep(&g, &h);
        let mut rows = Vec::new();
        for a in &rep {
            for i in 0..5 {
                for j in 0..5 {
                    let mut row = vec![0.0; 25];
                    for k in 0..5 {
                        row[i * 5 + k] += a[(k, j)];
                        row[k * 5 + j] -= a[(i, k)];
                    }
                    rows.push(row);
                }
            }
        }
        let m = Mat::from_row_slice(rows.len(), 25, &rows.concat());
        assert_eq!(crate::algebra::null_space(&m, 1e-10).ncols(), 1);
    }

    #[test]
    fn squashed_sphere_at_normalized_scalar_curvature() {
        let e = build("np:squashed-s7,b=-1/12,scal=21/8").unwrap();
        assert!((e.scalar_curvature() - 21.0 / 8.0).abs() < 1e-10);
        let v = minimal_ljr(&JacobiFamily::new(e.model.clone())).unwrap();
        let p = v.polynomial.unwrap();
        assert!((p.coeff(1) - 1.0 / 36.0).abs() < 1e-9);
        assert!(e.triple.is_some());
    }

    #[test]
    fn v3_two_routes_agree() {
        let normal = build("np:v3").unwrap();
        let (_, fibered) = aloff_wallach_n11(1.5).unwrap();
        assert!((normal.scalar_curvature() - scalar_curvature(&fibered)).abs() < 1e-10);
        let a = casimir_spectrum(&ThreeForm::from_model(&normal.model));
        let b = casimir_spectrum(&ThreeForm::from_model(&fibered));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn aw_family_matches_residual_bracket_torsion() {
        for &s in &[0.5, 1.0, 1.5, 2.0] {
            let (_, model) = aloff_wallach_n11(s).unwrap();
            let ours = ThreeForm::from_model(&model);
            let theirs = residual_torsion_form(s).unwrap();
            assert!((ours.norm() - theirs.norm()).abs() < 1e-10, "s = {s}");
            for (x, y) in casimir_spectrum(&ours).iter().zip(&casimir_spectrum(&theirs)) {
                assert!((x - y).abs() < 1e-10, "s = {s}");
            }
            assert_eq!(fit_vcp_multiple(&ours).is_some(), fit_vcp_multiple(&theirs).is_some());
        }
        for s in [0.0, -1.0, -2.0] {
            assert!(matches!(aloff_wallach_n11(s), Err(Error::InvalidS(_))));
        }
    }

    #[test]
    fn wilking_metric_is_a_rescaled_family_member() {
        // −Killing(su(3)) = 12 · (−½ tr), so every curvature quantity scales by 1/12.
        let w = to_model(&wilking(1.0).unwrap().triple);
        let (_, a) = aloff_wallach_n11(1.0).unwrap();
        assert!((scalar_curvature(&a) - 12.0 * scalar_curvature(&w)).abs() < 1e-9);
        let sw = casimir_spectrum(&ThreeForm::from_model(&w));
        let sa = casimir_spectrum(&ThreeForm::from_model(&a));
        for (x, y) in sw.iter().zip(&sa) {
            assert!((12.0 * x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn quaternionic_positivity_window() {
        let sr = quaternionic_round_parameter();
        let round = quaternionic_hopf(sr).unwrap();
        let ks = fibered_curvature_samples(&round, 16, 9);
        let spread = ks.iter().cloned().fold(f64::MIN, f64::max) - ks.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 1e-6);
        // r²/r_κ² = (1+s_round)/(1+s) < 4/3.
        let edge = 0.75 * (1.0 + sr) - 1.0;
        for &s in &[edge + 0.02, edge + 0.2, sr, 1.0, 4.0] {
            assert!(quaternionic_min_curvature(s, 48, 3).unwrap() > 0.0, "s = {s}");
        }
        for &s in &[edge - 0.02, edge - 0.2] {
            assert!(quaternionic_min_curvature(s, 48, 3).unwrap() <= 0.0, "s = {s}");
        }
    }

    #[test]
    fn flag_normalizations_are_coherent() {
        let a = build("nk:flag").unwrap();
        let b = build("nk:flag,b=-1/6").unwrap();
        let pa = minimal_ljr(&JacobiFamily::new(a.model.clone())).unwrap().polynomial.unwrap();
        let pb = minimal_ljr(&JacobiFamily::new(b.model.clone())).unwrap().polynomial.unwrap();
        assert!(rescale_relation(&pa, 2.0).approx_eq(&pb, 1e-10));
    }

    #[test]
    fn negative_cases_behave() {
        let su4 = build("neg:su4-su3").unwrap();
        let fam = JacobiFamily::new(su4.model.clone());
        let p = minimal_ljr(&fam).unwrap().polynomial.unwrap();
        assert!(check_ljr(&fam, &su4.expected_polynomial().unwrap()) < 1e-8);
        assert!((p.coeff(1) - 2.0 * su4.scalar_curvature() / 189.0).abs() > 0.1);
        let sp = build("neg:sp2-sp1").unwrap();
        let v = minimal_ljr(&JacobiFamily::new(sp.model)).unwrap();
        assert!(!v.exists);
        assert!(!v.failed_conditions.is_empty());
    }

    #[test]
    fn scalar_curvature_normalization_rejects_bad_targets() {
        let e = build("np:v1").unwrap();
        assert!(normalize_scalar_curvature(e, -1.0).is_err());
        assert!(build("heisenberg:n=1,c=1,scal=1").is_err());
    }
}
