//! The 𝒯-operator calculus on symmetric endomorphisms, detection and
//! verification of linear Jacobi relations P(𝒯_X)ℛ(X) = 0, the universal
//! Cayley–Hamilton relation and the trace-free part of ℛ_k.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::algebra::{
    characteristic_polynomial, orthogonal_complement, skew_spectral_decomposition, sym_basis, operator_matrix,
    Mat, Polynomial, SkewSpectrum, Tolerances, Vector,
};
use crate::error::{Error, Result};
use crate::reductive::{jacobi_operator, rbar_jacobi, InfinitesimalModel, ReductiveTriple};
use crate::sampling;

pub const DEFAULT_SAMPLES: usize = 64;
/// Below this many generic samples constancy is not decided.
pub const SAMPLE_FLOOR: usize = 8;
const CONSTANCY_TOL: f64 = 1e-6;
const VANISHING_TOL: f64 = 1e-7;

/// 𝒯_X S = ½(Sτ_X − τ_X S), given τ_X.
pub fn t_apply_with(tau_x: &Mat, s: &Mat) -> Mat {
    (s * tau_x - tau_x * s) * 0.5
}

pub fn t_apply(model: &InfinitesimalModel, x: &Vector, s: &Mat) -> Mat {
    t_apply_with(&model.tau_op(x), s)
}

/// A model together with its sampling plan and tolerances.
#[derive(Debug, Clone)]
pub struct JacobiFamily {
    pub model: InfinitesimalModel,
    pub samples: Vec<Vector>,
    pub seed: u64,
    pub tol: Tolerances,
}

impl JacobiFamily {
    pub fn new(model: InfinitesimalModel) -> Self {
        Self::with_samples(model, DEFAULT_SAMPLES, sampling::DEFAULT_SEED)
    }

    pub fn with_samples(model: InfinitesimalModel, count: usize, seed: u64) -> Self {
        let samples = sampling::sample_plan(model.dim(), count, seed);
        JacobiFamily { model, samples, seed, tol: Tolerances::default() }
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// [ℛ₀(X), …, ℛ_kmax(X)].
    pub fn series(&self, x: &Vector, kmax: usize) -> Vec<Mat> {
        let t = self.model.tau_op(x);
        let mut out = Vec::with_capacity(kmax + 1);
        out.push(jacobi_operator(&self.model, x));
        for k in 0..kmax {
            let next = t_apply_with(&t, &out[k]);
            out.push(next);
        }
        out
    }
}

/// ℛ_k(X) = 𝒯_X^k ℛ₀(X).
pub fn scd(family: &JacobiFamily, x: &Vector, k: usize) -> Mat {
    family.series(x, k).pop().unwrap()
}

/// P(𝒯_X)ℛ₀(X).
pub fn apply_relation(model: &InfinitesimalModel, p: &Polynomial, x: &Vector) -> Mat {
    let t = model.tau_op(x);
    p.apply(|s: &Mat| t_apply_with(&t, s), &jacobi_operator(model, x))
}

/// max over the family's samples of ‖P(𝒯_X)ℛ₀(X)‖/‖ℛ₀(X)‖.
pub fn check_ljr(family: &JacobiFamily, p: &Polynomial) -> f64 {
    family
        .samples
        .par_iter()
        .map(|x| {
            let r0 = jacobi_operator(&family.model, x).norm();
            if r0 <= 1e-300 {
                return 0.0;
            }
            apply_relation(&family.model, p, x).norm() / r0
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentKind {
    /// π₀Sπ₀.
    Kernel,
    /// π₀Sπ_k + π_kSπ₀.
    Mixed,
    /// Part of π_kSπ_ℓ + π_ℓSπ_k commuting with J.
    Hermitian,
    /// Part anticommuting with J.
    AntiHermitian,
}

impl ComponentKind {
    pub fn label(&self) -> &'static str {
        match self {
            ComponentKind::Kernel => "(0,0)",
            ComponentKind::Mixed => "(0,k)",
            ComponentKind::Hermitian => "(1,1)",
            ComponentKind::AntiHermitian => "(2,0)+(0,2)",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Component {
    pub kind: ComponentKind,
    /// Block indices, 0 for the kernel, blocks counted from 1.
    pub k: usize,
    pub l: usize,
    pub matrix: Mat,
    /// Eigenvalue of −(A⋆)² on this component.
    pub eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub struct ComponentSplit {
    pub components: Vec<Component>,
    /// ‖S − Σ components‖ relative to ‖S‖.
    pub sum_residual: f64,
    /// max ‖−(A⋆)²C − μC‖ relative to ‖S‖.
    pub eigen_residual: f64,
}

impl ComponentSplit {
    pub fn get(&self, kind: ComponentKind, k: usize, l: usize) -> Option<&Component> {
        self.components.iter().find(|c| c.kind == kind && c.k == k && c.l == l)
    }
}

pub fn component_split(spec: &SkewSpectrum, s: &Mat) -> ComponentSplit {
    let a = spec.reconstruct();
    let nb = spec.blocks.len();
    let lam = |k: usize| if k == 0 { 0.0 } else { spec.blocks[k - 1].lambda };
    let mut comps = Vec::new();
    let p0 = spec.projection(0);
    comps.push(Component { kind: ComponentKind::Kernel, k: 0, l: 0, matrix: p0 * s * p0, eigenvalue: 0.0 });
    for k in 1..=nb {
        let pk = spec.projection(k);
        let m = p0 * s * pk + pk * s * p0;
        comps.push(Component { kind: ComponentKind::Mixed, k: 0, l: k, matrix: m, eigenvalue: lam(k).powi(2) });
    }
    for k in 1..=nb {
        for l in k..=nb {
            let (pk, pl) = (spec.projection(k), spec.projection(l));
            let (m, j) = if k == l {
                (pk * s * pk, spec.blocks[k - 1].j.clone())
            } else {
                (pk * s * pl + pl * s * pk, &spec.blocks[k - 1].j + &spec.blocks[l - 1].j)
            };
            let jmj = &j * &m * &j;
            comps.push(Component {
                kind: ComponentKind::Hermitian,
                k,
                l,
                matrix: (&m - &jmj) * 0.5,
                eigenvalue: (lam(l) - lam(k)).powi(2),
            });
            comps.push(Component {
                kind: ComponentKind::AntiHermitian,
                k,
                l,
                matrix: (&m + &jmj) * 0.5,
                eigenvalue: (lam(l) + lam(k)).powi(2),
            });
        }
    }
    let scale = s.norm().max(1e-300);
    let mut sum = Mat::zeros(s.nrows(), s.ncols());
    let mut eig = 0.0f64;
    for c in &comps {
        sum += &c.matrix;
        let ac = &a * &c.matrix - &c.matrix * &a;
        let aac = &a * &ac - &ac * &a;
        eig = eig.max((-aac - &c.matrix * c.eigenvalue).norm() / scale);
    }
    ComponentSplit { components: comps, sum_residual: (s - sum).norm() / scale, eigen_residual: eig }
}

#[derive(Debug, Clone)]
pub struct ComponentSummary {
    pub kind: ComponentKind,
    pub k: usize,
    pub l: usize,
    pub max_norm: f64,
    pub vanishes: bool,
    /// Mean eigenvalue of −𝒯_X² on the component.
    pub t_eigenvalue: f64,
}

#[derive(Debug, Clone, Default)]
pub struct EigenStructure {
    pub accepted: usize,
    pub discarded: usize,
    pub kernel_dim: usize,
    pub block_dims: Vec<usize>,
    pub mean_lambdas: Vec<f64>,
    pub lambda_constant: Vec<bool>,
    /// (k, ℓ, λ_ℓ − λ_k constant, λ_ℓ + λ_k constant) for k < ℓ.
    pub pair_constant: Vec<(usize, usize, bool, bool)>,
    pub components: Vec<ComponentSummary>,
}

#[derive(Debug, Clone)]
pub struct LjrVerdict {
    pub exists: bool,
    pub polynomial: Option<Polynomial>,
    pub eigen_structure: EigenStructure,
    pub max_residual: f64,
    pub minimal: bool,
    /// Vanishing verdicts from ℛ̄(X) agree with those from ℛ₀(X) on all
    /// components with nonzero eigenvalue.
    pub rbar_agrees: bool,
    pub failed_conditions: Vec<String>,
}

struct SampleData {
    signature: (usize, Vec<usize>),
    lambdas: Vec<f64>,
    norms: Vec<(ComponentKind, usize, usize, f64, f64)>,
    rbar_norms: Vec<f64>,
    r0_norm: f64,
    ricci: f64,
}

fn analyse_sample(model: &InfinitesimalModel, x: &Vector, gap: f64) -> Option<SampleData> {
    let x = x / x.norm();
    let spec = skew_spectral_decomposition(&model.tau_op(&x), gap).ok()?;
    let r0 = jacobi_operator(model, &x);
    let rb = rbar_jacobi(model, &x);
    let split = component_split(&spec, &r0);
    let split_bar = component_split(&spec, &rb);
    Some(SampleData {
        signature: (spec.zero_space.ncols(), spec.blocks.iter().map(|b| b.basis.ncols()).collect()),
        lambdas: spec.lambdas(),
        norms: split.components.iter().map(|c| (c.kind, c.k, c.l, c.matrix.norm(), c.eigenvalue)).collect(),
        rbar_norms: split_bar.components.iter().map(|c| c.matrix.norm()).collect(),
        r0_norm: r0.norm(),
        ricci: r0.trace(),
    })
}

fn relative_std(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    if mean.abs() <= 1e-300 {
        return if var == 0.0 { 0.0 } else { f64::INFINITY };
    }
    var.sqrt() / mean.abs()
}

/// Detect the minimal linear Jacobi relation from the eigen-structure of τ_X
/// and the component split of ℛ₀(X) over the family's samples.
pub fn minimal_ljr(family: &JacobiFamily) -> Result<LjrVerdict> {
    let model = &family.model;
    let n = model.dim();
    let gap = family.tol.gap;
    let mut xs = family.samples.clone();
    let mut data: Vec<Option<SampleData>> = xs.par_iter().map(|x| analyse_sample(model, x, gap)).collect();

    let pick = |data: &[Option<SampleData>]| -> Option<(usize, Vec<usize>)> {
        let mut counts: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        for d in data.iter().flatten() {
            *counts.entry(d.signature.clone()).or_default() += 1;
        }
        counts
            .into_iter()
            .max_by(|a, b| (a.0 .1.len(), a.1).cmp(&(b.0 .1.len(), b.1)))
            .map(|(s, _)| s)
    };

    let mut round = 1u64;
    loop {
        let sig = pick(&data);
        let accepted = sig.as_ref().map_or(0, |s| data.iter().flatten().filter(|d| &d.signature == s).count());
        if accepted >= SAMPLE_FLOOR || round > 4 {
            break;
        }
        let extra = sampling::unit_vectors(n, DEFAULT_SAMPLES, family.seed.wrapping_add(round));
        data.extend(extra.par_iter().map(|x| analyse_sample(model, x, gap)).collect::<Vec<_>>());
        xs.extend(extra);
        round += 1;
    }
    let sig = pick(&data).unwrap_or((n, Vec::new()));
    let acc: Vec<&SampleData> = data.iter().flatten().filter(|d| d.signature == sig).collect();
    if acc.len() < SAMPLE_FLOOR {
        return Err(Error::InsufficientSamples { accepted: acc.len(), required: SAMPLE_FLOOR });
    }
    let discarded = data.len() - acc.len();
    let nb = sig.1.len();

    let r_scale = acc.iter().map(|d| d.r0_norm).fold(0.0, f64::max);
    let vanish_tol = VANISHING_TOL * r_scale.max(1e-300);

    let lam_series: Vec<Vec<f64>> = (0..nb).map(|k| acc.iter().map(|d| d.lambdas[k]).collect()).collect();
    let mean_lambdas: Vec<f64> = lam_series.iter().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
    let lambda_constant: Vec<bool> = lam_series.iter().map(|v| relative_std(v) < CONSTANCY_TOL).collect();
    let mut pair_constant = Vec::new();
    for k in 0..nb {
        for l in k + 1..nb {
            let diff: Vec<f64> = acc.iter().map(|d| d.lambdas[l] - d.lambdas[k]).collect();
            let sum: Vec<f64> = acc.iter().map(|d| d.lambdas[l] + d.lambdas[k]).collect();
            pair_constant.push((k + 1, l + 1, relative_std(&diff) < CONSTANCY_TOL, relative_std(&sum) < CONSTANCY_TOL));
        }
    }

    let ncomp = acc[0].norms.len();
    let mut components = Vec::with_capacity(ncomp);
    let mut rbar_agrees = true;
    for c in 0..ncomp {
        let (kind, k, l, _, _) = acc[0].norms[c];
        let max_norm = acc.iter().map(|d| d.norms[c].3).fold(0.0, f64::max);
        let max_bar = acc.iter().map(|d| d.rbar_norms[c]).fold(0.0, f64::max);
        let lam = |i: usize| if i == 0 { 0.0 } else { mean_lambdas[i - 1] };
        let mu = match kind {
            ComponentKind::Kernel => 0.0,
            ComponentKind::Mixed => lam(l).powi(2),
            ComponentKind::Hermitian => (lam(l) - lam(k)).powi(2),
            ComponentKind::AntiHermitian => (lam(l) + lam(k)).powi(2),
        };
        let vanishes = max_norm < vanish_tol;
        let has_eigen = !(kind == ComponentKind::Kernel || (kind == ComponentKind::Hermitian && k == l));
        if has_eigen && vanishes != (max_bar < vanish_tol) {
            rbar_agrees = false;
        }
        components.push(ComponentSummary { kind, k, l, max_norm, vanishes, t_eigenvalue: mu / 4.0 });
    }
    let find = |kind: ComponentKind, k: usize, l: usize| {
        components.iter().find(|c| c.kind == kind && c.k == k && c.l == l).unwrap()
    };

    let mut failed = Vec::new();
    for k in 1..=nb {
        if !lambda_constant[k - 1]
            && !(find(ComponentKind::AntiHermitian, k, k).vanishes && find(ComponentKind::Mixed, 0, k).vanishes)
        {
            failed.push(format!("lambda_{k} varies but R^(0,{k}) or R^({k},{k})_(2,0) does not vanish"));
        }
    }
    for &(k, l, dc, sc) in &pair_constant {
        if !dc && !find(ComponentKind::Hermitian, k, l).vanishes {
            failed.push(format!("lambda_{l}-lambda_{k} varies but R^({k},{l})_(1,1) does not vanish"));
        }
        if !sc && !find(ComponentKind::AntiHermitian, k, l).vanishes {
            failed.push(format!("lambda_{l}+lambda_{k} varies but R^({k},{l})_(2,0) does not vanish"));
        }
    }

    let structure = EigenStructure {
        accepted: acc.len(),
        discarded,
        kernel_dim: sig.0,
        block_dims: sig.1.clone(),
        mean_lambdas,
        lambda_constant,
        pair_constant,
        components,
    };
    let ricci_zero = acc.iter().all(|d| d.ricci.abs() < vanish_tol);
    let eval_family = JacobiFamily { samples: xs, ..family.clone() };

    if !failed.is_empty() {
        return Ok(LjrVerdict {
            exists: false,
            polynomial: None,
            eigen_structure: structure,
            max_residual: f64::INFINITY,
            minimal: false,
            rbar_agrees,
            failed_conditions: failed,
        });
    }

    let mut mus: Vec<f64> = Vec::new();
    for c in &structure.components {
        if !c.vanishes && c.t_eigenvalue > 0.0 {
            let dup = mus.iter().any(|m| (m - c.t_eigenvalue).abs() <= 1e-6 * c.t_eigenvalue.max(*m));
            if !dup {
                mus.push(c.t_eigenvalue);
            }
        }
    }
    mus.sort_by(f64::total_cmp);
    let q = mus.iter().fold(Polynomial::one(), |p, &m| p.mul(&Polynomial::quadratic(m)));
    let res_tol = family.tol.residual;
    let mut with_lambda = r_scale > 0.0;
    if with_lambda && ricci_zero && check_ljr(&eval_family, &q) < res_tol {
        with_lambda = false;
    }
    let p = if with_lambda { q.mul(&Polynomial::monomial(1)) } else { q };
    let residual = check_ljr(&eval_family, &p);

    let mut factors: Vec<Polynomial> = mus.iter().map(|&m| Polynomial::quadratic(m)).collect();
    if with_lambda {
        factors.push(Polynomial::monomial(1));
    }
    let minimal = factors.iter().all(|f| {
        let (quot, _) = p.div_rem(f);
        check_ljr(&eval_family, &quot) > res_tol
    });

    Ok(LjrVerdict {
        exists: residual < res_tol,
        polynomial: Some(p),
        eigen_structure: structure,
        max_residual: residual,
        minimal,
        rbar_agrees,
        failed_conditions: Vec::new(),
    })
}

/// 𝒯_X on Sym²({X}⊥) in an orthonormal basis.
pub fn restricted_t_matrix(model: &InfinitesimalModel, x: &Vector) -> Mat {
    let t = model.tau_op(x);
    let basis = sym_basis(&orthogonal_complement(x));
    operator_matrix(&basis, |s| t_apply_with(&t, s))
}

/// Characteristic polynomial of 𝒯_X restricted to Sym²({X}⊥).
pub fn universal_jr(family: &JacobiFamily, x: &Vector) -> Polynomial {
    characteristic_polynomial(&restricted_t_matrix(&family.model, x))
}

/// ‖χ(𝒯_X)ℛ₀(X)‖ relative to ‖ℛ₀(X)‖·Σ|a_k|‖𝒯_X‖^k, χ = universal_jr at X.
pub fn universal_relation_residual(family: &JacobiFamily, x: &Vector) -> f64 {
    let t = restricted_t_matrix(&family.model, x);
    let p = characteristic_polynomial(&t);
    let series = family.series(x, p.coeffs().len() - 1);
    let rho = t.norm();
    let scale: f64 =
        p.coeffs().iter().enumerate().map(|(k, a)| a.abs() * rho.powi(k as i32)).sum::<f64>() * series[0].norm();
    if scale <= 1e-300 {
        return 0.0;
    }
    let mut acc = Mat::zeros(x.len(), x.len());
    for (a, r) in p.coeffs().iter().zip(&series) {
        acc += r * *a;
    }
    acc.norm() / scale
}

/// max |a(exp(t·ad h)X) − a(X)| over isotropy basis vectors h, a t-grid and sampled X.
pub fn isotropy_invariance_check<F>(triple: &ReductiveTriple, a: F, samples: usize, seed: u64) -> f64
where
    F: Fn(&Vector) -> f64 + Sync,
{
    let gens: Vec<Mat> = triple
        .h_basis
        .column_iter()
        .map(|h| {
            let ad = triple.g.ad(&h.into_owned());
            triple.m_basis.transpose() * &triple.b.matrix * ad * &triple.m_basis
        })
        .collect();
    let xs = sampling::unit_vectors(triple.dim_m(), samples, seed);
    let grid = [-1.0, -0.35, 0.5, 1.3];
    xs.par_iter()
        .map(|x| {
            let a0 = a(x);
            let mut worst = 0.0f64;
            for g in &gens {
                for &t in &grid {
                    let y = (g * t).exp() * x;
                    worst = worst.max((a(&y) - a0).abs());
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// A homogeneous polynomial of degree p on ℝⁿ with values in symmetric n×n
/// matrices, i.e. an element of Sym^p ⊗ Sym².
#[derive(Debug, Clone)]
pub struct SymTensorField {
    pub n: usize,
    pub degree: usize,
    pub monomials: Vec<Vec<usize>>,
    /// Matrix coefficient of x^α for each monomial α.
    pub coeffs: Vec<Mat>,
}

pub fn monomials(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, p: usize, i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n - 1 {
            cur[i] = p;
            out.push(cur.clone());
            cur[i] = 0;
            return;
        }
        for k in (0..=p).rev() {
            cur[i] = k;
            rec(n, p - k, i + 1, cur, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(n, p, 0, &mut vec![0; n], &mut out);
    out
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl SymTensorField {
    pub fn zero(n: usize, degree: usize) -> Self {
        let monomials = monomials(n, degree);
        let coeffs = vec![Mat::zeros(n, n); monomials.len()];
        SymTensorField { n, degree, monomials, coeffs }
    }

    pub fn eval(&self, x: &Vector) -> Mat {
        let mut out = Mat::zeros(self.n, self.n);
        for (a, c) in self.monomials.iter().zip(&self.coeffs) {
            let w: f64 = a.iter().enumerate().map(|(i, &e)| x[i].powi(e as i32)).product();
            out += c * w;
        }
        out
    }

    /// Tensor norm: Σ_α (α!/p!) ‖c_α‖_F².
    pub fn norm(&self) -> f64 {
        let pf = factorial(self.degree);
        self.monomials
            .iter()
            .zip(&self.coeffs)
            .map(|(a, c)| a.iter().map(|&e| factorial(e)).product::<f64>() / pf * c.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Recover the coefficients of a homogeneous degree-p matrix polynomial by
    /// polarization over integer combinations of basis vectors.
    pub fn from_polynomial_fn<F>(n: usize, p: usize, f: F) -> Self
    where
        F: Fn(&Vector) -> Mat + Sync,
    {
        let mons = monomials(n, p);
        let mut points: Vec<Vec<usize>> = Vec::new();
        for q in 0..=p {
            points.extend(monomials(n, q));
        }
        let values: HashMap<Vec<usize>, Mat> = points
            .par_iter()
            .map(|b| {
                let v = Vector::from_iterator(n, b.iter().map(|&e| e as f64));
                (b.clone(), f(&v))
            })
            .collect();
        let coeffs = mons
            .par_iter()
            .map(|a| {
                // F(e^α) = (1/p!) Σ_{β≤α} (−1)^{p−|β|} Π C(α_i,β_i) f(β).
                let mut acc = Mat::zeros(n, n);
                for b in sub_multi_indices(a) {
                    let size: usize = b.iter().sum();
                    let mult: f64 = a.iter().zip(&b).map(|(&ai, &bi)| binomial(ai, bi)).product();
                    let sign = if (p - size) % 2 == 0 { 1.0 } else { -1.0 };
                    acc += &values[&b] * (sign * mult);
                }
                let af: f64 = a.iter().map(|&e| factorial(e)).product();
                // coefficient of x^α is (p!/α!) F(e^α).
                acc / af
            })
            .collect();
        SymTensorField { n, degree: p, monomials: mons, coeffs }
    }

    fn sym_index(&self) -> (usize, Vec<(usize, usize)>) {
        let pairs: Vec<(usize, usize)> = (0..self.n).flat_map(|a| (a..self.n).map(move |b| (a, b))).collect();
        (pairs.len(), pairs)
    }

    /// Orthonormal coordinates for the tensor norm.
    fn to_coords(&self) -> Vec<f64> {
        let (_, pairs) = self.sym_index();
        let pf = factorial(self.degree);
        let mut out = Vec::with_capacity(self.monomials.len() * pairs.len());
        for (a, c) in self.monomials.iter().zip(&self.coeffs) {
            let w = (a.iter().map(|&e| factorial(e)).product::<f64>() / pf).sqrt();
            for &(i, j) in &pairs {
                let s = if i == j { 1.0 } else { std::f64::consts::SQRT_2 };
                out.push(c[(i, j)] * w * s);
            }
        }
        out
    }

    fn from_coords(&self, u: &[f64]) -> Self {
        let (ns, pairs) = self.sym_index();
        let pf = factorial(self.degree);
        let coeffs = self
            .monomials
            .iter()
            .enumerate()
            .map(|(m, a)| {
                let w = (a.iter().map(|&e| factorial(e)).product::<f64>() / pf).sqrt();
                let mut c = Mat::zeros(self.n, self.n);
                for (s, &(i, j)) in pairs.iter().enumerate() {
                    let sc = if i == j { 1.0 } else { std::f64::consts::SQRT_2 };
                    let v = u[m * ns + s] / (w * sc);
                    c[(i, j)] = v;
                    c[(j, i)] = v;
                }
                c
            })
            .collect();
        SymTensorField { coeffs, ..self.clone() }
    }

    /// Sparse matrix of all metric contractions in orthonormal coordinates.
    fn contraction_triplets(&self) -> (usize, Vec<(usize, usize, f64)>) {
        let n = self.n;
        let p = self.degree;
        let (ns, pairs) = self.sym_index();
        let sidx = |a: usize, b: usize| {
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            pairs.iter().position(|&q| q == (a, b)).unwrap()
        };
        let index = |mons: &[Vec<usize>]| -> HashMap<Vec<usize>, usize> {
            mons.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect()
        };
        let lower2 = if p >= 2 { monomials(n, p - 2) } else { Vec::new() };
        let lower1 = if p >= 1 { monomials(n, p - 1) } else { Vec::new() };
        let (i2, i1) = (index(&lower2), index(&lower1));
        let lap_off = 0;
        let div_off = lower2.len() * ns;
        let tr_off = div_off + lower1.len() * n;
        let rows = tr_off + self.monomials.len();
        let pf = factorial(p);
        let mut trip = Vec::new();
        for (m, a) in self.monomials.iter().enumerate() {
            let w = (a.iter().map(|&e| factorial(e)).product::<f64>() / pf).sqrt();
            let scale = |s: usize| if pairs[s].0 == pairs[s].1 { 1.0 } else { std::f64::consts::SQRT_2 };
            for i in 0..n {
                if a[i] >= 2 {
                    let mut b = a.clone();
                    b[i] -= 2;
                    let r = i2[&b];
                    let c = (a[i] * (a[i] - 1)) as f64;
                    for s in 0..ns {
                        trip.push((lap_off + r * ns + s, m * ns + s, c / (w * scale(s))));
                    }
                }
                if a[i] >= 1 {
                    let mut b = a.clone();
                    b[i] -= 1;
                    let r = i1[&b];
                    for j in 0..n {
                        let s = sidx(i, j);
                        trip.push((div_off + r * n + j, m * ns + s, a[i] as f64 / (w * scale(s))));
                    }
                }
            }
            for i in 0..n {
                let s = sidx(i, i);
                trip.push((tr_off + m, m * ns + s, 1.0 / w));
            }
        }
        (rows, trip)
    }

    /// Norm of all metric contractions relative to the tensor norm.
    pub fn contraction_residual(&self) -> f64 {
        let (rows, trip) = self.contraction_triplets();
        let u = self.to_coords();
        let cu = sparse_mul(rows, &trip, &u);
        norm(&cu) / norm(&u).max(1e-300)
    }
}

fn sub_multi_indices(a: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::with_capacity(a.len())];
    for &ai in a {
        let mut next = Vec::with_capacity(out.len() * (ai + 1));
        for b in &out {
            for k in 0..=ai {
                let mut c = b.clone();
                c.push(k);
                next.push(c);
            }
        }
        out = next;
    }
    out
}

fn sparse_mul(rows: usize, trip: &[(usize, usize, f64)], u: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; rows];
    for &(r, c, v) in trip {
        out[r] += v * u[c];
    }
    out
}

fn sparse_mul_t(cols: usize, trip: &[(usize, usize, f64)], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for &(r, c, v) in trip {
        out[c] += v * y[r];
    }
    out
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Orthogonal projection onto the joint kernel of all metric contractions,
/// computed by CGLS on min ‖Cᵀy − T‖.
pub fn trace_free_part(t: &SymTensorField) -> Result<SymTensorField> {
    let (rows, trip) = t.contraction_triplets();
    let b = t.to_coords();
    let nb = norm(&b);
    if nb == 0.0 {
        return Ok(t.clone());
    }
    let cols = b.len();
    let mut r = b.clone();
    let mut s = sparse_mul(rows, &trip, &r);
    let s0 = norm(&s);
    let mut p = s.clone();
    let mut gamma: f64 = s.iter().map(|x| x * x).sum();
    let max_iter = 20 * rows.max(10);
    let mut it = 0;
    while gamma.sqrt() > 1e-14 * s0.max(nb) && it < max_iter {
        let q = sparse_mul_t(cols, &trip, &p);
        let qq: f64 = q.iter().map(|x| x * x).sum();
        if qq == 0.0 {
            break;
        }
        let alpha = gamma / qq;
        for (ri, qi) in r.iter_mut().zip(&q) {
            *ri -= alpha * qi;
        }
        s = sparse_mul(rows, &trip, &r);
        let gn: f64 = s.iter().map(|x| x * x).sum();
        let beta = gn / gamma;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = si + beta * *pi;
        }
        gamma = gn;
        it += 1;
    }
    let out = t.from_coords(&r);
    let res = out.contraction_residual() * norm(&r) / nb;
    if res > 1e-8 {
        return Err(Error::Postcondition(format!("trace-free projection residual {res:e}")));
    }
    Ok(out)
}

/// ‖ℛ°_{d+1}‖/‖ℛ_{d+1}‖, with ℛ_{d+1} recovered as a full tensor by polarization.
/// `samples` random points validate the reconstruction.
pub fn verify_twistor(family: &JacobiFamily, d: usize, samples: usize) -> Result<f64> {
    if d > 5 {
        return Err(Error::PolarizationRankDeficient(d as f64));
    }
    let n = family.dim();
    let k = d + 1;
    let p = k + 2;
    let field = SymTensorField::from_polynomial_fn(n, p, |x| scd(family, x, k));
    let mut worst = 0.0f64;
    for x in sampling::unit_vectors(n, samples, family.seed ^ 0x7a1) {
        let direct = scd(family, &x, k);
        let err = (field.eval(&x) - &direct).norm() / direct.norm().max(1.0);
        worst = worst.max(err);
    }
    if worst > 1e-7 {
        return Err(Error::PolarizationRankDeficient(worst));
    }
    let total = field.norm();
    if total <= 1e-12 {
        return Ok(0.0);
    }
    Ok(trace_free_part(&field)?.norm() / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::su;
    use crate::reductive::{build_triple, to_model, unit};
    use proptest::prelude::*;

    fn s3_model() -> InfinitesimalModel {
        let g = su(2);
        let b = g.trace_form(-0.5, "b");
        to_model(&build_triple(g.algebra.clone(), Mat::zeros(3, 0), b).unwrap())
    }

    fn s2_model() -> (ReductiveTriple, InfinitesimalModel) {
        let g = su(2);
        let b = g.trace_form(-0.5, "b");
        let t = build_triple(g.algebra.clone(), Mat::from_column_slice(3, 1, &[0.0, 0.0, 1.0]), b).unwrap();
        let m = to_model(&t);
        (t, m)
    }

    /// Synthetic model: the 6-dim torsion Re(dz₁₂₃) with R̄ = 0.
    fn nk_like() -> InfinitesimalModel {
        let mut f = crate::liealg::AltForm::zero(6, 3);
        for (idx, v) in [([0, 2, 4], 1.0), ([0, 3, 5], -1.0), ([1, 2, 5], -1.0), ([1, 3, 4], -1.0)] {
            f.set_alternating(&idx, v);
        }
        InfinitesimalModel::from_fns(6, |i, j, k| f.get(&[i, j, k]), |_, _, _, _| 0.0).unwrap()
    }

    #[test]
    fn t_apply_basics() {
        let m = s3_model();
        let x = Vector::from_vec(vec![0.3, -0.4, 0.5]);
        assert!(t_apply(&m, &x, &Mat::identity(3, 3)).amax() < 1e-15);
        let t = m.tau_op(&x);
        assert!(t_apply(&m, &x, &(&t * &t)).amax() < 1e-15);
        let s = Mat::from_fn(3, 3, |i, j| (i + j) as f64);
        let out = t_apply(&m, &x, &s);
        assert!((&out - out.transpose()).amax() < 1e-14);
        assert!(out.trace().abs() < 1e-14);
    }

    #[test]
    fn nilpotency_polynomial_of_t_on_sym2() {
        let m = nk_like();
        let x = unit(6, 0);
        let t = m.tau_op(&x);
        let basis = sym_basis(&Mat::identity(6, 6));
        let op = operator_matrix(&basis, |s| t_apply_with(&t, s));
        // The minimal polynomial divides the characteristic polynomial and
        // has the distinct roots of it; compare root sets instead.
        let p = Polynomial::new(vec![0.0, 0.25, 0.0, 1.25, 0.0, 1.0]);
        assert!(crate::algebra::evaluate_polynomial_at_operator(&p, &op).amax() < 1e-12);
        for drop in [Polynomial::monomial(1), Polynomial::quadratic(0.25), Polynomial::quadratic(1.0)] {
            let (q, _) = p.div_rem(&drop);
            assert!(crate::algebra::evaluate_polynomial_at_operator(&q, &op).amax() > 1e-3);
        }
    }

    #[test]
    fn eigenvalue_quartering() {
        let m = nk_like();
        for x in sampling::unit_vectors(6, 5, 11) {
            let tau = m.tau_op(&x);
            let spec = skew_spectral_decomposition(&tau, 1e-6).unwrap();
            let basis = sym_basis(&Mat::identity(6, 6));
            let op = operator_matrix(&basis, |s| t_apply_with(&tau, s));
            let (mut got, _) = crate::algebra::sorted_symmetric_eigen(&(-(&op * &op)));
            got.retain(|v| *v > 1e-10);
            // Predicted from the spectrum with multiplicities.
            let lam = spec.lambdas();
            let d0 = spec.zero_space.ncols();
            let dims: Vec<usize> = spec.blocks.iter().map(|b| b.basis.ncols()).collect();
            let mut pred = Vec::new();
            for (k, &l) in lam.iter().enumerate() {
                for _ in 0..d0 * dims[k] {
                    pred.push(l * l / 4.0);
                }
                // (2,0) part of the diagonal block: dimension dims/2·(dims/2+1).
                let h = dims[k] / 2;
                for _ in 0..h * (h + 1) {
                    pred.push(l * l);
                }
                for (j, &l2) in lam.iter().enumerate().skip(k + 1) {
                    let cnt = dims[k] * dims[j] / 2;
                    for _ in 0..cnt {
                        pred.push((l2 - l).powi(2) / 4.0);
                        pred.push((l2 + l).powi(2) / 4.0);
                    }
                }
            }
            pred.sort_by(f64::total_cmp);
            assert_eq!(got.len(), pred.len());
            for (a, b) in got.iter().zip(&pred) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn component_split_identity() {
        let m = nk_like();
        let spec = skew_spectral_decomposition(&m.tau_op(&unit(6, 0)), 1e-6).unwrap();
        let split = component_split(&spec, &Mat::identity(6, 6));
        assert!(split.sum_residual < 1e-14 && split.eigen_residual < 1e-14);
        for c in &split.components {
            let diag = c.kind == ComponentKind::Kernel || (c.kind == ComponentKind::Hermitian && c.k == c.l);
            assert_eq!(c.matrix.norm() > 1e-12, diag);
        }
    }

    #[test]
    fn symmetric_space_relations() {
        let (t, m) = s2_model();
        let fam = JacobiFamily::new(m);
        let x = Vector::from_vec(vec![0.6, 0.8]);
        assert!(scd(&fam, &x, 1).amax() < 1e-15);
        assert_eq!(check_ljr(&fam, &Polynomial::monomial(1)), 0.0);
        let v = minimal_ljr(&fam).unwrap();
        assert!(v.exists);
        assert_eq!(v.polynomial.unwrap().coeffs(), &[0.0, 1.0]);
        assert_eq!(verify_twistor(&fam, 0, 3).unwrap(), 0.0);
        assert!(isotropy_invariance_check(&t, |x| x.norm_squared(), 5, 1) < 1e-12);
    }

    #[test]
    fn round_sphere_group_relation() {
        let fam = JacobiFamily::new(s3_model());
        let v = minimal_ljr(&fam).unwrap();
        assert!(v.exists && v.minimal, "{v:?}");
        let p = v.polynomial.unwrap();
        // τ_X = c·(rotation on X⊥) and ℛ₀(X) ∝ id on X⊥: ℛ₁ = 0.
        assert_eq!(p.degree(), Some(1));
    }

    #[test]
    fn universal_relation_on_volume_torsion() {
        let fam = JacobiFamily::new(s3_model());
        for x in sampling::unit_vectors(3, 4, 5) {
            let p = universal_jr(&fam, &x);
            assert_eq!(p.degree(), Some(3));
            assert!(p.coeff(0).abs() < 1e-12 && p.coeff(2).abs() < 1e-12);
            // Eigenvalue oracle: 𝒯_X on Sym²(X⊥) has eigenvalues 0, ±iτ for |τ_X| = τ.
            let t = fam.model.tau_op(&x);
            let lam = (-(&t * &t)).trace().sqrt() / std::f64::consts::SQRT_2;
            let oracle = Polynomial::new(vec![0.0, lam * lam, 0.0, 1.0]);
            assert!(p.approx_eq(&oracle, 1e-12));
            assert!(apply_relation(&fam.model, &p, &x).amax() < 1e-12);
        }
    }

    #[test]
    fn nk_like_universal_relation_odd_coefficients() {
        let fam = JacobiFamily::new(nk_like());
        let x = sampling::unit_vector(&mut sampling::rng(3), 6);
        let p = universal_jr(&fam, &x);
        assert_eq!(p.degree(), Some(15));
        for k in (0..=15).filter(|k| k % 2 == 0) {
            assert!(p.coeff(k).abs() < 1e-10, "coefficient {k} = {}", p.coeff(k));
        }
    }

    #[test]
    fn isotropy_control_case() {
        let (t, _) = s2_model();
        assert!(isotropy_invariance_check(&t, |x| x[0], 5, 1) > 1e-2);
    }

    #[test]
    fn trace_free_kills_metric_terms() {
        let n = 3;
        let s0 = Mat::from_fn(n, n, |i, j| 1.0 + (i * j) as f64);
        let pure = SymTensorField::from_polynomial_fn(n, 2, |x| &s0 * x.norm_squared());
        assert!(trace_free_part(&pure).unwrap().norm() < 1e-10 * pure.norm());
        let q = Vector::from_vec(vec![1.0, -2.0, 0.5]);
        let ident = SymTensorField::from_polynomial_fn(n, 2, |x| Mat::identity(n, n) * x.dot(&q).powi(2));
        assert!(trace_free_part(&ident).unwrap().norm() < 1e-10 * ident.norm());
        // x ⊙ v terms, v linear in x.
        let sym = SymTensorField::from_polynomial_fn(n, 2, |x| {
            let v = Vector::from_vec(vec![x[1], x[2], x[0]]);
            x * v.transpose() + v * x.transpose()
        });
        assert!(trace_free_part(&sym).unwrap().norm() < 1e-10 * sym.norm());
    }

    #[test]
    fn trace_free_idempotent() {
        let n = 3;
        let t = SymTensorField::from_polynomial_fn(n, 3, |x| {
            let v = Vector::from_vec(vec![x[0] * x[1], x[2] * x[2] - x[0] * x[1], x[0] * x[2]]);
            let w = Vector::from_vec(vec![1.0, x[1], -x[2]]);
            &v * w.transpose() + &w * v.transpose()
        });
        let a = trace_free_part(&t).unwrap();
        assert!(a.norm() > 1e-3);
        assert!(a.contraction_residual() < 1e-9);
        let b = trace_free_part(&a).unwrap();
        let diff: f64 = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-10);
        // T − T° is orthogonal to T°.
        let d = SymTensorField { coeffs: t.coeffs.iter().zip(&a.coeffs).map(|(x, y)| x - y).collect(), ..t.clone() };
        let (u1, u2) = (a.to_coords(), d.to_coords());
        let ip: f64 = u1.iter().zip(&u2).map(|(x, y)| x * y).sum();
        assert!(ip.abs() < 1e-10 * t.norm().powi(2));
    }

    #[test]
    fn polarization_reconstructs() {
        let fam = JacobiFamily::new(nk_like());
        let f = SymTensorField::from_polynomial_fn(6, 3, |x| scd(&fam, x, 1));
        for x in sampling::unit_vectors(6, 4, 2) {
            assert!((f.eval(&x) - scd(&fam, &x, 1)).amax() < 1e-10);
        }
        assert!(matches!(verify_twistor(&fam, 6, 1), Err(Error::PolarizationRankDeficient(_))));
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials(3, 2).len(), 6);
        assert_eq!(monomials(6, 7).len(), 792);
        assert_eq!(sub_multi_indices(&[2, 0, 1]).len(), 6);
    }

    proptest! {
        #[test]
        fn homogeneity(c in prop::sample::select(vec![2.0, -1.0, 0.5]), seed in 0u64..200) {
            let fam = JacobiFamily::new(nk_like());
            let x = sampling::unit_vector(&mut sampling::rng(seed), 6);
            let a = fam.series(&x, 3);
            let b = fam.series(&(&x * c), 3);
            for (k, (ak, bk)) in a.iter().zip(&b).enumerate() {
                let scale: f64 = c.powi(k as i32 + 2);
                prop_assert!((bk - ak * scale).norm() <= 1e-10 * (ak.norm() * scale.abs()).max(1e-12));
            }
        }

        #[test]
        fn t_apply_trace_free(seed in 0u64..500) {
            let m = nk_like();
            let mut r = sampling::rng(seed);
            let x = sampling::gaussian_vector(&mut r, 6);
            let g = Mat::from_fn(6, 6, |_, _| sampling::gaussian_vector(&mut r, 1)[0]);
            let s = &g + g.transpose();
            let out = t_apply(&m, &x, &s);
            prop_assert!(out.trace().abs() < 1e-12 * s.norm() * x.norm());
            prop_assert!((&out - out.transpose()).amax() < 1e-12 * s.norm() * x.norm());
        }
    }

    #[test]
    fn universal_relation_annihilates_jacobi_operator() {
        let fam = JacobiFamily::new(nk_like());
        for x in sampling::unit_vectors(6, 8, 4) {
            assert!(universal_relation_residual(&fam, &x) < 1e-10);
        }
        let (_, s2) = s2_model();
        let fam = JacobiFamily::new(s2);
        assert!(universal_relation_residual(&fam, &unit(2, 0)) < 1e-12);
    }
}
