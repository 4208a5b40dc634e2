//! Naturally reductive triples, their infinitesimal models (torsion and
//! canonical curvature in a B-orthonormal basis of m), curvature quantities,
//! and the fibered extension B ⊕ (1/s)B|h⊥.

use rayon::prelude::*;

use crate::algebra::{gram_schmidt, null_space, orthonormalize, Mat, Vector};
use crate::error::{Error, Result};
use crate::liealg::{orthocomplement, projector, AltForm, BilinearForm, LieAlgebra, CLOSURE_TOL};
use crate::sampling;

const INVARIANCE_TOL: f64 = 1e-9;
const MODEL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ReductiveTriple {
    pub g: LieAlgebra,
    pub h_basis: Mat,
    pub b: BilinearForm,
    pub m_basis: Mat,
}

impl ReductiveTriple {
    pub fn dim_m(&self) -> usize {
        self.m_basis.ncols()
    }

    /// Coordinates of the m-component of v in the orthonormal m basis.
    pub fn m_coords(&self, v: &Vector) -> Vector {
        self.m_basis.transpose() * (&self.b.matrix * v)
    }

    pub fn to_g(&self, x: &Vector) -> Vector {
        &self.m_basis * x
    }

    pub fn h_part(&self, v: &Vector) -> Vector {
        v - &self.m_basis * self.m_coords(v)
    }

    /// max relative size of the m-part of [h,h] and the h-part of [h,m].
    pub fn reductivity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        let hs: Vec<Vector> = self.h_basis.column_iter().map(|c| c.into_owned()).collect();
        let ms: Vec<Vector> = self.m_basis.column_iter().map(|c| c.into_owned()).collect();
        for (i, x) in hs.iter().enumerate() {
            for y in &hs[i + 1..] {
                let br = self.g.bracket_unchecked(x, y);
                worst = worst.max(self.m_coords(&br).norm() / (x.norm() * y.norm()));
            }
            for y in &ms {
                let br = self.g.bracket_unchecked(x, y);
                worst = worst.max(self.h_part(&br).norm() / (x.norm() * y.norm()));
            }
        }
        worst
    }
}

pub fn build_triple(g: LieAlgebra, h_basis: Mat, b: BilinearForm) -> Result<ReductiveTriple> {
    check_form(&g, &b)?;
    check_subalgebra(&g, &h_basis)?;
    let m = orthocomplement(&g, &h_basis, &b)?;
    finish_triple(g, h_basis, b, m)
}

/// Same as [`build_triple`] but with a prescribed m basis, validated to be
/// B-orthonormal, B-orthogonal to h and complementary.
pub fn build_triple_with_m(
    g: LieAlgebra,
    h_basis: Mat,
    b: BilinearForm,
    m_basis: Mat,
) -> Result<ReductiveTriple> {
    check_form(&g, &b)?;
    check_subalgebra(&g, &h_basis)?;
    if h_basis.ncols() + m_basis.ncols() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim() - h_basis.ncols(),
            got: m_basis.ncols(),
        });
    }
    let cross = b.restrict_pair(&h_basis, &m_basis);
    if cross.ncols() > 0 && cross.nrows() > 0 && cross.amax() > 1e-9 {
        return Err(Error::Postcondition("m basis not B-orthogonal to h".into()));
    }
    finish_triple(g, h_basis, b, m_basis)
}

fn check_form(g: &LieAlgebra, b: &BilinearForm) -> Result<()> {
    if b.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: b.dim() });
    }
    let inv = b.invariance_residual(g);
    if inv > INVARIANCE_TOL {
        return Err(Error::NonInvariantForm(inv));
    }
    if !b.is_nondegenerate() {
        return Err(Error::DegenerateRestriction);
    }
    Ok(())
}

fn check_subalgebra(g: &LieAlgebra, h: &Mat) -> Result<()> {
    if h.nrows() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: h.nrows() });
    }
    let res = g.closure_residual(h);
    if res > CLOSURE_TOL {
        return Err(Error::NotReductive(res));
    }
    Ok(())
}

fn finish_triple(g: LieAlgebra, h_basis: Mat, b: BilinearForm, m_basis: Mat) -> Result<ReductiveTriple> {
    let gram = b.restrict(&m_basis);
    let n = m_basis.ncols();
    if n > 0 {
        let (vals, _) = crate::algebra::sorted_symmetric_eigen(&gram);
        if vals[0] <= 1e-10 {
            return Err(Error::IndefiniteMetric(vals[0]));
        }
        let dev = (&gram - Mat::identity(n, n)).amax();
        if dev > 1e-9 {
            return Err(Error::Postcondition(format!("m basis not B-orthonormal ({dev:e})")));
        }
    }
    let t = ReductiveTriple { g, h_basis, b, m_basis };
    let res = t.reductivity_residual();
    if res > CLOSURE_TOL {
        return Err(Error::NotReductive(res));
    }
    Ok(t)
}

impl BilinearForm {
    pub fn restrict_pair(&self, a: &Mat, b: &Mat) -> Mat {
        a.transpose() * &self.matrix * b
    }
}

/// Torsion 3-form and canonical curvature on a Euclidean space.
#[derive(Debug, Clone, PartialEq)]
pub struct InfinitesimalModel {
    n: usize,
    tau: Vec<f64>,
    rbar: Vec<f64>,
}

impl InfinitesimalModel {
    /// `tau[i,j,k] = ⟨τ(e_i,e_j),e_k⟩`, `rbar[i,j,k,l] = ⟨R̄(e_i,e_j)e_k,e_l⟩`.
    pub fn new(n: usize, tau: Vec<f64>, rbar: Vec<f64>) -> Result<Self> {
        if tau.len() != n * n * n {
            return Err(Error::DimensionMismatch { expected: n * n * n, got: tau.len() });
        }
        if rbar.len() != n.pow(4) {
            return Err(Error::DimensionMismatch { expected: n.pow(4), got: rbar.len() });
        }
        let m = InfinitesimalModel { n, tau, rbar };
        let (dt, dr) = m.symmetry_defects();
        if dt > MODEL_TOL || dr > MODEL_TOL {
            return Err(Error::Input(format!(
                "model symmetries violated (torsion {dt:e}, curvature {dr:e})"
            )));
        }
        Ok(m)
    }

    pub fn from_fns<T, R>(n: usize, tau: T, rbar: R) -> Result<Self>
    where
        T: Fn(usize, usize, usize) -> f64,
        R: Fn(usize, usize, usize, usize) -> f64,
    {
        let mut t = vec![0.0; n * n * n];
        let mut r = vec![0.0; n.pow(4)];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    t[(i * n + j) * n + k] = tau(i, j, k);
                    for l in 0..n {
                        r[((i * n + j) * n + k) * n + l] = rbar(i, j, k, l);
                    }
                }
            }
        }
        Self::new(n, t, r)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn tau(&self, i: usize, j: usize, k: usize) -> f64 {
        self.tau[(i * self.n + j) * self.n + k]
    }

    pub fn rbar(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.rbar[((i * self.n + j) * self.n + k) * self.n + l]
    }

    /// Relative antisymmetry defects of τ and of R̄.
    pub fn symmetry_defects(&self) -> (f64, f64) {
        let n = self.n;
        let st = self.tau.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let sr = self.rbar.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let mut dt = 0.0f64;
        let mut dr = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let t = self.tau(i, j, k);
                    dt = dt.max((t + self.tau(j, i, k)).abs()).max((t + self.tau(i, k, j)).abs());
                    for l in 0..n {
                        let r = self.rbar(i, j, k, l);
                        dr = dr.max((r + self.rbar(j, i, k, l)).abs()).max((r + self.rbar(i, j, l, k)).abs());
                    }
                }
            }
        }
        (dt / st, dr / sr)
    }

    /// τ_X as a matrix: τ_X e_k = Σ_j τ(X, e_k, e_j) e_j.
    pub fn tau_op(&self, x: &Vector) -> Mat {
        let n = self.n;
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for k in 0..n {
                for j in 0..n {
                    m[(j, k)] += x[i] * self.tau(i, k, j);
                }
            }
        }
        m
    }

    pub fn tau_pair(&self, x: &Vector, y: &Vector) -> Vector {
        self.tau_op(x) * y
    }

    /// R̄(x, y) as a skew matrix.
    pub fn rbar_op(&self, x: &Vector, y: &Vector) -> Mat {
        let n = self.n;
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for k in 0..n {
                    for l in 0..n {
                        m[(l, k)] += w * self.rbar(i, j, k, l);
                    }
                }
            }
        }
        m
    }

    pub fn torsion_form(&self) -> AltForm {
        AltForm { n: self.n, degree: 3, values: self.tau.clone() }
    }

    pub fn torsion_norm(&self) -> f64 {
        self.tau.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn curvature_norm(&self) -> f64 {
        self.rbar.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// max ‖R̄(e_i,e_j)⋆τ‖ relative to ‖R̄‖·‖τ‖.
    pub fn holonomy_residual(&self) -> f64 {
        let n = self.n;
        let t = self.torsion_form();
        let (rn, tn) = (self.curvature_norm(), self.torsion_norm());
        if tn <= 1e-12 * rn.max(1.0) {
            return 0.0;
        }
        let scale = (rn * tn).max(1e-300);
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let r = self.rbar_op(&unit(n, i), &unit(n, j));
                worst = worst.max(t.act(&r).norm() / scale);
            }
        }
        worst
    }

    /// Model of the same space with B replaced by t·B.
    pub fn rescaled(&self, t: f64) -> Self {
        assert!(t > 0.0, "metric rescaling must be positive");
        InfinitesimalModel {
            n: self.n,
            tau: self.tau.iter().map(|v| v / t.sqrt()).collect(),
            rbar: self.rbar.iter().map(|v| v / t).collect(),
        }
    }

    /// The same tensors expressed in the orthonormal basis given by the columns of q.
    pub fn in_basis(&self, q: &Mat) -> Self {
        let n = self.n;
        let cols: Vec<Vector> = q.column_iter().map(|c| c.into_owned()).collect();
        let mut tau = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                let v = self.tau_pair(&cols[i], &cols[j]);
                for k in 0..n {
                    tau[(i * n + j) * n + k] = v.dot(&cols[k]);
                }
            }
        }
        let mut rbar = vec![0.0; n.pow(4)];
        for i in 0..n {
            for j in 0..n {
                let r = self.rbar_op(&cols[i], &cols[j]);
                for k in 0..n {
                    let v = &r * &cols[k];
                    for l in 0..n {
                        rbar[((i * n + j) * n + k) * n + l] = v.dot(&cols[l]);
                    }
                }
            }
        }
        InfinitesimalModel { n, tau, rbar }
    }
}

pub fn unit(n: usize, i: usize) -> Vector {
    crate::liealg::unit(n, i)
}

/// τ(x,y) = −[x,y]_m and R̄(x,y) = −ad([x,y]_h) on m, in the orthonormal m basis.
pub fn to_model(t: &ReductiveTriple) -> InfinitesimalModel {
    let n = t.dim_m();
    let ms: Vec<Vector> = t.m_basis.column_iter().map(|c| c.into_owned()).collect();
    let mut tau = vec![0.0; n * n * n];
    let mut rbar = vec![0.0; n.pow(4)];
    for i in 0..n {
        for j in i + 1..n {
            let br = t.g.bracket_unchecked(&ms[i], &ms[j]);
            let mc = t.m_coords(&br);
            let h = &br - &t.m_basis * &mc;
            for k in 0..n {
                tau[(i * n + j) * n + k] = -mc[k];
                tau[(j * n + i) * n + k] = mc[k];
                let r = t.m_coords(&t.g.bracket_unchecked(&h, &ms[k]));
                for l in 0..n {
                    rbar[((i * n + j) * n + k) * n + l] = -r[l];
                    rbar[((j * n + i) * n + k) * n + l] = r[l];
                }
            }
        }
    }
    InfinitesimalModel { n, tau, rbar }
}

/// ℛ₀(X): U ↦ R̄(U,X)X − ¼τ_X²U.
pub fn jacobi_operator(model: &InfinitesimalModel, x: &Vector) -> Mat {
    let t = model.tau_op(x);
    rbar_jacobi(model, x) - &t * &t * 0.25
}

/// ℛ̄(X): U ↦ R̄(U,X)X.
pub fn rbar_jacobi(model: &InfinitesimalModel, x: &Vector) -> Mat {
    let n = model.dim();
    let mut m = Mat::zeros(n, n);
    for k in 0..n {
        for a in 0..n {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..n {
                let w = x[a] * x[b];
                if w == 0.0 {
                    continue;
                }
                for l in 0..n {
                    m[(l, k)] += w * model.rbar(k, a, b, l);
                }
            }
        }
    }
    m
}

fn orthonormal_pair(x: &Vector, y: &Vector) -> Result<(Vector, Vector)> {
    let nx = x.norm();
    if nx == 0.0 {
        return Err(Error::DegeneratePlane);
    }
    let e1 = x / nx;
    let y2 = y - &e1 * e1.dot(y);
    let ny = y2.norm();
    if ny <= 1e-10 * y.norm().max(1e-300) || ny == 0.0 {
        return Err(Error::DegeneratePlane);
    }
    Ok((e1, y2 / ny))
}

pub fn sectional_curvature(model: &InfinitesimalModel, x: &Vector, y: &Vector) -> Result<f64> {
    let (e1, e2) = orthonormal_pair(x, y)?;
    Ok((jacobi_operator(model, &e2) * &e1).dot(&e1))
}

/// Ric(x, x).
pub fn ricci(model: &InfinitesimalModel, x: &Vector) -> f64 {
    jacobi_operator(model, x).trace()
}

pub fn scalar_curvature(model: &InfinitesimalModel) -> f64 {
    let n = model.dim();
    (0..n).map(|i| ricci(model, &unit(n, i))).sum()
}

/// B([x,y]_h, [x,y]_h) + ¼|τ(x,y)|² for an orthonormalized pair.
pub fn normal_sectional(t: &ReductiveTriple, x: &Vector, y: &Vector) -> Result<f64> {
    let (e1, e2) = orthonormal_pair(x, y)?;
    let br = t.g.bracket_unchecked(&t.to_g(&e1), &t.to_g(&e2));
    let h = t.h_part(&br);
    let tau = t.m_coords(&br);
    Ok(t.b.eval(&h, &h) + 0.25 * tau.norm_squared())
}

fn check_complex_structure(j: &Mat) -> Result<()> {
    let n = j.nrows();
    let id = Mat::identity(n, n);
    let res = (j * j + &id).amax().max((j.transpose() * j - &id).amax());
    if res > 1e-9 {
        return Err(Error::NotComplexStructure(res));
    }
    Ok(())
}

/// H(X) = R(X,JX,JX,X)/‖X‖⁴.
pub fn holomorphic_sectional(model: &InfinitesimalModel, j: &Mat, x: &Vector) -> Result<f64> {
    check_complex_structure(j)?;
    let nx = x.norm();
    if nx == 0.0 {
        return Err(Error::DegeneratePlane);
    }
    let jx = j * x;
    Ok((jacobi_operator(model, &jx) * x).dot(x) / nx.powi(4))
}

/// The orthogonal complex structure J (up to sign) with JX ∈ ker τ_X for all X.
pub fn complex_structure_from_torsion(model: &InfinitesimalModel) -> Result<Mat> {
    let n = model.dim();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).collect();
    let basis: Vec<Mat> = pairs
        .iter()
        .map(|&(p, q)| {
            let mut m = Mat::zeros(n, n);
            m[(p, q)] = 1.0;
            m[(q, p)] = -1.0;
            m
        })
        .collect();
    // τ(a, J e_d, c) + τ(d, J e_a, c) = 0 for all a ≤ d, c.
    let rows = n * n * n;
    let mut sys = Mat::zeros(rows, basis.len());
    for (col, jm) in basis.iter().enumerate() {
        let mut r = 0;
        for a in 0..n {
            for d in 0..n {
                for c in 0..n {
                    let mut v = 0.0;
                    for b in 0..n {
                        v += model.tau(a, b, c) * jm[(b, d)] + model.tau(d, b, c) * jm[(b, a)];
                    }
                    sys[(r, col)] = v;
                    r += 1;
                }
            }
        }
    }
    let ker = null_space(&sys, 1e-10);
    if ker.ncols() != 1 {
        return Err(Error::NotComplexStructure(ker.ncols() as f64));
    }
    let mut j = Mat::zeros(n, n);
    for (c, m) in ker.column(0).iter().zip(&basis) {
        j += m * *c;
    }
    let sq = -(&j * &j).trace() / n as f64;
    if sq <= 0.0 {
        return Err(Error::NotComplexStructure(sq));
    }
    let j = j / sq.sqrt();
    check_complex_structure(&j)?;
    Ok(j)
}

/// Sampled verdicts on the four equivalent conditions for 6-dim nearly Kähler spaces.
#[derive(Debug, Clone)]
pub struct ChscReport {
    pub sectional_constant: bool,
    pub holomorphic_constant: bool,
    pub rjx_parallel: bool,
    pub torsion_symmetric: bool,
    pub sectional_spread: f64,
    pub holomorphic_spread: f64,
    pub rjx_residual: f64,
    pub torsion_residual: f64,
    pub holomorphic_mean: f64,
}

impl ChscReport {
    pub fn consistent(&self) -> bool {
        let v = [self.sectional_constant, self.holomorphic_constant, self.rjx_parallel, self.torsion_symmetric];
        v.iter().all(|&b| b == v[0])
    }
}

pub fn check_chsc_equivalences(
    model: &InfinitesimalModel,
    j: &Mat,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<ChscReport> {
    check_complex_structure(j)?;
    let n = model.dim();
    let mut rng = sampling::rng(seed);
    let mut ks = Vec::new();
    let mut hs = Vec::new();
    let mut rjx = 0.0f64;
    let mut c4 = 0.0f64;
    let mut scale = 1e-300f64;
    for _ in 0..samples {
        let x = sampling::unit_vector(&mut rng, n);
        let y = sampling::unit_vector(&mut rng, n);
        let jx = j * &x;
        ks.push(sectional_curvature(model, &x, &y)?);
        ks.push(sectional_curvature(model, &x, &jx)?);
        let h = holomorphic_sectional(model, j, &x)?;
        hs.push(h);
        let r = jacobi_operator(model, &x);
        let v = &r * &jx;
        rjx = rjx.max((&v - &jx * v.dot(&jx)).norm());
        // U ⊥ {X, JX}; compare ℛ(X) on U and on the normalized τ_X U.
        let q = orthonormalize(&Mat::from_columns(&[x.clone(), jx.clone(), y.clone()]), 1e-8);
        if q.ncols() == 3 {
            let u = q.column(2).into_owned();
            let tu = model.tau_op(&x) * &u;
            let nt = tu.norm_squared();
            if nt > 1e-12 {
                c4 = c4.max(((&r * &tu).dot(&tu) / nt - (&r * &u).dot(&u)).abs());
            }
        }
        scale = scale.max(r.amax());
    }
    let spread = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let t = tol * scale.max(1.0);
    let (sk, sh) = (spread(&ks), spread(&hs));
    Ok(ChscReport {
        sectional_constant: sk < t,
        holomorphic_constant: sh < t,
        rjx_parallel: rjx < t,
        torsion_symmetric: c4 < t,
        sectional_spread: sk,
        holomorphic_spread: sh,
        rjx_residual: rjx,
        torsion_residual: c4,
        holomorphic_mean: hs.iter().sum::<f64>() / hs.len().max(1) as f64,
    })
}

/// Result of the fibered extension: the new triple and the data needed to
/// compare it with the base model.
#[derive(Debug, Clone)]
pub struct FiberedExtension {
    pub triple: ReductiveTriple,
    pub s: f64,
    /// dim of the horizontal part p; m̂ = p ⊕ vertical in this order.
    pub base_dim: usize,
    pub fiber_dim: usize,
    /// B-orthonormal basis of h⊥ ⊂ k in g coordinates.
    pub fiber_basis: Mat,
    pub fiber_sign: f64,
    /// ρ_*(Z_i) = ad(Z_i)|_p in the base orthonormal basis.
    pub rho: Vec<Mat>,
}

/// One-dimensional fibers; verifies the torsion and curvature formulas of the
/// extension as a postcondition.
pub fn extend_fibered(base: &ReductiveTriple, h_normal: &Mat, s: f64) -> Result<FiberedExtension> {
    let ext = extend_fibered_general(base, h_normal, s)?;
    if ext.fiber_dim != 1 {
        return Err(Error::NotOneDimensional(ext.fiber_dim));
    }
    let (dt, dr) = fibered_formula_residuals(base, &ext);
    if dt > 1e-8 || dr > 1e-8 {
        return Err(Error::Postcondition(format!(
            "fibered torsion/curvature formulas off by {dt:e}/{dr:e}"
        )));
    }
    Ok(ext)
}

/// The construction for fibers of any dimension (no formula check).
pub fn extend_fibered_general(base: &ReductiveTriple, h_normal: &Mat, s: f64) -> Result<FiberedExtension> {
    let g = &base.g;
    let k = &base.h_basis;
    let b = &base.b;
    if h_normal.nrows() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: h_normal.nrows() });
    }
    // h ⊂ k and [k, h] ⊆ h.
    let pk = projector(k);
    let mut res = (h_normal - &pk * h_normal).amax();
    let ph = if h_normal.ncols() > 0 { projector(h_normal) } else { Mat::zeros(g.dim(), g.dim()) };
    for x in k.column_iter() {
        for y in h_normal.column_iter() {
            let br = g.bracket_unchecked(&x.into_owned(), &y.into_owned());
            res = res.max((&br - &ph * &br).norm());
        }
    }
    if res > CLOSURE_TOL {
        return Err(Error::NotNormalSubalgebra(res));
    }
    // h⊥ inside k.
    let coeffs = if h_normal.ncols() == 0 {
        Mat::identity(k.ncols(), k.ncols())
    } else {
        null_space(&(h_normal.transpose() * &b.matrix * k), 1e-10)
    };
    let zs_raw = k * coeffs;
    let (zs, signs) = gram_schmidt(&zs_raw, &b.matrix, 1e-10);
    let r = zs.ncols();
    if r == 0 {
        return Err(Error::NotOneDimensional(0));
    }
    if signs.iter().any(|&e| e != signs[0]) {
        return Err(Error::InadmissibleS(s));
    }
    let eps = signs[0];
    if !(eps * (1.0 + s) > 0.0) {
        return Err(Error::InadmissibleS(s));
    }
    let p = &base.m_basis;
    let np = p.ncols();
    let rho: Vec<Mat> = zs
        .column_iter()
        .map(|z| {
            let ad = g.ad(&z.into_owned());
            p.transpose() * &b.matrix * ad * p
        })
        .collect();

    let triple = if s == 0.0 {
        let mut m = Mat::zeros(g.dim(), np + r);
        m.view_mut((0, 0), (g.dim(), np)).copy_from(p);
        m.view_mut((0, np), (g.dim(), r)).copy_from(&(-&zs));
        build_triple_with_m(g.clone(), h_normal.clone(), b.clone(), m)?
    } else {
        let fiber = g.subalgebra(&zs, (0..r).map(|i| format!("z{i}")).collect())?;
        let gh = g.direct_sum(&fiber);
        let n = gh.dim();
        let d = g.dim();
        let bz = BilinearForm::new(b.restrict(&zs) / s, "fiber");
        let bh = b.direct_sum(&bz, format!("{}+fiber(s={s})", b.name));
        // k̂ = {(x, x_h⊥)}.
        let mut kh = Mat::zeros(n, k.ncols());
        for (c, x) in k.column_iter().enumerate() {
            kh.view_mut((0, c), (d, 1)).copy_from(&x);
            for i in 0..r {
                let a = signs[i] * b.eval(&x.into_owned(), &zs.column(i).into_owned());
                kh[(d + i, c)] = a;
            }
        }
        let mut m = Mat::zeros(n, np + r);
        m.view_mut((0, 0), (d, np)).copy_from(p);
        let f = 1.0 / (1.0 + s).abs().sqrt();
        for i in 0..r {
            let mut v = Vector::zeros(n);
            v.rows_mut(0, d).copy_from(&(zs.column(i) * (-f)));
            v[d + i] = s * f;
            m.set_column(np + i, &v);
        }
        build_triple_with_m(gh, kh, bh, m)?
    };
    Ok(FiberedExtension { triple, s, base_dim: np, fiber_dim: r, fiber_basis: zs, fiber_sign: eps, rho })
}

/// Residuals of τ̂ = τ + |1+s|^{-1/2} ρ(Z₀)∧v₀♭ and R̂ = R̄ + |1+s|^{-1} ρ(Z₀)⊗ρ(Z₀).
pub fn fibered_formula_residuals(base: &ReductiveTriple, ext: &FiberedExtension) -> (f64, f64) {
    let m0 = to_model(base);
    let m1 = to_model(&ext.triple);
    let np = ext.base_dim;
    let n = np + 1;
    let rho = &ext.rho[0];
    let f = 1.0 / (1.0 + ext.s).abs().sqrt();
    let omega = |i: usize, j: usize| -> f64 {
        if i < np && j < np {
            (rho * unit(np, i)).dot(&unit(np, j))
        } else {
            0.0
        }
    };
    let v = np;
    // (ω∧v♭)(a,b,c) = ω(a,b)δ_cv − ω(a,c)δ_bv + ω(b,c)δ_av.
    let wedge = |a: usize, b: usize, c: usize| -> f64 {
        let d = |x: usize| if x == v { 1.0 } else { 0.0 };
        omega(a, b) * d(c) - omega(a, c) * d(b) + omega(b, c) * d(a)
    };
    let base_tau = |a: usize, b: usize, c: usize| if a < np && b < np && c < np { m0.tau(a, b, c) } else { 0.0 };
    let mut dt = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let pred = base_tau(a, b, c) + f * wedge(a, b, c);
                dt = dt.max((m1.tau(a, b, c) - pred).abs());
            }
        }
    }
    let mut dr = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut pred = 0.0;
                    if a < np && b < np && c < np && d < np {
                        pred = m0.rbar(a, b, c, d) + f * f * omega(a, b) * omega(c, d);
                    }
                    dr = dr.max((m1.rbar(a, b, c, d) - pred).abs());
                }
            }
        }
    }
    let st = m1.torsion_norm().max(1.0);
    let sr = m1.curvature_norm().max(1.0);
    (dt / st, dr / sr)
}

/// max |K(x,y) − (B([x,y]_h,[x,y]_h) + ¼|τ(x,y)|²)| over sampled planes.
pub fn normal_formula_residual(t: &ReductiveTriple, samples: usize, seed: u64) -> f64 {
    let model = to_model(t);
    let n = t.dim_m();
    if n < 2 {
        return 0.0;
    }
    let xs = sampling::unit_vectors(n, 2 * samples, seed);
    xs.par_chunks(2)
        .map(|p| {
            let a = sectional_curvature(&model, &p[0], &p[1]).unwrap_or(0.0);
            let b = normal_sectional(t, &p[0], &p[1]).unwrap_or(0.0);
            (a - b).abs()
        })
        .reduce(|| 0.0, f64::max)
}
