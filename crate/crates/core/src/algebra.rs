//! Dense numeric kernels shared by every other module: real polynomials,
//! the canonical decomposition of skew-symmetric operators, minimal and
//! characteristic polynomials, and a few small linear-algebra helpers.

use std::fmt;
use std::ops::{Add, Mul};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative deviation from skew-symmetry tolerated on input operators.
const SKEW_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub residual: f64,
    pub gap: f64,
    pub zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { residual: 1e-8, gap: 1e-6, zero: 1e-10 }
    }
}

/// Real univariate polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Polynomial { coeffs: vec![1.0] }
    }

    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Polynomial { coeffs: c }
    }

    /// λ² + μ.
    pub fn quadratic(mu: f64) -> Self {
        Polynomial::new(vec![mu, 0.0, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    /// Drops leading coefficients below `tol` in absolute value.
    pub fn trimmed(&self, tol: f64) -> Self {
        let mut c = self.coeffs.clone();
        while c.last().is_some_and(|x| x.abs() < tol) {
            c.pop();
        }
        Polynomial { coeffs: c }
    }

    pub fn monic(&self) -> Self {
        let lead = self.leading();
        if lead == 0.0 {
            return self.clone();
        }
        self.scale(1.0 / lead)
    }

    pub fn scale(&self, s: f64) -> Self {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut c = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Polynomial::new(c)
    }

    pub fn derivative(&self) -> Self {
        Polynomial::new(
            self.coeffs.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect(),
        )
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Polynomial::zero(), self.clone());
        }
        let lead = d.leading();
        let mut q = vec![0.0; r.len() - dd];
        for k in (0..q.len()).rev() {
            let f = r[k + dd] / lead;
            q[k] = f;
            for (i, c) in d.coeffs.iter().enumerate() {
                r[k + i] -= f * c;
            }
        }
        r.truncate(dd);
        (Polynomial::new(q), Polynomial::new(r))
    }

    /// Coefficient-wise comparison after normalizing both sides to monic.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let a = self.monic();
        let b = other.monic();
        let n = a.coeffs.len().max(b.coeffs.len());
        (0..n).all(|i| (a.coeff(i) - b.coeff(i)).abs() <= tol)
    }

    /// Largest remainder coefficient of `other / self` after making `self` monic.
    pub fn division_residual(&self, other: &Self) -> f64 {
        let (_, r) = other.div_rem(&self.monic());
        r.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Complex roots via the eigenvalues of the companion matrix.
    pub fn roots(&self) -> Vec<Complex64> {
        let p = self.monic();
        let Some(n) = p.degree() else { return Vec::new() };
        if n == 0 {
            return Vec::new();
        }
        let mut c = Mat::zeros(n, n);
        for i in 1..n {
            c[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            c[(i, n - 1)] = -p.coeffs[i];
        }
        c.complex_eigenvalues().iter().copied().collect()
    }

    /// Horner evaluation of P at a linear operator given as a closure.
    pub fn apply<T, F>(&self, op: F, x: &T) -> T
    where
        T: Clone + Add<Output = T> + Mul<f64, Output = T>,
        F: Fn(&T) -> T,
    {
        let mut it = self.coeffs.iter().rev();
        let Some(&lead) = it.next() else { return x.clone() * 0.0 };
        let mut y = x.clone() * lead;
        for &c in it {
            y = op(&y) + x.clone() * c;
        }
        y
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            let sign = if c < 0.0 { "-" } else { "+" };
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            let show = k == 0 || a != 1.0;
            if show {
                write!(f, "{a}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "λ")?,
                _ => write!(f, "λ^{k}")?,
            }
        }
        Ok(())
    }
}

/// One block of the canonical form: A acts as λ·J on V, J² = −id on V.
#[derive(Debug, Clone)]
pub struct SkewBlock {
    pub lambda: f64,
    pub basis: Mat,
    /// J extended by zero off V.
    pub j: Mat,
    pub projection: Mat,
}

#[derive(Debug, Clone)]
pub struct SkewSpectrum {
    pub dim: usize,
    pub zero_space: Mat,
    pub zero_projection: Mat,
    pub blocks: Vec<SkewBlock>,
}

impl SkewSpectrum {
    pub fn lambdas(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.lambda).collect()
    }

    /// Σ λ_ℓ J_ℓ π_ℓ.
    pub fn reconstruct(&self) -> Mat {
        let mut a = Mat::zeros(self.dim, self.dim);
        for b in &self.blocks {
            a += &b.j * &b.projection * b.lambda;
        }
        a
    }

    /// J_A = ⊕ J_ℓ, zero on the kernel.
    pub fn complex_structure(&self) -> Mat {
        let mut j = Mat::zeros(self.dim, self.dim);
        for b in &self.blocks {
            j += &b.j;
        }
        j
    }

    /// Projection onto V_k, with k = 0 the kernel and k ≥ 1 the blocks.
    pub fn projection(&self, k: usize) -> &Mat {
        if k == 0 {
            &self.zero_projection
        } else {
            &self.blocks[k - 1].projection
        }
    }
}

pub fn skew_deviation(a: &Mat) -> f64 {
    (a + a.transpose()).norm() / a.norm().max(1.0)
}

pub fn symmetric_part(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

/// Eigen-decomposition sorted by ascending eigenvalue.
pub fn sorted_symmetric_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    let s = symmetric_part(m);
    // nalgebra's symmetric QR can return mixed eigenvectors on clustered spectra.
    let f = faer::Mat::<f64>::from_fn(n, n, |i, j| s[(i, j)]);
    let eig = f.selfadjoint_eigendecomposition(faer::Side::Lower);
    let vals = eig.s().column_vector();
    let u = eig.u();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| vals.read(i).total_cmp(&vals.read(j)));
    let vecs = Mat::from_fn(n, n, |r, c| u.read(r, idx[c]));
    (idx.iter().map(|&i| vals.read(i)).collect(), vecs)
}

pub fn skew_spectral_decomposition(a: &Mat, gap_tol: f64) -> Result<SkewSpectrum> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    let dev = skew_deviation(a);
    if dev > SKEW_TOL {
        return Err(Error::NotSkew(dev));
    }
    let (mu, vecs) = sorted_symmetric_eigen(&(-(a * a)));
    let scale = mu.last().copied().unwrap_or(0.0);
    if scale <= 1e-24 {
        return Ok(SkewSpectrum {
            dim: n,
            zero_space: Mat::identity(n, n),
            zero_projection: Mat::identity(n, n),
            blocks: Vec::new(),
        });
    }
    let merge_tol = gap_tol * 1e-2;
    let rel: Vec<f64> = mu.iter().map(|m| m / scale).collect();

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let new_cluster = match i {
            0 => true,
            _ => {
                let d = rel[i] - rel[i - 1];
                if d > merge_tol && d <= gap_tol {
                    return Err(Error::DegenerateSpectrum { gap: d * scale, tol: gap_tol });
                }
                d > merge_tol
            }
        };
        if new_cluster {
            clusters.push(vec![i]);
        } else {
            clusters.last_mut().unwrap().push(i);
        }
    }

    let columns = |ids: &[usize]| {
        Mat::from_columns(&ids.iter().map(|&i| vecs.column(i).into_owned()).collect::<Vec<_>>())
    };
    let mut zero_space = Mat::zeros(n, 0);
    let mut blocks = Vec::new();
    for (ci, ids) in clusters.iter().enumerate() {
        let mean = ids.iter().map(|&i| rel[i]).sum::<f64>() / ids.len() as f64;
        if ci == 0 && mean <= merge_tol {
            zero_space = columns(ids);
            continue;
        }
        if ci == 0 && mean <= gap_tol {
            return Err(Error::DegenerateSpectrum { gap: mean * scale, tol: gap_tol });
        }
        if ids.len() % 2 == 1 {
            return Err(Error::DegenerateSpectrum { gap: 0.0, tol: gap_tol });
        }
        let basis = columns(ids);
        let projection = &basis * basis.transpose();
        let lambda = (mean * scale).sqrt();
        let j = a * &projection / lambda;
        blocks.push(SkewBlock { lambda, basis, j, projection });
    }
    let zero_projection = &zero_space * zero_space.transpose();
    Ok(SkewSpectrum { dim: n, zero_space, zero_projection, blocks })
}

/// Lowest-degree monic P with P(A)x = 0, read off the spectral blocks met by x.
pub fn minimal_polynomial_wrt(a: &Mat, x: &Vector, tol: &Tolerances) -> Result<Polynomial> {
    let spec = skew_spectral_decomposition(a, tol.gap)?;
    Ok(minimal_polynomial_from_spectrum(&spec, x, tol.residual))
}

pub fn minimal_polynomial_from_spectrum(spec: &SkewSpectrum, x: &Vector, rel_tol: f64) -> Polynomial {
    let nx = x.norm();
    if nx == 0.0 {
        return Polynomial::one();
    }
    let mut p = Polynomial::one();
    if (&spec.zero_projection * x).norm() > rel_tol * nx {
        p = p.mul(&Polynomial::monomial(1));
    }
    for b in &spec.blocks {
        if (&b.projection * x).norm() > rel_tol * nx {
            p = p.mul(&Polynomial::quadratic(b.lambda * b.lambda));
        }
    }
    p
}

/// det(λI − L) via Hessenberg reduction and the standard three-term recurrence.
pub fn characteristic_polynomial(l: &Mat) -> Polynomial {
    let n = l.nrows();
    assert_eq!(n, l.ncols(), "characteristic polynomial of a non-square operator");
    if n == 0 {
        return Polynomial::one();
    }
    let h = l.clone().hessenberg().h();
    let x = Polynomial::monomial(1);
    let mut p: Vec<Polynomial> = vec![Polynomial::one()];
    for k in 0..n {
        let mut next = x.sub(&Polynomial::new(vec![h[(k, k)]])).mul(&p[k]);
        let mut prod = 1.0;
        for m in 1..=k {
            prod *= h[(k - m + 1, k - m)];
            let c = h[(k - m, k)] * prod;
            if c != 0.0 {
                next = next.sub(&p[k - m].scale(c));
            }
        }
        p.push(next);
    }
    p.pop().unwrap()
}

pub fn evaluate_polynomial_at_operator(p: &Polynomial, l: &Mat) -> Mat {
    let n = l.nrows();
    p.apply(|y: &Mat| l * y, &Mat::identity(n, n))
}

/// Orthonormal basis for the null space of `m`, singular values below
/// `rel_tol · max(1, σ_max)` counting as zero.
pub fn null_space(m: &Mat, rel_tol: f64) -> Mat {
    let c = m.ncols();
    if c == 0 {
        return Mat::zeros(0, 0);
    }
    // Pad to at least c rows so the SVD yields a full right basis.
    let padded = if m.nrows() < c {
        let mut p = Mat::zeros(c, c);
        p.view_mut((0, 0), (m.nrows(), c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = rel_tol * smax.max(1.0);
    let cols: Vec<Vector> = (0..c)
        .filter(|&i| svd.singular_values[i] <= cut)
        .map(|i| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        return Mat::zeros(c, 0);
    }
    Mat::from_columns(&cols)
}

/// Modified Gram–Schmidt with one re-orthogonalization pass under the inner
/// product `gram`; columns whose norm collapses below `tol` are dropped.
/// Each returned column has `gram`-norm ±1 (sign recorded in the second slot).
pub fn gram_schmidt(cols: &Mat, gram: &Mat, tol: f64) -> (Mat, Vec<f64>) {
    let ip = |x: &Vector, y: &Vector| (x.transpose() * gram * y)[(0, 0)];
    let mut out: Vec<Vector> = Vec::new();
    let mut signs: Vec<f64> = Vec::new();
    for c in cols.column_iter() {
        let mut v: Vector = c.into_owned();
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for (u, s) in out.iter().zip(&signs) {
                let f = ip(u, &v) * s;
                v -= u * f;
            }
        }
        let q = ip(&v, &v);
        if q.abs().sqrt() <= tol * scale {
            continue;
        }
        let s = q.signum();
        out.push(v / q.abs().sqrt());
        signs.push(s);
    }
    let n = cols.nrows();
    if out.is_empty() {
        return (Mat::zeros(n, 0), signs);
    }
    (Mat::from_columns(&out), signs)
}

pub fn orthonormalize(cols: &Mat, tol: f64) -> Mat {
    let n = cols.nrows();
    gram_schmidt(cols, &Mat::identity(n, n), tol).0
}

/// Orthonormal basis of x⊥, deterministic in x.
pub fn orthogonal_complement(x: &Vector) -> Mat {
    let n = x.len();
    let mut cols = Mat::zeros(n, n + 1);
    cols.set_column(0, x);
    for i in 0..n {
        cols[(i, i + 1)] = 1.0;
    }
    let q = orthonormalize(&cols, 1e-8);
    q.columns(1, n - 1).into_owned()
}

/// Orthonormal basis of symmetric endomorphisms supported on span(q):
/// q E_ii qᵀ and q (E_ij + E_ji) qᵀ / √2.
pub fn sym_basis(q: &Mat) -> Vec<Mat> {
    let r = q.ncols();
    let mut out = Vec::with_capacity(r * (r + 1) / 2);
    for i in 0..r {
        for j in i..r {
            let qi = q.column(i);
            let qj = q.column(j);
            let m = if i == j {
                qi * qi.transpose()
            } else {
                (qi * qj.transpose() + qj * qi.transpose()) / std::f64::consts::SQRT_2
            };
            out.push(m);
        }
    }
    out
}

/// Matrix of a linear map on symmetric endomorphisms in an orthonormal basis.
pub fn operator_matrix<F: Fn(&Mat) -> Mat>(basis: &[Mat], op: F) -> Mat {
    let n = basis.len();
    let mut m = Mat::zeros(n, n);
    for (j, b) in basis.iter().enumerate() {
        let img = op(b);
        for (i, c) in basis.iter().enumerate() {
            m[(i, j)] = c.dot(&img);
        }
    }
    m
}
