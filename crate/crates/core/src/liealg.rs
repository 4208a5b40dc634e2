//! Real Lie algebras by structure constants, invariant bilinear forms,
//! subalgebras and stabilizers, and the classical matrix algebras.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::{gram_schmidt, null_space, sorted_symmetric_eigen, Mat, Vector};
use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

/// Bracket-closure residual accepted for subalgebras and matrix generators.
pub const CLOSURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct LieAlgebra {
    dim: usize,
    labels: Vec<String>,
    /// Sorted (i, j, k, c^k_ij) with i < j.
    constants: Vec<(usize, usize, usize, f64)>,
    dense: Vec<f64>,
}

impl LieAlgebra {
    /// Builds from brackets [e_i, e_j] = Σ c e_k. Entries with i > j are
    /// folded by antisymmetry; conflicting duplicates are rejected.
    pub fn from_constants(
        dim: usize,
        labels: Vec<String>,
        brackets: &[(usize, usize, usize, f64)],
    ) -> Result<Self> {
        if labels.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: labels.len() });
        }
        let mut dense = vec![f64::NAN; dim * dim * dim];
        let idx = |i: usize, j: usize, k: usize| (i * dim + j) * dim + k;
        for &(i, j, k, v) in brackets {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::Input(format!("bracket index ({i},{j},{k}) out of range")));
            }
            if i == j {
                if v != 0.0 {
                    return Err(Error::Input(format!("nonzero self-bracket at ({i},{i},{k})")));
                }
                continue;
            }
            for (a, b, s) in [(i, j, v), (j, i, -v)] {
                let slot = &mut dense[idx(a, b, k)];
                if !slot.is_nan() && (*slot - s).abs() > 1e-12 {
                    return Err(Error::Input(format!("inconsistent bracket entries at ({i},{j},{k})")));
                }
                *slot = s;
            }
        }
        for x in dense.iter_mut() {
            if x.is_nan() {
                *x = 0.0;
            }
        }
        Ok(Self::from_dense(dim, labels, dense))
    }

    fn from_dense(dim: usize, labels: Vec<String>, dense: Vec<f64>) -> Self {
        let mut constants = Vec::new();
        for i in 0..dim {
            for j in i + 1..dim {
                for k in 0..dim {
                    let v = dense[(i * dim + j) * dim + k];
                    if v != 0.0 {
                        constants.push((i, j, k, v));
                    }
                }
            }
        }
        LieAlgebra { dim, labels, constants, dense }
    }

    pub fn abelian(dim: usize) -> Self {
        let labels = (0..dim).map(|i| format!("a{i}")).collect();
        Self::from_dense(dim, labels, vec![0.0; dim * dim * dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn structure_constants(&self) -> &[(usize, usize, usize, f64)] {
        &self.constants
    }

    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.dense[(i * self.dim + j) * self.dim + k]
    }

    pub fn bracket(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        for v in [x, y] {
            if v.len() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
            }
        }
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &Vector, y: &Vector) -> Vector {
        let n = self.dim;
        let mut out = Vector::zeros(n);
        for &(i, j, k, c) in &self.constants {
            out[k] += c * (x[i] * y[j] - x[j] * y[i]);
        }
        out
    }

    /// Matrix of ad(x) in the basis: column j is [x, e_j].
    pub fn ad(&self, x: &Vector) -> Mat {
        let n = self.dim;
        let mut m = Mat::zeros(n, n);
        for &(i, j, k, c) in &self.constants {
            m[(k, j)] += c * x[i];
            m[(k, i)] -= c * x[j];
        }
        m
    }

    pub fn ad_basis(&self, i: usize) -> Mat {
        self.ad(&unit(self.dim, i))
    }

    /// Largest Jacobi-identity defect over basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim;
        let ads: Vec<Mat> = (0..n).map(|i| self.ad_basis(i)).collect();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                // ad([e_i, e_j]) − [ad e_i, ad e_j] vanishes iff Jacobi holds.
                let b = self.bracket_unchecked(&unit(n, i), &unit(n, j));
                let lhs = self.ad(&b);
                let rhs = &ads[i] * &ads[j] - &ads[j] * &ads[i];
                worst = worst.max((lhs - rhs).amax());
            }
        }
        worst
    }

    pub fn killing_form(&self) -> BilinearForm {
        let n = self.dim;
        let ads: Vec<Mat> = (0..n).map(|i| self.ad_basis(i)).collect();
        let mut k = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let t = (&ads[i] * &ads[j]).trace();
                k[(i, j)] = t;
                k[(j, i)] = t;
            }
        }
        BilinearForm::new(k, "killing")
    }

    pub fn direct_sum(&self, other: &LieAlgebra) -> LieAlgebra {
        let (a, b) = (self.dim, other.dim);
        let n = a + b;
        let mut dense = vec![0.0; n * n * n];
        for &(i, j, k, c) in &self.constants {
            dense[(i * n + j) * n + k] = c;
            dense[(j * n + i) * n + k] = -c;
        }
        for &(i, j, k, c) in &other.constants {
            let (i, j, k) = (i + a, j + a, k + a);
            dense[(i * n + j) * n + k] = c;
            dense[(j * n + i) * n + k] = -c;
        }
        let labels = self.labels.iter().chain(other.labels.iter()).cloned().collect();
        Self::from_dense(n, labels, dense)
    }

    /// Worst relative distance of brackets of the columns of `basis` from their span.
    pub fn closure_residual(&self, basis: &Mat) -> f64 {
        let r = basis.ncols();
        if r == 0 {
            return 0.0;
        }
        let proj = projector(basis);
        let mut worst = 0.0f64;
        for i in 0..r {
            for j in i + 1..r {
                let b = self.bracket_unchecked(&basis.column(i).into_owned(), &basis.column(j).into_owned());
                let off = &b - &proj * &b;
                let scale = basis.column(i).norm() * basis.column(j).norm();
                worst = worst.max(off.norm() / scale.max(1e-300));
            }
        }
        worst
    }

    /// The subalgebra spanned by the columns of `basis` as an algebra in its own right.
    pub fn subalgebra(&self, basis: &Mat, labels: Vec<String>) -> Result<LieAlgebra> {
        let r = basis.ncols();
        let res = self.closure_residual(basis);
        if res > CLOSURE_TOL {
            return Err(Error::NotClosed(res));
        }
        let solver = least_squares(basis)?;
        let mut triples = Vec::new();
        for i in 0..r {
            for j in i + 1..r {
                let b = self.bracket_unchecked(&basis.column(i).into_owned(), &basis.column(j).into_owned());
                let c = &solver * b;
                for k in 0..r {
                    if c[k].abs() > 1e-14 {
                        triples.push((i, j, k, c[k]));
                    }
                }
            }
        }
        LieAlgebra::from_constants(r, labels, &triples)
    }
}

pub fn unit(n: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(n);
    v[i] = 1.0;
    v
}

/// Orthogonal projector onto the column span (columns assumed independent).
pub fn projector(basis: &Mat) -> Mat {
    let g = basis.transpose() * basis;
    match g.try_inverse() {
        Some(gi) => basis * gi * basis.transpose(),
        None => Mat::zeros(basis.nrows(), basis.nrows()),
    }
}

/// (GᵀG)⁻¹Gᵀ for a full-column-rank G.
fn least_squares(g: &Mat) -> Result<Mat> {
    let gram = g.transpose() * g;
    let (vals, _) = sorted_symmetric_eigen(&gram);
    let lo = vals.first().copied().unwrap_or(1.0);
    let hi = vals.last().copied().unwrap_or(1.0);
    if lo <= 1e-20 * hi.max(1.0) {
        return Err(Error::Input("basis vectors are linearly dependent".into()));
    }
    Ok(gram.try_inverse().ok_or(Error::DegenerateRestriction)? * g.transpose())
}

#[derive(Debug, Clone)]
pub struct BilinearForm {
    pub matrix: Mat,
    pub name: String,
}

impl BilinearForm {
    pub fn new(matrix: Mat, name: impl Into<String>) -> Self {
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        BilinearForm { matrix, name: name.into() }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eval(&self, x: &Vector, y: &Vector) -> f64 {
        (x.transpose() * &self.matrix * y)[(0, 0)]
    }

    pub fn scaled(&self, c: f64, name: impl Into<String>) -> Self {
        BilinearForm { matrix: &self.matrix * c, name: name.into() }
    }

    pub fn direct_sum(&self, other: &BilinearForm, name: impl Into<String>) -> Self {
        let (a, b) = (self.dim(), other.dim());
        let mut m = Mat::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.matrix);
        m.view_mut((a, a), (b, b)).copy_from(&other.matrix);
        BilinearForm { matrix: m, name: name.into() }
    }

    /// Gram matrix on the columns of `basis`.
    pub fn restrict(&self, basis: &Mat) -> Mat {
        basis.transpose() * &self.matrix * basis
    }

    /// max |B([z,x],y) + B(x,[z,y])| over basis triples, relative to ‖B‖.
    pub fn invariance_residual(&self, g: &LieAlgebra) -> f64 {
        let scale = self.matrix.amax().max(1e-300);
        (0..g.dim())
            .map(|z| {
                let ad = g.ad_basis(z);
                (ad.transpose() * &self.matrix + &self.matrix * ad).amax() / scale
            })
            .fold(0.0, f64::max)
    }

    pub fn is_nondegenerate(&self) -> bool {
        let (vals, _) = sorted_symmetric_eigen(&self.matrix);
        let big = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        vals.iter().all(|v| v.abs() > 1e-10 * big.max(1e-300))
    }
}

/// B-orthogonal complement of `subspace` in g, returned B-orthonormal.
pub fn orthocomplement(g: &LieAlgebra, subspace: &Mat, b: &BilinearForm) -> Result<Mat> {
    let n = g.dim();
    if subspace.nrows() != n || b.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: subspace.nrows() });
    }
    if subspace.ncols() > 0 {
        let restricted = BilinearForm::new(b.restrict(subspace), "restricted");
        if !restricted.is_nondegenerate() {
            return Err(Error::DegenerateRestriction);
        }
    }
    let comp = if subspace.ncols() == 0 {
        Mat::identity(n, n)
    } else {
        null_space(&(subspace.transpose() * &b.matrix), 1e-10)
    };
    if comp.ncols() == 0 {
        return Ok(Mat::zeros(n, 0));
    }
    let (q, _) = gram_schmidt(&comp, &b.matrix, 1e-10);
    if q.ncols() != comp.ncols() {
        return Err(Error::DegenerateRestriction);
    }
    Ok(q)
}

/// Alternating p-form on ℝⁿ with dense components t[i₁…i_p].
#[derive(Debug, Clone, PartialEq)]
pub struct AltForm {
    pub n: usize,
    pub degree: usize,
    pub values: Vec<f64>,
}

impl AltForm {
    pub fn zero(n: usize, degree: usize) -> Self {
        AltForm { n, degree, values: vec![0.0; n.pow(degree as u32)] }
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.flat(idx)]
    }

    /// Sets t[idx] = v together with all signed permutations.
    pub fn set_alternating(&mut self, idx: &[usize], v: f64) {
        for (perm, sign) in permutations(self.degree) {
            let p: Vec<usize> = perm.iter().map(|&k| idx[k]).collect();
            let f = self.flat(&p);
            self.values[f] = sign * v;
        }
    }

    pub fn add_alternating(&mut self, idx: &[usize], v: f64) {
        let cur = self.get(idx);
        self.set_alternating(idx, cur + v);
    }

    /// (A⋆t)(v₁,…,v_p) = −Σ_r t(…, A v_r, …).
    pub fn act(&self, a: &Mat) -> AltForm {
        let n = self.n;
        let p = self.degree;
        let mut out = AltForm::zero(n, p);
        let mut idx = vec![0usize; p];
        for f in 0..self.values.len() {
            let mut rem = f;
            for r in (0..p).rev() {
                idx[r] = rem % n;
                rem /= n;
            }
            let mut acc = 0.0;
            for r in 0..p {
                let orig = idx[r];
                for m in 0..n {
                    let am = a[(m, orig)];
                    if am != 0.0 {
                        idx[r] = m;
                        acc -= am * self.get(&idx);
                    }
                }
                idx[r] = orig;
            }
            out.values[f] = acc;
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, c: f64) -> AltForm {
        AltForm { n: self.n, degree: self.degree, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &AltForm) -> AltForm {
        AltForm {
            n: self.n,
            degree: self.degree,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }
}

/// All permutations of 0..p with their signs.
pub fn permutations(p: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; p], &mut out);
    out.into_iter()
        .map(|perm| {
            let mut inv = 0;
            for i in 0..p {
                for j in i + 1..p {
                    if perm[i] > perm[j] {
                        inv += 1;
                    }
                }
            }
            (perm, if inv % 2 == 0 { 1.0 } else { -1.0 })
        })
        .collect()
}

/// Kernel of A ↦ (A⋆t₁, …, A⋆t_r) on g acting through `rep`, as columns in g-coordinates.
pub fn stabilizer_subalgebra(g: &LieAlgebra, rep: &[Mat], forms: &[AltForm]) -> Result<Mat> {
    if rep.len() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: rep.len() });
    }
    let rows: usize = forms.iter().map(|f| f.values.len()).sum();
    let mut m = Mat::zeros(rows, g.dim());
    for (j, a) in rep.iter().enumerate() {
        let mut off = 0;
        for f in forms {
            let v = f.act(a);
            for (i, x) in v.values.iter().enumerate() {
                m[(off + i, j)] = *x;
            }
            off += v.values.len();
        }
    }
    Ok(null_space(&m, 1e-10))
}

/// A Lie algebra realized by (possibly complex) matrices; all structure is real.
#[derive(Debug, Clone)]
pub struct MatrixAlgebra {
    pub algebra: LieAlgebra,
    pub generators: Vec<CMat>,
    realified: Mat,
    solver: Mat,
}

fn realify(m: &CMat) -> Vector {
    let n = m.len();
    let mut v = Vector::zeros(2 * n);
    for (i, z) in m.iter().enumerate() {
        v[i] = z.re;
        v[n + i] = z.im;
    }
    v
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

impl MatrixAlgebra {
    pub fn new(generators: Vec<CMat>, labels: Vec<String>) -> Result<Self> {
        let d = generators.len();
        if d == 0 {
            return Err(Error::Input("no generators".into()));
        }
        let cols: Vec<Vector> = generators.iter().map(realify).collect();
        let realified = Mat::from_columns(&cols);
        let solver = least_squares(&realified)?;
        let mut triples = Vec::new();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i + 1..d {
                let v = realify(&commutator(&generators[i], &generators[j]));
                let c = &solver * &v;
                let res = (&realified * &c - &v).norm() / v.norm().max(1.0);
                worst = worst.max(res);
                for k in 0..d {
                    if c[k].abs() > 1e-14 {
                        triples.push((i, j, k, c[k]));
                    }
                }
            }
        }
        if worst > CLOSURE_TOL {
            return Err(Error::NotClosed(worst));
        }
        let algebra = LieAlgebra::from_constants(d, labels, &triples)?;
        Ok(MatrixAlgebra { algebra, generators, realified, solver })
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn matrix_of(&self, x: &Vector) -> CMat {
        let n = self.generators[0].nrows();
        let mut m = CMat::zeros(n, n);
        for (g, &c) in self.generators.iter().zip(x.iter()) {
            m += g * Complex64::new(c, 0.0);
        }
        m
    }

    /// Coordinates of a matrix lying in the real span of the generators.
    pub fn coords_of(&self, m: &CMat) -> Result<Vector> {
        let v = realify(m);
        let c = &self.solver * &v;
        let res = (&self.realified * &c - &v).norm() / v.norm().max(1.0);
        if res > CLOSURE_TOL {
            return Err(Error::NotClosed(res));
        }
        Ok(c)
    }

    pub fn coords_matrix(&self, ms: &[CMat]) -> Result<Mat> {
        let cols = ms.iter().map(|m| self.coords_of(m)).collect::<Result<Vec<_>>>()?;
        if cols.is_empty() {
            return Ok(Mat::zeros(self.dim(), 0));
        }
        Ok(Mat::from_columns(&cols))
    }

    /// B(x, y) = scale · Re tr(XY).
    pub fn trace_form(&self, scale: f64, name: impl Into<String>) -> BilinearForm {
        let d = self.dim();
        let mut m = Mat::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let t = (&self.generators[i] * &self.generators[j]).trace().re * scale;
                m[(i, j)] = t;
                m[(j, i)] = t;
            }
        }
        BilinearForm::new(m, name)
    }

    /// Real generator matrices; panics if any generator has an imaginary part.
    pub fn real_generators(&self) -> Vec<Mat> {
        self.generators
            .iter()
            .map(|g| {
                assert!(g.iter().all(|z| z.im == 0.0), "generator is not real");
                g.map(|z| z.re)
            })
            .collect()
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn elementary(n: usize, i: usize, j: usize, z: Complex64) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(i, j)] = z;
    m
}

/// Skew-Hermitian basis of u(n) when `with_center`, else of su(n).
fn unitary_generators(n: usize, with_center: bool) -> (Vec<CMat>, Vec<String>) {
    let mut gens = Vec::new();
    let mut labels = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            gens.push(elementary(n, j, k, c(1.0, 0.0)) - elementary(n, k, j, c(1.0, 0.0)));
            labels.push(format!("X{j}{k}"));
            gens.push(elementary(n, j, k, c(0.0, 1.0)) + elementary(n, k, j, c(0.0, 1.0)));
            labels.push(format!("Y{j}{k}"));
        }
    }
    for j in 0..n.saturating_sub(1) {
        gens.push(elementary(n, j, j, c(0.0, 1.0)) - elementary(n, j + 1, j + 1, c(0.0, 1.0)));
        labels.push(format!("H{j}"));
    }
    if with_center {
        gens.push(CMat::identity(n, n) * c(0.0, 1.0));
        labels.push("Z".into());
    }
    (gens, labels)
}

pub fn su(n: usize) -> MatrixAlgebra {
    let (g, l) = unitary_generators(n, false);
    MatrixAlgebra::new(g, l).expect("su(n) closes")
}

pub fn u(n: usize) -> MatrixAlgebra {
    let (g, l) = unitary_generators(n, true);
    MatrixAlgebra::new(g, l).expect("u(n) closes")
}

pub fn so(n: usize) -> MatrixAlgebra {
    let mut gens = Vec::new();
    let mut labels = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            gens.push(elementary(n, k, j, c(1.0, 0.0)) - elementary(n, j, k, c(1.0, 0.0)));
            labels.push(format!("L{j}{k}"));
        }
    }
    MatrixAlgebra::new(gens, labels).expect("so(n) closes")
}

/// sp(n) inside u(2n) as [[A, B], [−B̄, Ā]] with A ∈ u(n), Bᵀ = B.
pub fn sp(n: usize) -> MatrixAlgebra {
    let (gens, labels) = sp_generators(n);
    MatrixAlgebra::new(gens, labels).expect("sp(n) closes")
}

pub(crate) fn sp_embed(a: &CMat, b: &CMat) -> CMat {
    let n = a.nrows();
    let mut m = CMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(&(-b.map(|z| z.conj())));
    m.view_mut((n, n), (n, n)).copy_from(&a.map(|z| z.conj()));
    m
}

fn sp_generators(n: usize) -> (Vec<CMat>, Vec<String>) {
    let zero = CMat::zeros(n, n);
    let mut gens = Vec::new();
    let mut labels = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            let x = elementary(n, j, k, c(1.0, 0.0)) - elementary(n, k, j, c(1.0, 0.0));
            let y = elementary(n, j, k, c(0.0, 1.0)) + elementary(n, k, j, c(0.0, 1.0));
            gens.push(sp_embed(&x, &zero));
            labels.push(format!("X{j}{k}"));
            gens.push(sp_embed(&y, &zero));
            labels.push(format!("Y{j}{k}"));
        }
    }
    for j in 0..n {
        gens.push(sp_embed(&elementary(n, j, j, c(0.0, 1.0)), &zero));
        labels.push(format!("I{j}"));
    }
    for j in 0..n {
        for k in j..n {
            for (z, tag) in [(c(1.0, 0.0), "J"), (c(0.0, 1.0), "K")] {
                let mut b = elementary(n, j, k, z);
                if j != k {
                    b += elementary(n, k, j, z);
                }
                gens.push(sp_embed(&zero, &b));
                labels.push(format!("{tag}{j}{k}"));
            }
        }
    }
    (gens, labels)
}

/// su(p, q) preserving diag(ε) with ε_j = −1 for j < p and +1 otherwise.
pub fn su_indefinite(p: usize, q: usize) -> MatrixAlgebra {
    let n = p + q;
    let eps = |j: usize| if j < p { -1.0 } else { 1.0 };
    let mut gens = Vec::new();
    let mut labels = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            let s = if eps(j) == eps(k) { -1.0 } else { 1.0 };
            gens.push(elementary(n, j, k, c(1.0, 0.0)) + elementary(n, k, j, c(s, 0.0)));
            labels.push(format!("X{j}{k}"));
            gens.push(elementary(n, j, k, c(0.0, 1.0)) + elementary(n, k, j, c(0.0, -s)));
            labels.push(format!("Y{j}{k}"));
        }
    }
    for j in 0..n - 1 {
        gens.push(elementary(n, j, j, c(0.0, 1.0)) - elementary(n, j + 1, j + 1, c(0.0, 1.0)));
        labels.push(format!("H{j}"));
    }
    MatrixAlgebra::new(gens, labels).expect("su(p,q) closes")
}

/// Block-diagonal direct sum of matrix algebras.
pub fn matrix_direct_sum(a: &MatrixAlgebra, b: &MatrixAlgebra) -> MatrixAlgebra {
    let (na, nb) = (a.generators[0].nrows(), b.generators[0].nrows());
    let n = na + nb;
    let mut gens = Vec::new();
    for g in &a.generators {
        let mut m = CMat::zeros(n, n);
        m.view_mut((0, 0), (na, na)).copy_from(g);
        gens.push(m);
    }
    for g in &b.generators {
        let mut m = CMat::zeros(n, n);
        m.view_mut((na, na), (nb, nb)).copy_from(g);
        gens.push(m);
    }
    let labels = a.algebra.labels().iter().chain(b.algebra.labels()).cloned().collect();
    MatrixAlgebra::new(gens, labels).expect("direct sum closes")
}

/// Block-diagonal embedding of complex blocks into one matrix.
pub fn block_diag(blocks: &[&CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = CMat::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        m.view_mut((off, off), (k, k)).copy_from(*b);
        off += k;
    }
    m
}
