//! Vector cross products, generalized vector cross products and the
//! su(2) ⊕ ℂ² model of the residual bracket on N(1,1).

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::algebra::{sorted_symmetric_eigen, Mat, Vector};
use crate::error::{Error, Result};
use crate::liealg::AltForm;
use crate::reductive::InfinitesimalModel;
use crate::sampling;

pub const GVCP_SAMPLES: usize = 48;
const GVCP_TOL: f64 = 1e-7;
const VCP_TOL: f64 = 1e-8;

/// An alternating 3-form σ on ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeForm(pub AltForm);

impl ThreeForm {
    pub fn zero(n: usize) -> Self {
        ThreeForm(AltForm::zero(n, 3))
    }

    /// Sum of the given components (0-based indices), antisymmetrized.
    pub fn from_terms(n: usize, terms: &[([usize; 3], f64)]) -> Self {
        let mut f = AltForm::zero(n, 3);
        for (idx, v) in terms {
            f.add_alternating(idx, *v);
        }
        ThreeForm(f)
    }

    pub fn from_model(model: &InfinitesimalModel) -> Self {
        ThreeForm(model.torsion_form())
    }

    pub fn dim(&self) -> usize {
        self.0.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.0.get(&[i, j, k])
    }

    /// σ_X with σ_X Y = σ(X, Y, ·)♯.
    pub fn op(&self, x: &Vector) -> Mat {
        let n = self.dim();
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for k in 0..n {
                for j in 0..n {
                    m[(j, k)] += x[i] * self.get(i, k, j);
                }
            }
        }
        m
    }

    pub fn product(&self, x: &Vector, y: &Vector) -> Vector {
        self.op(x) * y
    }

    pub fn scaled(&self, c: f64) -> Self {
        ThreeForm(self.0.scaled(c))
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.dim();
        let mut d = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.get(i, j, k);
                    d = d.max((v + self.get(j, i, k)).abs()).max((v + self.get(i, k, j)).abs());
                }
            }
        }
        d
    }
}

/// dE₁∧dE₂∧dE₃.
pub fn volume_3form() -> ThreeForm {
    ThreeForm::from_terms(3, &[([0, 1, 2], 1.0)])
}

/// Re(dz₁∧dz₂∧dz₃) on ℝ⁶ with z_k = E_{2k−1} + iE_{2k}.
pub fn su3_tau() -> ThreeForm {
    ThreeForm::from_terms(6, &su3_terms())
}

fn su3_terms() -> Vec<([usize; 3], f64)> {
    vec![([0, 2, 4], 1.0), ([0, 3, 5], -1.0), ([1, 2, 5], -1.0), ([1, 3, 4], -1.0)]
}

/// ω∧dE₇ + Re(dz₁∧dz₂∧dz₃) on ℝ⁷.
pub fn g2_sigma() -> ThreeForm {
    let mut t = vec![([0, 1, 6], 1.0), ([2, 3, 6], 1.0), ([4, 5, 6], 1.0)];
    t.extend(su3_terms());
    ThreeForm::from_terms(7, &t)
}

/// Fixed-seed random 3-form with standard normal components.
pub fn random_3form(n: usize, seed: u64) -> ThreeForm {
    let mut r = sampling::rng(seed);
    let mut f = AltForm::zero(n, 3);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                f.set_alternating(&[i, j, k], sampling::gaussian_vector(&mut r, 1)[0]);
            }
        }
    }
    ThreeForm(f)
}

fn orthonormal_pairs(n: usize, count: usize, seed: u64) -> Vec<(Vector, Vector)> {
    let mut r = sampling::rng(seed);
    (0..count)
        .map(|_| {
            let x = sampling::unit_vector(&mut r, n);
            loop {
                let y = sampling::gaussian_vector(&mut r, n);
                let y = &y - &x * x.dot(&y);
                let ny = y.norm();
                if ny > 1e-6 {
                    break (x.clone(), y / ny);
                }
            }
        })
        .collect()
}

/// (verdict, max |‖σ_XY‖² − 1|) over orthonormal pairs.
pub fn is_vcp(sigma: &ThreeForm, samples: usize) -> (bool, f64) {
    let n = sigma.dim();
    if n < 2 {
        return (false, f64::INFINITY);
    }
    let dev = orthonormal_pairs(n, samples, sampling::DEFAULT_SEED)
        .iter()
        .map(|(x, y)| (sigma.product(x, y).norm_squared() - 1.0).abs())
        .fold(0.0, f64::max);
    (dev < VCP_TOL, dev)
}

/// Sorted eigenvalues of −τ_X² if they do not depend on the unit vector X.
pub fn is_gvcp(tau: &ThreeForm, samples: usize) -> Option<Vec<f64>> {
    let n = tau.dim();
    if n == 0 || tau.norm() == 0.0 {
        return None;
    }
    let mut xs = sampling::unit_vectors(n, samples, sampling::DEFAULT_SEED);
    xs.extend(sampling::structured_vectors(n));
    let spectra: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| {
            let t = tau.op(x);
            sorted_symmetric_eigen(&(-(&t * &t))).0
        })
        .collect();
    let scale = spectra.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let first = &spectra[0];
    let var = spectra
        .iter()
        .flat_map(|s| s.iter().zip(first).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    if var > GVCP_TOL * scale {
        return None;
    }
    let n_s = spectra.len() as f64;
    Some((0..n).map(|i| spectra.iter().map(|s| s[i]).sum::<f64>() / n_s).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GvcpType {
    VolumeType3,
    G2Type7,
    SU3Type6,
    NotGVCP,
}

impl GvcpType {
    pub fn name(&self) -> &'static str {
        match self {
            GvcpType::VolumeType3 => "VolumeType3",
            GvcpType::G2Type7 => "G2Type7",
            GvcpType::SU3Type6 => "SU3Type6",
            GvcpType::NotGVCP => "NotGVCP",
        }
    }
}

pub fn classify_gvcp(tau: &ThreeForm) -> GvcpType {
    let Some(spec) = is_gvcp(tau, GVCP_SAMPLES) else {
        return GvcpType::NotGVCP;
    };
    let top = *spec.last().unwrap();
    let pattern: Vec<f64> = spec.iter().map(|v| v / top).collect();
    let matches = |zeros: usize| {
        pattern.iter().enumerate().all(|(i, &v)| {
            let target = if i < zeros { 0.0 } else { 1.0 };
            (v - target).abs() < 1e-6
        })
    };
    match tau.dim() {
        3 if matches(1) => GvcpType::VolumeType3,
        7 if matches(1) => GvcpType::G2Type7,
        6 if matches(2) => GvcpType::SU3Type6,
        _ => GvcpType::NotGVCP,
    }
}

/// c > 0 with c·τ a vector cross product, if one exists. c is fitted as the
/// reciprocal median of ‖τ_XY‖ over orthonormal pairs.
pub fn fit_vcp_multiple(tau: &ThreeForm) -> Option<f64> {
    let n = tau.dim();
    if n != 3 && n != 7 {
        return None;
    }
    let mut norms: Vec<f64> = orthonormal_pairs(n, GVCP_SAMPLES, sampling::DEFAULT_SEED ^ 0xc)
        .iter()
        .map(|(x, y)| tau.product(x, y).norm())
        .collect();
    norms.sort_by(f64::total_cmp);
    let med = norms[norms.len() / 2];
    if med <= 1e-12 {
        return None;
    }
    let c = 1.0 / med;
    is_vcp(&tau.scaled(c), GVCP_SAMPLES).0.then_some(c)
}

type C2 = Matrix2<Complex64>;
type V2 = Vector2<Complex64>;

/// Element A ⊕ a of su(2) ⊕ ℂ².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2C2 {
    pub a_mat: C2,
    pub a_vec: V2,
}

impl Su2C2 {
    fn add(&self, o: &Self) -> Self {
        Su2C2 { a_mat: self.a_mat + o.a_mat, a_vec: self.a_vec + o.a_vec }
    }

    fn scale(&self, c: f64) -> Self {
        let c = Complex64::new(c, 0.0);
        Su2C2 { a_mat: self.a_mat * c, a_vec: self.a_vec * c }
    }

    fn euclid_norm(&self) -> f64 {
        (self.a_mat.norm_squared() + self.a_vec.norm_squared()).sqrt()
    }

    fn euclid_dot(&self, o: &Self) -> f64 {
        let m: Complex64 = self.a_mat.iter().zip(o.a_mat.iter()).map(|(x, y)| x.conj() * y).sum();
        let v: Complex64 = self.a_vec.iter().zip(o.a_vec.iter()).map(|(x, y)| x.conj() * y).sum();
        (m + v).re
    }
}

fn ci(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// i·σ_k, orthonormal for ⟨A,B⟩ = −½ Re tr(AB).
pub fn su2_basis() -> [C2; 3] {
    [
        C2::new(ci(0.0, 0.0), ci(0.0, 1.0), ci(0.0, 1.0), ci(0.0, 0.0)),
        C2::new(ci(0.0, 0.0), ci(1.0, 0.0), ci(-1.0, 0.0), ci(0.0, 0.0)),
        C2::new(ci(0.0, 1.0), ci(0.0, 0.0), ci(0.0, 0.0), ci(0.0, -1.0)),
    ]
}

fn su2_inner(a: &C2, b: &C2) -> f64 {
    -0.5 * (a * b).trace().re
}

fn c2_inner(a: &V2, b: &V2) -> f64 {
    (a.adjoint() * b)[(0, 0)].re
}

/// a ∗ b = ab^H − ba^H + i Im(a^H b) id.
pub fn star(a: &V2, b: &V2) -> C2 {
    let im = (a.adjoint() * b)[(0, 0)].im;
    a * b.adjoint() - b * a.adjoint() + C2::identity() * ci(0.0, im)
}

/// [A⊕a, B⊕b]_m = ((1−s)[A,B] − a∗b/(s+1)) ⊕ (Ab − Ba).
pub fn residual_bracket(x: &Su2C2, y: &Su2C2, s: f64) -> Su2C2 {
    let comm = x.a_mat * y.a_mat - y.a_mat * x.a_mat;
    Su2C2 {
        a_mat: comm * ci(1.0 - s, 0.0) - star(&x.a_vec, &y.a_vec) * ci(1.0 / (s + 1.0), 0.0),
        a_vec: x.a_mat * y.a_vec - y.a_mat * x.a_vec,
    }
}

fn check_s(s: f64) -> Result<()> {
    if !s.is_finite() || s == 0.0 || s == -1.0 {
        return Err(Error::InvalidS(s));
    }
    Ok(())
}

/// Orthonormal basis of m = su(2) ⊕ ℂ² for the metric (s+1)⟨A,B⟩ + Re(a^H b).
pub fn su2c2_orthonormal_basis(s: f64) -> Result<Vec<Su2C2>> {
    check_s(s)?;
    if s < -1.0 {
        return Err(Error::InvalidS(s));
    }
    let f = 1.0 / (s + 1.0).sqrt();
    let mut out: Vec<Su2C2> =
        su2_basis().iter().map(|a| Su2C2 { a_mat: a * ci(f, 0.0), a_vec: V2::zeros() }).collect();
    for k in 0..2 {
        for z in [ci(1.0, 0.0), ci(0.0, 1.0)] {
            let mut v = V2::zeros();
            v[k] = z;
            out.push(Su2C2 { a_mat: C2::zeros(), a_vec: v });
        }
    }
    Ok(out)
}

pub fn su2c2_metric(x: &Su2C2, y: &Su2C2, s: f64) -> f64 {
    (s + 1.0) * su2_inner(&x.a_mat, &y.a_mat) + c2_inner(&x.a_vec, &y.a_vec)
}

/// T(x,y,z) = g([x,y]_m, z) in the orthonormal basis of [`su2c2_orthonormal_basis`].
pub fn residual_torsion_form(s: f64) -> Result<ThreeForm> {
    let basis = su2c2_orthonormal_basis(s)?;
    let n = basis.len();
    let mut f = AltForm::zero(n, 3);
    for i in 0..n {
        for j in 0..n {
            let br = residual_bracket(&basis[i], &basis[j], s);
            for k in 0..n {
                f.values[(i * n + j) * n + k] = su2c2_metric(&br, &basis[k], s);
            }
        }
    }
    Ok(ThreeForm(f))
}

#[derive(Debug, Clone)]
pub struct AppendixChecks {
    pub s: f64,
    /// c² fitted by least squares on the first identity and reused for the others.
    pub c2: f64,
    pub vcp1: f64,
    pub vcp2: f64,
    pub vcp3: f64,
    pub cayley_hamilton: f64,
}

impl AppendixChecks {
    pub fn all_pass(&self, tol: f64) -> bool {
        self.vcp1 < tol && self.vcp2 < tol && self.vcp3 < tol
    }
}

fn random_su2(r: &mut rand_chacha::ChaCha8Rng) -> C2 {
    let v = sampling::unit_vector(r, 3);
    let b = su2_basis();
    b[0] * ci(v[0], 0.0) + b[1] * ci(v[1], 0.0) + b[2] * ci(v[2], 0.0)
}

fn random_c2(r: &mut rand_chacha::ChaCha8Rng) -> V2 {
    let v = sampling::unit_vector(r, 4);
    V2::new(ci(v[0], v[1]), ci(v[2], v[3]))
}

/// max ‖AX + XA − tr(AX) id − tr(X) A‖ for A ∈ su(2), X ∈ gl(2,ℂ).
pub fn cayley_hamilton_residual(samples: usize, seed: u64) -> f64 {
    let mut r = sampling::rng(seed);
    (0..samples)
        .map(|_| {
            let a = random_su2(&mut r);
            let g = sampling::gaussian_vector(&mut r, 8);
            let x = C2::new(ci(g[0], g[1]), ci(g[2], g[3]), ci(g[4], g[5]), ci(g[6], g[7]));
            let lhs = a * x + x * a;
            let rhs = C2::identity() * (a * x).trace() + a * x.trace();
            (lhs - rhs).norm()
        })
        .fold(0.0, f64::max)
}

/// Residuals of the three quadratic identities characterizing c·T as a vector
/// cross product on m = su(2) ⊕ ℂ².
pub fn appendix_component_checks(s: f64, samples: usize, seed: u64) -> Result<AppendixChecks> {
    check_s(s)?;
    let mut r = sampling::rng(seed);
    let t = |x: &Su2C2, y: &Su2C2| residual_bracket(x, y, s);
    struct Sample {
        big_a: Su2C2,
        small_a: Su2C2,
        y: Su2C2,
        ip_ab: f64,
        ip_ab_vec: f64,
        na2: f64,
        nv2: f64,
    }
    let data: Vec<Sample> = (0..samples)
        .map(|_| {
            let a = random_su2(&mut r);
            let av = random_c2(&mut r);
            let b = random_su2(&mut r);
            let bv = random_c2(&mut r);
            Sample {
                big_a: Su2C2 { a_mat: a, a_vec: V2::zeros() },
                small_a: Su2C2 { a_mat: C2::zeros(), a_vec: av },
                y: Su2C2 { a_mat: b, a_vec: bv },
                ip_ab: su2_inner(&a, &b),
                ip_ab_vec: c2_inner(&av, &bv),
                na2: su2_inner(&a, &a),
                nv2: c2_inner(&av, &av),
            }
        })
        .collect();

    let vcp1: Vec<(Su2C2, Su2C2)> = data
        .iter()
        .map(|d| {
            let lhs = t(&d.big_a, &t(&d.big_a, &d.y)).scale(1.0 / (s + 1.0));
            let rhs = Su2C2 {
                a_mat: d.big_a.a_mat * ci(d.ip_ab, 0.0) - d.y.a_mat * ci(d.na2, 0.0),
                a_vec: d.y.a_vec * ci(-d.na2, 0.0),
            };
            (lhs, rhs)
        })
        .collect();
    let num: f64 = vcp1.iter().map(|(l, r)| l.euclid_dot(r)).sum();
    let den: f64 = vcp1.iter().map(|(l, _)| l.euclid_dot(l)).sum();
    let c2 = if den > 0.0 { num / den } else { 0.0 };
    let resid = |pairs: &[(Su2C2, Su2C2)]| {
        pairs.iter().map(|(l, r)| l.scale(c2).add(&r.scale(-1.0)).euclid_norm()).fold(0.0, f64::max)
    };

    let vcp2: Vec<(Su2C2, Su2C2)> = data
        .iter()
        .map(|d| {
            let lhs = t(&d.small_a, &t(&d.small_a, &d.y));
            let rhs = Su2C2 {
                a_mat: d.y.a_mat * ci(-d.nv2, 0.0),
                a_vec: d.small_a.a_vec * ci(d.ip_ab_vec, 0.0) - d.y.a_vec * ci(d.nv2, 0.0),
            };
            (lhs, rhs)
        })
        .collect();
    let vcp3: Vec<(Su2C2, Su2C2)> = data
        .iter()
        .map(|d| {
            let lhs = t(&d.big_a, &t(&d.small_a, &d.y)).add(&t(&d.small_a, &t(&d.big_a, &d.y)));
            let rhs = Su2C2 {
                a_mat: d.big_a.a_mat * ci(d.ip_ab_vec, 0.0),
                a_vec: d.small_a.a_vec * ci((s + 1.0) * d.ip_ab, 0.0),
            };
            (lhs, rhs)
        })
        .collect();
    Ok(AppendixChecks {
        s,
        c2,
        vcp1: resid(&vcp1),
        vcp2: resid(&vcp2),
        vcp3: resid(&vcp3),
        cayley_hamilton: cayley_hamilton_residual(samples, seed ^ 0xca),
    })
}
