//! Seeded sample vectors. Every relation checked here is polynomial in X,
//! so generic points plus a few structured ones stand in for "all X".

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::Vector;

pub const DEFAULT_SEED: u64 = 0x5eed;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

pub fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    loop {
        let v = gaussian_vector(rng, n);
        let r = v.norm();
        if r > 1e-6 {
            return v / r;
        }
    }
}

pub fn unit_vectors(n: usize, count: usize, seed: u64) -> Vec<Vector> {
    let mut r = rng(seed);
    (0..count).map(|_| unit_vector(&mut r, n)).collect()
}

/// Basis vectors and normalized pairwise sums e_i + e_j.
pub fn structured_vectors(n: usize) -> Vec<Vector> {
    let mut out = Vec::new();
    for i in 0..n {
        let mut v = Vector::zeros(n);
        v[i] = 1.0;
        out.push(v);
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut v = Vector::zeros(n);
            v[i] = std::f64::consts::FRAC_1_SQRT_2;
            v[j] = std::f64::consts::FRAC_1_SQRT_2;
            out.push(v);
        }
    }
    out
}

/// The default plan: `count` random unit vectors followed by the structured ones.
pub fn sample_plan(n: usize, count: usize, seed: u64) -> Vec<Vector> {
    let mut v = unit_vectors(n, count, seed);
    v.extend(structured_vectors(n));
    v
}
