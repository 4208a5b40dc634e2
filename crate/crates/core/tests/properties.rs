use std::sync::OnceLock;

use proptest::prelude::*;
use reductive_core::algebra::{skew_spectral_decomposition, Polynomial, Vector};
use reductive_core::catalog::{registry, rescale_relation, CatalogEntry};
use reductive_core::jacobi::{apply_relation, check_ljr, component_split, minimal_ljr, t_apply_with, JacobiFamily};
use reductive_core::sampling;

struct Case {
    entry: CatalogEntry,
    family: JacobiFamily,
    relation: Option<Polynomial>,
}

fn cases() -> &'static [Case] {
    static CASES: OnceLock<Vec<Case>> = OnceLock::new();
    CASES.get_or_init(|| {
        registry()
            .into_iter()
            .map(|entry| {
                let family = JacobiFamily::new(entry.model.clone());
                let v = minimal_ljr(&family).unwrap();
                let relation = v.polynomial.filter(|_| v.exists);
                Case { entry, family, relation }
            })
            .collect()
    })
}

fn point(c: &Case, seed: u64) -> Vector {
    sampling::unit_vectors(c.entry.dim(), 1, seed).pop().unwrap()
}

fn index() -> impl Strategy<Value = usize> {
    0..reductive_core::catalog::REGISTRY.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gauss_lemma(i in index(), seed in any::<u64>()) {
        let c = &cases()[i];
        let x = point(c, seed);
        for r in c.family.series(&x, 5) {
            prop_assert!((&r * &x).norm() < 1e-8 * r.norm().max(1.0));
        }
    }

    #[test]
    fn jacobi_operators_are_symmetric_and_traceless_under_t(i in index(), seed in any::<u64>()) {
        let c = &cases()[i];
        let x = point(c, seed);
        let tau = c.entry.model.tau_op(&x);
        for r in c.family.series(&x, 4) {
            let size = r.norm().max(1.0);
            prop_assert!((&r - r.transpose()).norm() < 1e-8 * size);
            prop_assert!(t_apply_with(&tau, &r).trace().abs() < 1e-8 * size);
        }
    }

    #[test]
    fn homogeneity(i in index(), seed in any::<u64>(), t in 0.2f64..3.0) {
        let c = &cases()[i];
        let x = point(c, seed);
        let a = c.family.series(&x, 4);
        let b = c.family.series(&(&x * t), 4);
        for (k, (ra, rb)) in a.iter().zip(&b).enumerate() {
            let f = t.powi(k as i32 + 2);
            prop_assert!((rb - ra * f).norm() < 1e-8 * (ra.norm() * f).max(1.0));
        }
    }

    #[test]
    fn quartering(i in index(), seed in any::<u64>()) {
        let c = &cases()[i];
        let x = point(c, seed);
        let tau = c.entry.model.tau_op(&x);
        let r0 = &c.family.series(&x, 0)[0];
        let Ok(spec) = skew_spectral_decomposition(&tau, 1e-6) else { return Ok(()); };
        prop_assert!((spec.reconstruct() - &tau).norm() < 1e-8 * tau.norm().max(1.0));
        let split = component_split(&spec, r0);
        prop_assert!(split.sum_residual < 1e-8);
        for comp in split.components {
            let tt = t_apply_with(&tau, &t_apply_with(&tau, &comp.matrix));
            prop_assert!((-tt - &comp.matrix * (comp.eigenvalue / 4.0)).norm() < 1e-8 * r0.norm().max(1.0));
        }
    }

    #[test]
    fn relation_holds_off_the_sampling_plan(i in index(), seed in any::<u64>()) {
        let c = &cases()[i];
        let Some(p) = &c.relation else { return Ok(()); };
        let x = point(c, seed);
        let series = c.family.series(&x, p.coeffs().len() - 1);
        let scale: f64 = p.coeffs().iter().zip(&series).map(|(a, r)| a.abs() * r.norm()).sum::<f64>() + series[0].norm();
        prop_assert!(apply_relation(&c.entry.model, p, &x).norm() < 1e-8 * scale.max(1e-12));
    }

    #[test]
    fn relations_rescale_with_the_metric(i in index(), t in 0.25f64..4.0) {
        let c = &cases()[i];
        let Some(p) = &c.relation else { return Ok(()); };
        let fam = JacobiFamily::with_samples(c.entry.model.rescaled(t), 8, 3);
        prop_assert!(check_ljr(&fam, &rescale_relation(p, t)) < 1e-8);
    }
}
