use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::quadrature::{ZetaPanels, ZetaTime};
use crate::specfun::{AlphaVector, MultiIndex};
use crate::squarefn::{ConeSpec, DerivativeField, Semigroup, SpectralField};

fn alpha(v: &[f64]) -> AlphaVector<f64> {
    AlphaVector::new(v.to_vec()).unwrap()
}

fn random_f(al: &AlphaVector<f64>, modes: usize, seed: u64) -> SpectralFunction<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpectralFunction::random(al, None, modes, 6, &mut rng).unwrap()
}

fn fast_cfg() -> SquareFnConfig {
    SquareFnConfig {
        refinement_check: false,
        cone: ConeSpec {
            panels: ZetaPanels {
                near_zero: 20,
                near_one: 16,
                order: 10,
            },
            cross_order: 6,
            ..ConeSpec::default()
        },
        ..SquareFnConfig::default()
    }
}

#[test]
fn signature_powers() {
    let eta = ReflectionSignature::new(vec![-1, 1, -1]).unwrap();
    assert_eq!(eta.power(&EpsVector::new(vec![1, 1, 0]).unwrap()), -1);
    assert_eq!(eta.power(&EpsVector::new(vec![1, 0, 1]).unwrap()), 1);
    assert_eq!(eta.apply(&[1.0, 2.0, 3.0]), vec![-1.0, 2.0, -3.0]);
    assert!(ReflectionSignature::new(vec![0, 1]).is_err());
    assert_eq!(ReflectionSignature::all(2).len(), 4);
}

#[test]
fn projections_partition_and_are_idempotent() {
    let al = alpha(&[0.2, 1.0]);
    let f = random_f(&al, 10, 1);
    let mut sum = SpectralFunction::zero(&al);
    for e in EpsVector::all(2) {
        let fe = eps_project(&f, &e).unwrap();
        assert_eq!(eps_project(&fe, &e).unwrap(), fe);
        assert!(fe.supported_in(&e));
        for other in EpsVector::all(2).into_iter().filter(|o| *o != e) {
            assert!(eps_project(&fe, &other).unwrap().is_empty());
        }
        sum = sum.add(&fe).unwrap();
    }
    assert_eq!(sum, f);
    let h = SpectralFunction::basis(&al, &MultiIndex::new(vec![3, 2])).unwrap();
    for e in EpsVector::all(2) {
        let p = eps_project(&h, &e).unwrap();
        assert_eq!(p == h, e.entries() == [1, 0]);
    }
}

#[test]
fn pointwise_projection_matches_spectral() {
    let al = alpha(&[0.5, -0.5]);
    let f = random_f(&al, 8, 2);
    let x = [0.7, -1.3];
    for e in EpsVector::all(2) {
        let direct = eps_project_at(|y| f.eval(y), &e, &x);
        let spec = eps_project(&f, &e).unwrap().eval(&x);
        assert!((direct - spec).abs() < 1e-14);
    }
}

#[test]
fn grid_projection_and_extension() {
    let al = alpha(&[0.3]);
    let f = random_f(&al, 6, 3);
    // Symmetric axis without a node at 0.
    let half: Vec<f64> = (0..20).map(|k| 0.1 + 0.2 * k as f64).collect();
    let axis: Vec<f64> = half
        .iter()
        .rev()
        .map(|v| -v)
        .chain(half.iter().copied())
        .collect();
    let g = GridFunction::sample(vec![axis], 6, |x| f.eval(x)).unwrap();
    let parts: Vec<GridFunction<f64>> = EpsVector::all(1)
        .iter()
        .map(|e| eps_project_grid(&g, e).unwrap())
        .collect();
    for (k, &v) in g.values().iter().enumerate() {
        let s: f64 = parts.iter().map(|p| p.values()[k]).sum();
        assert!((s - v).abs() < 1e-15);
    }
    for (e, p) in EpsVector::all(1).iter().zip(&parts) {
        let back = extend_eps(&restrict_plus(p).unwrap(), e).unwrap();
        assert_eq!(back.axes(), p.axes());
        assert_eq!(back.values(), p.values());
    }
    let skew = GridFunction::sample(vec![vec![-1.0, 0.5, 1.0]], 2, |x| x[0]).unwrap();
    assert!(eps_project_grid(&skew, &EpsVector::zero(1)).is_err());
}

#[test]
fn inner_product_bridge() {
    let al = alpha(&[0.4]);
    let f = random_f(&al, 6, 4);
    let orth = LpGrid::orthant(&al, 10.0, 20, 12).unwrap();
    let full = LpGrid::full_space(&al, 10.0, 20, 12).unwrap();
    for e in EpsVector::all(1) {
        let fe = eps_project(&f, &e).unwrap();
        for (m, _) in fe.terms() {
            let h = SpectralFunction::basis(&al, &MultiIndex::new(m.to_vec())).unwrap();
            let on_full: f64 = full
                .nodes()
                .iter()
                .map(|(x, w)| w * fe.eval(x) * h.eval(x))
                .sum();
            let on_plus: f64 = orth
                .nodes()
                .iter()
                .map(|(x, w)| w * fe.eval(x) * h.eval(x))
                .sum();
            assert!((on_full - 2.0 * on_plus).abs() < 1e-12);
            assert!((on_full - fe.coeff(m)).abs() < 1e-12);
        }
    }
}

#[test]
fn decomposition_norm_bracket() {
    let al = alpha(&[0.0, 0.8]);
    let orth = LpGrid::orthant(&al, 8.0, 8, 8).unwrap();
    let full = LpGrid::full_space(&al, 8.0, 8, 8).unwrap();
    for (seed, p) in [(5, 1.5), (6, 2.0), (7, 4.0)] {
        let f = random_f(&al, 6, seed);
        let r = decomposition_norm_ratio(&f, |x| 1.0 + x[0] * x[0], p, &full, &orth).unwrap();
        assert!(r >= 2f64.powf(-2.0 / p) && r <= 4.0, "p={p}: {r}");
    }
}

#[test]
fn component_field_modulus_is_symmetric() {
    let al = alpha(&[0.3, 1.2]);
    let f = random_f(&al, 8, 8);
    let zt = ZetaTime::from_t(0.4);
    let x = [0.6, 1.1];
    for e in EpsVector::all(2) {
        let fe = eps_project(&f, &e).unwrap();
        for j in 0..2 {
            let field = SpectralField::new(
                &fe,
                crate::kernel::AreaKind::H(j),
                Semigroup::Heat,
                &Setting::FullSpace,
            )
            .unwrap();
            let base = field.value(&x, &zt).abs();
            for eta in ReflectionSignature::all(2) {
                assert!((field.value(&eta.apply(&x), &zt).abs() - base).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn reduction_holds_for_single_mode_and_mixture() {
    let al = alpha(&[0.5]);
    let h = SpectralFunction::basis(&al, &MultiIndex::new(vec![3])).unwrap();
    let points: Vec<Vec<f64>> = vec![vec![0.3], vec![1.2]];
    let rep = reduction_verify(&h, SquareOp::SH(0), &points, &fast_cfg()).unwrap();
    assert!(rep.holds, "{rep:?}");
    for p in &rep.points {
        // one nonzero component: the first link is an identity
        assert!((p.first_ratio - 1.0).abs() < 1e-12);
    }
    let f = SpectralFunction::from_terms(
        &al,
        &[
            (MultiIndex::new(vec![0]), 0.8),
            (MultiIndex::new(vec![1]), -0.5),
            (MultiIndex::new(vec![4]), 0.3),
        ],
    )
    .unwrap();
    let points: Vec<Vec<f64>> = (1..=6).map(|k| vec![0.4 * k as f64]).collect();
    let rep = reduction_verify(&f, SquareOp::SH(0), &points, &fast_cfg()).unwrap();
    assert!(
        rep.holds && rep.max_ratio <= 1.0 + REDUCTION_SLACK,
        "{:?}",
        rep.violations().collect::<Vec<_>>()
    );
    assert!(reduction_verify(&f, SquareOp::GV, &points, &fast_cfg()).is_err());
    assert!(reduction_verify(&f, SquareOp::SV, &[vec![0.0]], &fast_cfg()).is_err());
}
