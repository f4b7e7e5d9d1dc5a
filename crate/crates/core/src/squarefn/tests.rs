use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::kernel::{area_kernel, KernelEvalConfig};
use crate::measure::{density, v_plus_cube};
use crate::operators::{
    delta_apply, delta_star_apply, eigenvalue, heat_apply, poisson_apply, GridFunction,
};
use crate::quadrature::left_singular;
use crate::specfun::{hermite_gen, phi_factor, MultiIndex};

fn alpha(v: &[f64]) -> AlphaVector<f64> {
    AlphaVector::new(v.to_vec()).unwrap()
}

fn eps(v: &[u8]) -> EpsVector {
    EpsVector::new(v.to_vec()).unwrap()
}

fn mi(v: &[usize]) -> MultiIndex {
    MultiIndex::new(v.to_vec())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn random_f(
    al: &AlphaVector<f64>,
    e: Option<&EpsVector>,
    modes: usize,
    seed: u64,
) -> SpectralFunction<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpectralFunction::random(al, e, modes, 8, &mut rng).unwrap()
}

fn quick() -> SquareFnConfig {
    SquareFnConfig {
        refinement_check: false,
        ..SquareFnConfig::default()
    }
}

fn spectral(f: &SpectralFunction<f64>) -> SquareInput<'_, f64> {
    SquareInput::Spectral(f)
}

#[test]
fn single_mode_closed_forms() {
    for &(a, m) in &[
        (&[-0.5][..], &[3usize][..]),
        (&[1.3][..], &[2][..]),
        (&[0.0, 0.7][..], &[1, 2][..]),
    ] {
        let al = alpha(a);
        let f = SpectralFunction::basis(&al, &mi(m)).unwrap();
        let lam = eigenvalue(m.iter().sum(), &al);
        let x: Vec<f64> = (0..a.len()).map(|i| 0.4 + 0.9 * i as f64).collect();
        let hm = hermite_gen(&mi(m), &al, &x);

        let gv = g_function(
            &SquareFnKind::heat(SquareOp::GV, Setting::FullSpace),
            spectral(&f),
            None,
            &x,
            &quick(),
        )
        .unwrap();
        assert!(rel(gv.value, hm.abs() / 2.0) < 1e-14);
        let pv = SquareFnKind::new(SquareOp::GV, Semigroup::Poisson, Setting::FullSpace).unwrap();
        assert!(
            rel(
                g_function(&pv, spectral(&f), None, &x, &quick())
                    .unwrap()
                    .value,
                hm.abs() / 2.0
            ) < 1e-14
        );

        let j = m.len() - 1;
        let lower = mi(m).lower(j);
        let phi = phi_factor(m[j], al.get(j));
        let gh = g_function(
            &SquareFnKind::heat(SquareOp::GH(j), Setting::FullSpace),
            spectral(&f),
            None,
            &x,
            &quick(),
        )
        .unwrap();
        let expected = phi * hermite_gen(&lower, &al, &x).abs() / (2.0 * lam).sqrt();
        assert!(
            rel(gh.value, expected) < 1e-14,
            "{} vs {expected}",
            gh.value
        );
        let ph =
            SquareFnKind::new(SquareOp::GH(j), Semigroup::Poisson, Setting::FullSpace).unwrap();
        let expected = phi * hermite_gen(&lower, &al, &x).abs() / (2.0 * lam.sqrt()).sqrt();
        assert!(
            rel(
                g_function(&ph, spectral(&f), None, &x, &quick())
                    .unwrap()
                    .value,
                expected
            ) < 1e-14
        );
    }
}

#[test]
fn field_matches_semigroup_derivatives() {
    let al = alpha(&[0.3, 1.1]);
    let e = eps(&[1, 0]);
    let f = random_f(&al, Some(&e), 5, 4);
    let w = [0.8, 1.4];
    let t = 0.35;
    let zt = ZetaTime::from_t(t);
    let h = 1e-5;
    for (setting, restricted) in [
        (Setting::FullSpace, false),
        (Setting::EpsPlus(e.clone()), true),
    ] {
        let ee = restricted.then_some(&e);
        let heat = |s: f64| heat_apply(&f, s, ee, restricted).unwrap();
        let v = SpectralField::new(&f, AreaKind::V, Semigroup::Heat, &setting)
            .unwrap()
            .value(&w, &zt);
        let fd = (heat(t + h).eval(&w) - heat(t - h).eval(&w)) / (2.0 * h);
        assert!(rel(v, fd) < 1e-8, "{v} vs {fd}");
        for j in 0..2 {
            let d = SpectralField::new(&f, AreaKind::H(j), Semigroup::Heat, &setting)
                .unwrap()
                .value(&w, &zt);
            assert!(rel(d, delta_apply(&heat(t), j).unwrap().eval(&w)) < 1e-12);
            let ds = SpectralField::new(&f, AreaKind::HStar(j), Semigroup::Heat, &setting)
                .unwrap()
                .value(&w, &zt);
            assert!(rel(ds, delta_star_apply(&heat(t), j).unwrap().eval(&w)) < 1e-12);
        }
    }
    let pv = SpectralField::new(&f, AreaKind::V, Semigroup::Poisson, &Setting::FullSpace)
        .unwrap()
        .value(&w, &zt);
    let fd = (poisson_apply(&f, t + h, None, false).unwrap().eval(&w)
        - poisson_apply(&f, t - h, None, false).unwrap().eval(&w))
        / (2.0 * h);
    assert!(rel(pv, fd) < 1e-8);
}

#[test]
fn quadrature_path_matches_closed_form() {
    let ops = [SquareOp::GV, SquareOp::GH(0), SquareOp::GHStar(0)];
    for (d, seed) in [(1usize, 1u64), (2, 2)] {
        let al = AlphaVector::uniform(d, 0.4).unwrap();
        let e = EpsVector::unit(d, 0);
        let f_full = random_f(&al, None, 5, seed);
        let f_eps = random_f(&al, Some(&e), 4, seed + 10);
        let x: Vec<f64> = (0..d).map(|i| 0.6 + 0.5 * i as f64).collect();
        for op in ops {
            for sg in [Semigroup::Heat, Semigroup::Poisson] {
                for (setting, f) in [
                    (Setting::FullSpace, &f_full),
                    (Setting::EpsPlus(e.clone()), &f_eps),
                ] {
                    let kind = SquareFnKind::new(op, sg, setting).unwrap();
                    let closed = g_function(&kind, spectral(f), None, &x, &quick()).unwrap();
                    let quad = g_function_quadrature(
                        &kind,
                        spectral(f),
                        None,
                        &x,
                        &SquareFnConfig::default(),
                    )
                    .unwrap();
                    assert!(
                        rel(quad.value, closed.value) < 1e-6,
                        "{kind}: {} vs {}",
                        quad.value,
                        closed.value
                    );
                    assert!(quad.warning.is_none(), "{kind}: {:?}", quad.warning);
                }
            }
        }
    }
}

#[test]
fn grid_input_matches_spectral() {
    let al = alpha(&[0.5]);
    let e = eps(&[1]);
    let f =
        SpectralFunction::from_terms(&al, &[(mi(&[1]), 0.7), (mi(&[3]), -0.4), (mi(&[5]), 0.2)])
            .unwrap();
    let axis = GridFunction::<f64>::uniform_axis(0.0, 9.0, 721);
    let g = GridFunction::sample(vec![axis], 8, |y| f.eval(y)).unwrap();
    let cfg = SquareFnConfig {
        refinement_check: false,
        panels: ZetaPanels {
            near_zero: 28,
            near_one: 24,
            order: 12,
        },
        ..Default::default()
    };
    for op in [SquareOp::GV, SquareOp::GH(0), SquareOp::GHStar(0)] {
        let kind = SquareFnKind::heat(op, Setting::EpsPlus(e.clone()));
        let x = [0.9];
        let closed = g_function(&kind, spectral(&f), None, &x, &cfg)
            .unwrap()
            .value;
        let grid = g_function(&kind, SquareInput::Grid(&g), Some(&al), &x, &cfg)
            .unwrap()
            .value;
        assert!(rel(grid, closed) < 1e-5, "{op}: {grid} vs {closed}");
    }
    let full = SquareFnKind::heat(SquareOp::GV, Setting::FullSpace);
    assert!(matches!(
        g_function(&full, SquareInput::Grid(&g), Some(&al), &[0.9], &cfg),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn prop_3_1_ratio() {
    for (a, e) in [(&[0.0][..], &[1u8][..]), (&[-0.5, 1.3][..], &[0, 1][..])] {
        let al = alpha(a);
        let ep = eps(e);
        let d = a.len();
        let grid = LpGrid::orthant(&al, 10.0, 20, 12).unwrap();
        let kind = SquareFnKind::heat(SquareOp::GV, Setting::EpsPlus(ep.clone()));
        for seed in 0..3 {
            let f = random_f(&al, Some(&ep), 4, seed);
            let r = weighted_lp_ratio(
                std::slice::from_ref(&kind),
                spectral(&f),
                None,
                |_| 1.0,
                2.0,
                &grid,
                &quick(),
            )
            .unwrap();
            assert!(
                (r.ratio - 0.5f64.powi(d as i32 + 1)).abs() < 1e-3,
                "{}",
                r.ratio
            );
            let scaled = f.scale(-3.5);
            let r2 = weighted_lp_ratio(
                std::slice::from_ref(&kind),
                spectral(&scaled),
                None,
                |_| 1.0,
                2.0,
                &grid,
                &quick(),
            )
            .unwrap();
            assert!(rel(r2.ratio, r.ratio) < 1e-13);
        }
    }
}

#[test]
fn unsupported_inputs_are_rejected() {
    let al = alpha(&[0.0, 0.0]);
    let f = random_f(&al, None, 5, 3);
    let kind = SquareFnKind::heat(SquareOp::GV, Setting::EpsPlus(eps(&[1, 1])));
    assert!(g_function(&kind, spectral(&f), None, &[0.5, 0.5], &quick()).is_err());
    assert!(SquareFnKind::new(SquareOp::SV, Semigroup::Poisson, Setting::FullSpace).is_err());
    let kind = SquareFnKind::heat(SquareOp::GV, Setting::FullSpace);
    assert!(matches!(
        g_function(&kind, spectral(&f), None, &[0.5], &quick()),
        Err(Error::Dimension { .. })
    ));
    let kind = SquareFnKind::heat(SquareOp::GH(2), Setting::FullSpace);
    assert!(g_function(&kind, spectral(&f), None, &[0.5, 0.5], &quick()).is_err());
    let fe = random_f(&al, Some(&eps(&[0, 0])), 3, 3);
    let kind = SquareFnKind::heat(SquareOp::GV, Setting::EpsPlus(eps(&[0, 0])));
    assert!(matches!(
        g_function(&kind, spectral(&fe), None, &[-0.5, 0.5], &quick()),
        Err(Error::Domain(_))
    ));
}

#[test]
fn area_integral_grows_with_aperture() {
    let al = alpha(&[0.3]);
    let e = eps(&[0]);
    let f = random_f(&al, Some(&e), 4, 8);
    let kind = SquareFnKind::heat(SquareOp::SV, Setting::EpsPlus(e));
    let mut prev = 0.0;
    for beta in [0.25, 0.5, 1.0, 2.0] {
        let cfg = SquareFnConfig {
            cone: ConeSpec::with_beta(beta),
            ..quick()
        };
        let v = area_integral(&kind, spectral(&f), None, &[0.7], &cfg)
            .unwrap()
            .value;
        assert!(v > prev, "beta {beta}: {v} <= {prev}");
        prev = v;
    }
}

/// `lim_{β→0} S(β)²/β^d = ω_d ∫ t^{d/2} |F(x,t)|² w(x)/V_{√t}(x) (t dt | dt)`.
fn collapse_limit(
    field: &SpectralField<f64>,
    x: &[f64],
    al: &AlphaVector<f64>,
    vertical: bool,
    orthant: bool,
) -> f64 {
    let omega = [2.0, std::f64::consts::PI][x.len() - 1];
    let rule = ZetaPanels::default().t_rule::<f64>();
    rule.integrate(|zt| {
        let st = zt.t.sqrt();
        let vol = if orthant {
            v_plus_cube(x, st, al).unwrap()
        } else {
            v_cube(x, st, al).unwrap()
        };
        let tw = if vertical { zt.t } else { 1.0 };
        tw * omega * zt.t.powf(x.len() as f64 / 2.0) * field.value(x, zt).powi(2) * density(al, x)
            / vol
    })
}

#[test]
fn area_integral_collapses_to_vertical_limit() {
    let beta = 0.02;
    let cases: &[(&[f64], Setting, SquareOp, &[f64])] = &[
        (&[0.4], Setting::EpsPlus(eps(&[1])), SquareOp::SV, &[0.9]),
        (&[0.0], Setting::FullSpace, SquareOp::SH(0), &[-0.6]),
        (
            &[0.2, -0.5],
            Setting::EpsPlus(eps(&[0, 1])),
            SquareOp::SHStar(1),
            &[0.8, 1.1],
        ),
    ];
    for (a, setting, op, x) in cases {
        let al = alpha(a);
        let e = match setting {
            Setting::EpsPlus(e) => Some(e),
            Setting::FullSpace => None,
        };
        let f = random_f(&al, e, 4, 21);
        let kind = SquareFnKind::heat(*op, setting.clone());
        let cfg = SquareFnConfig {
            cone: ConeSpec {
                cross_order: 6,
                ..ConeSpec::with_beta(beta)
            },
            ..quick()
        };
        let s = area_integral(&kind, spectral(&f), None, x, &cfg)
            .unwrap()
            .value;
        let field = SpectralField::new(&f, op.derivative(), Semigroup::Heat, setting).unwrap();
        let limit = collapse_limit(&field, x, &al, op.t_weighted(), e.is_some()).sqrt()
            * beta.powf(x.len() as f64 / 2.0);
        assert!(rel(s, limit) < 0.05, "{kind}: {s} vs {limit}");
    }
}

#[test]
fn hermite_collapse_ratio_is_one() {
    let al = alpha(&[-0.5]);
    let f = SpectralFunction::basis(&al, &mi(&[0])).unwrap();
    let x = [0.3];
    let g = g_function(
        &SquareFnKind::heat(SquareOp::GV, Setting::FullSpace),
        spectral(&f),
        None,
        &x,
        &quick(),
    )
    .unwrap()
    .value;
    let beta = 0.05;
    let cfg = SquareFnConfig {
        cone: ConeSpec::with_beta(beta),
        ..quick()
    };
    let s = area_integral(
        &SquareFnKind::heat(SquareOp::SV, Setting::FullSpace),
        spectral(&f),
        None,
        &x,
        &cfg,
    )
    .unwrap()
    .value;
    assert!(
        (s / (beta.sqrt() * g) - 1.0).abs() < 0.05,
        "{}",
        s / (beta.sqrt() * g)
    );
}

#[test]
fn area_field_agrees_with_area_kernel() {
    let al = alpha(&[0.6]);
    let e = eps(&[1]);
    let f = SpectralFunction::from_terms(&al, &[(mi(&[1]), 1.0), (mi(&[3]), -0.5)]).unwrap();
    let (x, z, t) = ([0.7], [-0.3], 0.4);
    let zt = ZetaTime::from_t(t);
    let gamma = 2.0 * 0.6 + 1.0;
    let mut rule = left_singular(24, 0.0, 1.0, gamma);
    for k in 1..12 {
        let mut p = crate::quadrature::gauss_legendre::<f64>(24).mapped(k as f64, k as f64 + 1.0);
        for (w, &y) in p.weights.iter_mut().zip(&p.nodes) {
            *w *= y.powf(gamma);
        }
        rule.append(p);
    }
    let cfg = KernelEvalConfig::default();
    let phi = crate::measure::phi_alpha(&x, &z, t, &al);
    for deriv in [AreaKind::V, AreaKind::H(0), AreaKind::HStar(0)] {
        let via_kernel = rule.integrate(|y| {
            area_kernel(deriv, &x, &[y], &z, t, &al, &e, &cfg).unwrap() * f.eval(&[y])
        });
        let field =
            SpectralField::new(&f, deriv, Semigroup::Heat, &Setting::EpsPlus(e.clone())).unwrap();
        let direct = field.value(&[x[0] + z[0]], &zt) * phi.sqrt();
        assert!(
            rel(via_kernel, direct) < 1e-9,
            "{deriv:?}: {via_kernel} vs {direct}"
        );
    }
}

#[test]
fn laguerre_fields_scale_exactly() {
    let al = alpha(&[0.2, 0.9]);
    let d = 2;
    let zt = ZetaTime::from_t(0.3);
    let w = [0.5, 1.2];
    let f0 = random_f(&al, Some(&EpsVector::zero(d)), 4, 5);
    let lag = SpectralField::laguerre(&f0, LaguerreKind::H(1))
        .unwrap()
        .value(&w, &zt);
    let plus = SpectralField::new(
        &f0,
        AreaKind::H(1),
        Semigroup::Heat,
        &Setting::EpsPlus(EpsVector::zero(d)),
    )
    .unwrap();
    assert!(rel(lag, 4.0 * plus.value(&w, &zt)) < 1e-14);

    let e1 = EpsVector::unit(d, 0);
    let f1 = random_f(&al, Some(&e1), 4, 6);
    let tilde = SpectralField::laguerre(&f1, LaguerreKind::Tilde { j: 0, i: 1 })
        .unwrap()
        .value(&w, &zt);
    let base = SpectralField::new(
        &f1,
        AreaKind::H(1),
        Semigroup::Heat,
        &Setting::EpsPlus(e1.clone()),
    )
    .unwrap();
    assert!(rel(tilde / base.value(&w, &zt), 4.0 * (-0.6f64).exp()) < 1e-13);
    assert_eq!(
        LaguerreKind::Tilde { j: 0, i: 0 }.derivative(),
        AreaKind::HStar(0)
    );
    assert!(SpectralField::laguerre(&f1, LaguerreKind::V).is_err());

    let cfg = SquareFnConfig {
        cone: ConeSpec {
            panels: ZetaPanels {
                near_zero: 16,
                near_one: 12,
                order: 8,
            },
            cross_order: 4,
            ..Default::default()
        },
        ..quick()
    };
    let x = [0.6, 0.4];
    let sv_t = laguerre_area_integral(LaguerreKind::V, &f0, &x, &cfg)
        .unwrap()
        .value;
    let sv = area_integral(
        &SquareFnKind::heat(SquareOp::SV, Setting::EpsPlus(EpsVector::zero(d))),
        spectral(&f0),
        None,
        &x,
        &cfg,
    )
    .unwrap()
    .value;
    assert!(rel(sv_t, 4.0 * sv) < 1e-13);
}

#[test]
fn weak_type_probe_properties() {
    let al = alpha(&[0.5]);
    let e = eps(&[0]);
    let f = random_f(&al, Some(&e), 4, 2);
    let grid = LpGrid::orthant(&al, 8.0, 16, 8).unwrap();
    let kind = SquareFnKind::heat(SquareOp::GV, Setting::EpsPlus(e));
    let coarse: Vec<f64> = (1..=8).map(|k| 0.05 * k as f64).collect();
    let fine: Vec<f64> = (1..=32).map(|k| 0.0125 * k as f64).collect();
    let a = weak11_probe(&kind, spectral(&f), None, |_| 1.0, &coarse, &grid, &quick()).unwrap();
    let b = weak11_probe(&kind, spectral(&f), None, |_| 1.0, &fine, &grid, &quick()).unwrap();
    assert!(b.sup >= a.sup);
    let doubled = f.scale(2.0);
    let lam2: Vec<f64> = coarse.iter().map(|l| 2.0 * l).collect();
    let c = weak11_probe(
        &kind,
        spectral(&doubled),
        None,
        |_| 1.0,
        &lam2,
        &grid,
        &quick(),
    )
    .unwrap();
    assert!(rel(c.sup, a.sup) < 1e-13);
    assert!(weak11_probe(
        &SquareFnKind::heat(SquareOp::GV, Setting::FullSpace),
        spectral(&f),
        None,
        |_| 1.0,
        &coarse,
        &grid,
        &quick()
    )
    .is_err());
}

#[test]
fn names_round_trip() {
    for op in [
        SquareOp::GV,
        SquareOp::GH(1),
        SquareOp::GHStar(0),
        SquareOp::SV,
        SquareOp::SH(0),
        SquareOp::SHStar(2),
    ] {
        assert_eq!(op.to_string().parse::<SquareOp>().unwrap(), op);
    }
    assert!("gX".parse::<SquareOp>().is_err());
    assert!("gH:0".parse::<SquareOp>().is_err());
}
