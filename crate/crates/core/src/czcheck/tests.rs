use super::*;
use crate::kernel::{ComponentKernel, ZetaTime};

fn alpha(a: f64) -> AlphaVector<f64> {
    AlphaVector::new(vec![a]).unwrap()
}

fn small_spec() -> GridSpec {
    GridSpec {
        levels: 3,
        min_exp: -4,
        max_exp: 2,
        base_min: -2,
        base_max: 1,
        ..GridSpec::default()
    }
}

fn small_cfg() -> CzConfig {
    CzConfig {
        grid: small_spec(),
        ..CzConfig::default()
    }
}

#[test]
fn dyadic_grid_is_nested_and_separated() {
    let spec = GridSpec::default();
    for d in [1, 2] {
        let g = TripleGrid::<f64>::dyadic(d, &spec).unwrap();
        let counts = g.counts();
        assert!(
            counts
                .windows(2)
                .all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1 && w[0].2 < w[1].2),
            "{counts:?}"
        );
        let seps: Vec<f64> = g.pairs().iter().map(|p| dist(&p.x, &p.y)).collect();
        let min = seps.iter().copied().fold(f64::INFINITY, f64::min);
        let max = seps.iter().copied().fold(0.0, f64::max);
        assert!((min - 2f64.powi(-5)).abs() < 1e-15 && (max - 8.0).abs() < 1e-12);
        let reach = g
            .pairs()
            .iter()
            .map(|p| dist(&p.x, &vec![0.0; d]))
            .fold(0.0, f64::max);
        assert!((reach - 8.0).abs() < 1e-12);
        for t in g.x_triples() {
            assert!(dist(&t.x, &t.y) > 2.0 * dist(&t.x, &t.moved));
        }
        for t in g.y_triples() {
            assert!(dist(&t.x, &t.y) > 2.0 * dist(&t.y, &t.moved));
        }
        let level1_seps = g
            .pairs()
            .iter()
            .filter(|p| p.level == 1)
            .map(|p| dist(&p.x, &p.y));
        assert!(level1_seps.fold(f64::INFINITY, f64::min) >= 0.25 - 1e-15);
    }
}

#[test]
fn grid_spec_validation() {
    assert!(GridSpec {
        levels: 1,
        ..GridSpec::default()
    }
    .validate()
    .is_err());
    assert!(GridSpec {
        base_min: -3,
        ..GridSpec::default()
    }
    .validate()
    .is_err());
    assert!(GridSpec {
        rho_first: 0.5,
        ..GridSpec::default()
    }
    .validate()
    .is_err());
    assert_eq!(GridSpec::default().window(1), (-2, 1));
    assert_eq!(GridSpec::default().window(4), (-5, 3));
}

#[test]
fn degenerate_items_are_rejected() {
    let same = AuditPair {
        x: vec![1.0],
        y: vec![1.0],
        level: 1,
    };
    assert!(matches!(
        TripleGrid::new(1, 1, vec![same], vec![], vec![]),
        Err(Error::Precondition(_))
    ));
    let close = AuditTriple {
        x: vec![1.0],
        y: vec![2.0],
        moved: vec![1.5],
        level: 1,
    };
    assert!(TripleGrid::new(1, 1, vec![], vec![close.clone()], vec![]).is_err());
    assert!(TripleGrid::new(1, 1, vec![], vec![], vec![close]).is_err());
    let outside = AuditPair {
        x: vec![-1.0],
        y: vec![1.0],
        level: 1,
    };
    assert!(TripleGrid::new(1, 1, vec![outside], vec![], vec![]).is_err());
    let ok = AuditTriple {
        x: vec![1.0],
        y: vec![2.0],
        moved: vec![1.4],
        level: 1,
    };
    assert!(TripleGrid::new(1, 1, vec![], vec![ok], vec![]).is_ok());
}

#[test]
fn heat_vertical_growth_is_finite_and_stable() {
    let grid = TripleGrid::dyadic(1, &GridSpec::default()).unwrap();
    let target = AuditTarget::new(KernelFamily::GV, alpha(0.0), EpsVector::zero(1));
    let run = growth_audit(&target, &grid, &CzConfig::default()).unwrap();
    let a = &run.audit;
    assert_eq!(a.levels.len(), 4);
    assert!(a
        .levels
        .iter()
        .all(|l| l.c.is_finite() && l.c > 0.0 && l.c_cube.is_finite()));
    assert!(a.pass && a.warnings.is_empty(), "{a:?}");
    // every dyadic separation 2^-5 .. 2^3 contributes
    let exps: Vec<i32> = a.per_scale.iter().map(|s| s.exponent).collect();
    assert_eq!(exps, (-5..=3).collect::<Vec<_>>());
    assert!(a.per_scale.iter().all(|s| s.c > 0.0));
    // in d = 1 the ball is the cube
    assert!(a
        .levels
        .iter()
        .all(|l| (l.c - l.c_cube).abs() <= 1e-12 * l.c));
}

#[test]
fn difference_norm_vanishes_as_points_merge() {
    let cfg = CzConfig::default();
    for fam in [KernelFamily::GH(0), KernelFamily::SV] {
        let t = AuditTarget::new(fam, alpha(0.4), EpsVector::unit(1, 0));
        let ev = t.evaluator(&cfg).unwrap();
        let (x, y) = ([0.8], [1.6]);
        let diffs: Vec<f64> = (1..=6)
            .map(|n| ev.norm_diff(&x, &y, &[0.8 + 0.2 * 0.5f64.powi(n)], &y))
            .collect();
        assert!(diffs.windows(2).all(|w| w[1] < w[0]), "{fam}: {diffs:?}");
        assert!(diffs[5] < 0.05 * diffs[0]);
    }
}

#[test]
fn rescoring_matches_direct_audit() {
    let grid = TripleGrid::dyadic(1, &small_spec()).unwrap();
    let t = AuditTarget::new(KernelFamily::GH(0), alpha(1.3), EpsVector::zero(1));
    let cfg = small_cfg();
    let run = smoothness_audit(&t, Argument::Y, 1.0, &grid, &cfg).unwrap();
    let direct = smoothness_audit(&t, Argument::Y, 0.5, &grid, &cfg).unwrap();
    assert_eq!(run.rescored(0.5).levels, direct.audit.levels);
    assert_eq!(run.rescored(1.0), run.audit);
}

#[test]
fn g_function_exponents_and_negative_control() {
    let grid = TripleGrid::dyadic(1, &GridSpec::default()).unwrap();
    let cfg = CzSuiteConfig::default();
    for (fam, a, e) in [
        (KernelFamily::GV, -0.5, 1),
        (KernelFamily::GHStar(0), 1.3, 0),
    ] {
        let t = AuditTarget::new(fam, alpha(a), EpsVector::new(vec![e]).unwrap());
        let r = audit_target(&t, &grid, &cfg).unwrap();
        assert!(r.growth.pass && r.smooth_x.pass && r.smooth_y.pass, "{fam}");
        assert_eq!(r.smooth_x.delta, Some(1.0));
        // weaker exponent passes whenever the proved one does
        assert!(r.half_delta.iter().all(|h| h.pass && h.delta == Some(0.5)));
        let neg = r.negative.as_ref().unwrap();
        assert!(
            neg.iter().all(|n| !n.pass && n.min_ratio() >= 2.0),
            "{:?}",
            neg.iter().map(|n| n.min_ratio()).collect::<Vec<_>>()
        );
        assert_eq!(r.negative_detected(2.0), Some(true));
    }
}

#[test]
fn area_family_audit_on_small_grid() {
    let grid = TripleGrid::dyadic(1, &small_spec()).unwrap();
    let cfg = CzSuiteConfig {
        audit: small_cfg(),
        ..CzSuiteConfig::default()
    };
    let t = AuditTarget::new(KernelFamily::SH(0), alpha(0.0), EpsVector::unit(1, 0));
    let r = audit_target(&t, &grid, &cfg).unwrap();
    assert_eq!(r.smooth_x.delta, Some(0.5));
    assert!(r.negative.is_none());
    for a in [&r.growth, &r.smooth_x, &r.smooth_y] {
        assert!(a.pass, "{a:?}");
        assert!(a.warnings.is_empty(), "{:?}", a.warnings);
    }
}

#[test]
fn delta_star_kernel_is_shared_identity() {
    let al = alpha(0.7);
    for e in EpsVector::all(1) {
        let comp = ComponentKernel::new(&al, &e, 48).unwrap();
        let ev = AuditTarget::new(KernelFamily::GHStar(0), al.clone(), e.clone())
            .evaluator(&CzConfig::default())
            .unwrap();
        let zt = ZetaTime::from_t(0.3);
        let (x, y) = ([0.9], [0.4]);
        let lhs = ev.field(&x, &y, &zt);
        let rhs = -comp.delta(&x, &y, &zt, 0) + 2.0 * x[0] * comp.schlafli(&x, &y, &zt);
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn suite_report_round_trips() {
    let cfg = CzSuiteConfig {
        alphas: vec![0.0],
        eps: Some(vec![EpsVector::zero(1)]),
        families: Some(vec![KernelFamily::GH(0)]),
        audit: small_cfg(),
        ..CzSuiteConfig::default()
    };
    let report = audit_suite(&cfg).unwrap();
    assert!(report.pass, "{:?}", report.failures().collect::<Vec<_>>());
    // growth, two smoothness, two delta/2, two negative controls
    assert_eq!(report.checks.len(), 7);
    let back = VerificationReport::from_json(&report.to_json().unwrap()).unwrap();
    assert_eq!(back, report);
    let audit: EstimateAudit = serde_json::from_value(report.checks[1].detail.clone()).unwrap();
    assert_eq!(audit.kind, AuditKind::SmoothX);
    assert_eq!(
        audit_suite(&cfg).unwrap().to_json().unwrap(),
        report.to_json().unwrap()
    );
}

#[test]
fn suite_targets_deduplicate_laguerre_families() {
    let cfg = CzSuiteConfig::default();
    let t = cfg.targets().unwrap();
    // 6 heat families x 2 eps + 3 Laguerre families, for each of 3 alphas
    assert_eq!(t.len(), 3 * (6 * 2 + 3));
    let d2 = CzSuiteConfig {
        d: 2,
        alphas: vec![0.0],
        ..CzSuiteConfig::default()
    };
    assert!(d2
        .families()
        .contains(&KernelFamily::SHTilde { j: 0, i: 1 }));
    assert_eq!(d2.targets().unwrap().len(), 6 * 4 + 3);
}
