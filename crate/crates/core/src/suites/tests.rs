use super::*;
use crate::report::VerificationReport;

fn failures(r: &VerificationReport) -> Vec<String> {
    r.failures()
        .map(|c| format!("{} = {:?}", c.name, c.value))
        .collect()
}

#[test]
fn alpha_and_dimension_selection() {
    assert_eq!(alpha_vectors(2, &[-0.5, 0.0, 1.3], true).unwrap().len(), 9);
    let uniform = alpha_vectors(2, &[0.0, 1.3], false).unwrap();
    assert_eq!(uniform[1].entries(), &[1.3, 1.3]);
    assert!(check_dims(&[1, 3]).is_err());
    assert!(check_dims(&[]).is_err());
    assert!(eps_vectors(2, &Some(vec![EpsVector::zero(1)])).is_err());
    assert_eq!(eps_vectors(2, &None).unwrap().len(), 4);
}

#[test]
fn partial_configs_fill_defaults() {
    let cfg: GvIdentityConfig = serde_json::from_str(r#"{"dims":[1],"alphas":[0.0]}"#).unwrap();
    assert_eq!(cfg.functions, 20);
    assert_eq!(cfg.tolerance, 1e-3);
    let back: GvIdentityConfig =
        serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn orthonormality_small() {
    let cfg = OrthoConfig {
        dims: vec![1, 2],
        alphas: vec![0.7],
        max_degree: 4,
        ..OrthoConfig::default()
    };
    let r = ortho(&cfg).unwrap();
    assert!(r.pass, "{:?}", failures(&r));
    assert_eq!(r.checks.len(), 2);
    assert_eq!(r.checks[1].detail["indices"], 15);
    // too few nodes to integrate degree-16 products exactly
    let coarse = OrthoConfig {
        nodes: 3,
        max_degree: 8,
        dims: vec![1],
        ..cfg
    };
    assert!(!ortho(&coarse).unwrap().pass);
}

#[test]
fn series_representation_agrees_only_at_moderate_times() {
    let base = KernelXcheckConfig {
        dims: vec![1],
        alphas: vec![0.0],
        points: vec![0.6, 1.8, 3.0],
        ..KernelXcheckConfig::default()
    };
    let late = kernel_xcheck(&KernelXcheckConfig {
        times: vec![0.25, 1.0, 2.0],
        ..base.clone()
    })
    .unwrap();
    assert!(late.pass, "{:?}", failures(&late));
    let early = kernel_xcheck(&KernelXcheckConfig {
        times: vec![0.05],
        ..base
    })
    .unwrap();
    let names: Vec<_> = early.failures().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["series(N=64) vs bessel d=1 alpha=[0.0]"]);
}

#[test]
fn ladder_and_semigroup_small() {
    let r = ladder(&LadderConfig {
        dims: vec![1, 2],
        alphas: vec![0.4],
        max_degree: 5,
        ..LadderConfig::default()
    })
    .unwrap();
    assert!(r.pass, "{:?}", failures(&r));
    let cfg = SemigroupConfig {
        dims: vec![1],
        alphas: vec![1.3],
        kernel_points: vec![(0.5, -1.0)],
        ..SemigroupConfig::default()
    };
    let r = semigroup(&cfg).unwrap();
    assert!(r.pass, "{:?}", failures(&r));
    assert!(r
        .checks
        .iter()
        .any(|c| c.name.starts_with("kernel G_t * G_s")));
}

#[test]
fn gv_identity_ratio_is_quarter_in_one_dimension() {
    let cfg = GvIdentityConfig {
        dims: vec![1],
        alphas: vec![0.0],
        eps: Some(vec![EpsVector::zero(1)]),
        functions: 3,
        ..GvIdentityConfig::default()
    };
    let r = gv_identity(&cfg).unwrap();
    assert!(r.pass, "{:?}", failures(&r));
    let d = &r.checks[0].detail;
    assert!((d["min_ratio"].as_f64().unwrap() - 0.25).abs() < 1e-3);
    assert!((d["max_ratio"].as_f64().unwrap() - 0.25).abs() < 1e-3);
}

#[test]
fn comparability_bracket_and_small_run() {
    let (lo, hi) = ComparabilityConfig::bracket(1, 0.0);
    assert!((lo - 1.0 / 6.0).abs() < 1e-15 && hi == 2.0);
    let (lo, _) = ComparabilityConfig::bracket(2, -1.0);
    assert!((lo - 0.25).abs() < 1e-15);
    let cfg = ComparabilityConfig {
        dims: vec![1],
        alphas: vec![0.5],
        functions: 1,
        ..ComparabilityConfig::default()
    };
    let r = comparability(&cfg).unwrap();
    assert!(r.pass, "{:?}", failures(&r));
    assert!(
        r.checks[0].detail["gv_identity_grid_error"]
            .as_f64()
            .unwrap()
            < 1e-3
    );
}

#[test]
fn reduction_small() {
    let cfg = ReduceConfig {
        dims: vec![1],
        alphas: vec![0.0],
        points_1d: vec![0.4, 1.5],
        ..ReduceConfig::default()
    };
    let r = reduce(&cfg).unwrap();
    assert!(r.pass, "{:?}", failures(&r));
    assert_eq!(r.checks.len(), 3);
}

#[test]
fn lp_and_ap_probes_small() {
    let cfg = LpStabilityConfig {
        alphas: vec![0.0],
        functions: 3,
        exponents: vec![2.0],
        weight_powers: vec![0.5],
        ..LpStabilityConfig::default()
    };
    let r = lp_stability(&cfg).unwrap();
    assert!(r.pass, "{:?}", failures(&r));
    assert_eq!(r.checks.len(), 2 * 3 * 2);
    let cfg = ApConfig {
        dims: vec![1],
        alphas: vec![0.0],
        exponents: vec![2.0],
        weight_powers: vec![0.0, 0.5],
        radius_exps: (-3, 2),
        ..ApConfig::default()
    };
    let r = ap(&cfg).unwrap();
    assert!(r.pass, "{:?}", failures(&r));
    let rows = r.checks[1].detail["constants"].as_array().unwrap();
    assert!((rows[0]["constant"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(rows[1]["constant"].as_f64().unwrap() > 1.0);
}

#[test]
fn determinism_across_thread_counts() {
    let cfg = OrthoConfig {
        dims: vec![2],
        alphas: vec![0.0],
        max_degree: 3,
        ..OrthoConfig::default()
    };
    let r = determinism("ortho", || ortho(&cfg)).unwrap();
    assert!(r.pass);
    assert_eq!(
        r.config["config_hash"],
        crate::report::config_hash(&cfg).unwrap()
    );
}
