use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{alpha_vectors, check_dims, label, random_in, rng, GridLayout};
use crate::error::Result;
use crate::kernel::{ComponentKernel, HeatKernel, KernelEvalConfig, SeriesKernel, ZetaTime};
use crate::operators::{
    delta_apply, delta_star_apply, eigenvalue, heat_apply, oscillator_apply, oscillator_factorized,
    poisson_apply, poisson_subordinated, subordinated_multiplier, SpectralFunction,
    SUBORDINATION_TOL,
};
use crate::quadrature::{default_subordination_rule, gauss_laguerre};
use crate::report::{Check, VerificationReport};
use crate::specfun::hermite::HermiteTables;
use crate::specfun::{hermite_gen, phi_factor, AlphaVector, EpsVector, MultiIndex};

fn worst(acc: &mut (f64, serde_json::Value), err: f64, at: impl FnOnce() -> serde_json::Value) {
    if err > acc.0 || err.is_nan() {
        *acc = (err, at());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrthoConfig {
    pub dims: Vec<usize>,
    pub alphas: Vec<f64>,
    pub max_degree: usize,
    /// Gauss–Laguerre nodes per coordinate (exact for `|m|, |n| ≤ 2·nodes - 1`).
    pub nodes: usize,
    pub tolerance: f64,
}

impl Default for OrthoConfig {
    fn default() -> Self {
        OrthoConfig {
            dims: vec![1, 2],
            alphas: vec![-0.5, 0.0, 1.3],
            max_degree: 8,
            nodes: 24,
            tolerance: 1e-8,
        }
    }
}

/// Symmetric rule for `∫_ℝ g(x) |x|^{2a+1} dx` when `g e^{x²}` is a polynomial.
fn symmetric_rule(nodes: usize, a: f64) -> Vec<(f64, f64)> {
    let lag = gauss_laguerre::<f64>(nodes, a);
    let mut out = Vec::with_capacity(2 * nodes);
    for (&r, &w) in lag.nodes.iter().zip(&lag.weights) {
        let x = r.sqrt();
        let wx = 0.5 * w * r.exp();
        out.push((x, wx));
        out.push((-x, wx));
    }
    out
}

/// Gram matrix of `{h_m : |m| ≤ max_degree}` by exact tensor quadrature.
pub fn ortho(cfg: &OrthoConfig) -> Result<VerificationReport> {
    check_dims(&cfg.dims)?;
    let mut report = VerificationReport::new("ortho", cfg)?;
    for &d in &cfg.dims {
        for al in alpha_vectors(d, &cfg.alphas, true)? {
            let axes: Vec<Vec<(f64, f64)>> = al
                .entries()
                .iter()
                .map(|&a| symmetric_rule(cfg.nodes, a))
                .collect();
            let mut nodes: Vec<(Vec<f64>, f64)> = vec![(vec![], 1.0)];
            for axis in &axes {
                nodes = nodes
                    .iter()
                    .flat_map(|(p, w)| {
                        axis.iter().map(move |&(x, wx)| {
                            let mut q = p.clone();
                            q.push(x);
                            (q, w * wx)
                        })
                    })
                    .collect();
            }
            let basis = MultiIndex::all_up_to(d, cfg.max_degree);
            let values: Vec<Vec<f64>> = nodes
                .par_iter()
                .map(|(x, _)| {
                    let tables = HermiteTables::new(cfg.max_degree, &al, x);
                    basis.iter().map(|m| tables.eval(m)).collect()
                })
                .collect();
            let mut acc = (0.0, serde_json::Value::Null);
            for i in 0..basis.len() {
                for j in i..basis.len() {
                    let g: f64 = nodes
                        .iter()
                        .zip(&values)
                        .map(|((_, w), v)| w * v[i] * v[j])
                        .sum();
                    let err = (g - if i == j { 1.0 } else { 0.0 }).abs();
                    worst(
                        &mut acc,
                        err,
                        || serde_json::json!({ "m": basis[i], "n": basis[j], "gram": g }),
                    );
                }
            }
            let detail = serde_json::json!({ "indices": basis.len(), "worst": acc.1 });
            report.push(
                Check::at_most(
                    format!("orthonormality {}", label(d, &al)),
                    acc.0,
                    cfg.tolerance,
                )
                .with_detail(&detail)?,
            );
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LadderConfig {
    pub dims: Vec<usize>,
    pub alphas: Vec<f64>,
    pub max_degree: usize,
    /// Per-coordinate sample values (nonzero); the points are their tensor products.
    pub points: Vec<f64>,
    /// Step of the fourth-order central difference for `∂_j`.
    pub fd_step: f64,
    pub tolerance: f64,
    /// Relative tolerance of the exact coefficient identities (rounding only).
    pub coefficient_tolerance: f64,
    pub random_functions: usize,
    pub modes: usize,
    pub seed: u64,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig {
            dims: vec![1, 2],
            alphas: vec![-0.5, 0.0, 1.3],
            max_degree: 8,
            points: vec![-2.1, -0.7, 0.4, 1.3, 2.6],
            fd_step: 1e-3,
            tolerance: 1e-8,
            coefficient_tolerance: 1e-12,
            random_functions: 5,
            modes: 6,
            seed: 0,
        }
    }
}

fn tensor_points(d: usize, values: &[f64]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// `T_j^α f(x) = ∂_j f(x) + (α_j + 1/2)(f(x) − f(σ_j x))/x_j` with a
/// fourth-order central difference for `∂_j`.
fn dunkl_fd<F: Fn(&[f64]) -> f64>(
    f: F,
    alpha: &AlphaVector<f64>,
    j: usize,
    x: &[f64],
    h: f64,
) -> f64 {
    let at = |s: f64| {
        let mut y = x.to_vec();
        y[j] += s;
        f(&y)
    };
    let deriv = (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h);
    let mut reflected = x.to_vec();
    reflected[j] = -reflected[j];
    deriv + (alpha.get(j) + 0.5) * (f(x) - f(&reflected)) / x[j]
}

fn coeff_distance(a: &SpectralFunction<f64>, b: &SpectralFunction<f64>) -> f64 {
    let scale = a
        .terms()
        .chain(b.terms())
        .map(|(_, c)| c.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let diff = a.add(&b.scale(-1.0)).expect("same alpha");
    diff.terms().map(|(_, c)| c.abs()).fold(0.0, f64::max) / scale
}

/// Ladder relations `δ_j h_m = Φ h_{m−e_j}`, `δ_j^* h_m = Φ h_{m+e_j}` pointwise
/// against a finite-difference Dunkl operator, and the exact coefficient identities.
pub fn ladder(cfg: &LadderConfig) -> Result<VerificationReport> {
    check_dims(&cfg.dims)?;
    let mut report = VerificationReport::new("ladder", cfg)?;
    for &d in &cfg.dims {
        let points = tensor_points(d, &cfg.points);
        for al in alpha_vectors(d, &cfg.alphas, true)? {
            let basis = MultiIndex::all_up_to(d, cfg.max_degree);
            let errs: Vec<(f64, f64, serde_json::Value)> = basis
                .par_iter()
                .map(|m| {
                    let mut lower = (0.0, serde_json::Value::Null);
                    let mut raise = 0.0f64;
                    let h = |y: &[f64]| hermite_gen(m, &al, y);
                    for j in 0..d {
                        let mj = m.entries().expect("valid index")[j];
                        for x in &points {
                            let dunkl = dunkl_fd(h, &al, j, x, cfg.fd_step);
                            let xj = x[j] * h(x);
                            let down = if mj == 0 {
                                0.0
                            } else {
                                phi_factor(mj, al.get(j)) * hermite_gen(&m.lower(j), &al, x)
                            };
                            let up =
                                phi_factor(mj + 1, al.get(j)) * hermite_gen(&m.raise(j), &al, x);
                            let e = (dunkl + xj - down).abs();
                            worst(
                                &mut lower,
                                e,
                                || serde_json::json!({ "m": m, "j": j + 1, "x": x }),
                            );
                            raise = raise.max((-dunkl + xj - up).abs());
                        }
                    }
                    (lower.0, raise, lower.1)
                })
                .collect();
            let (lower, at) = errs.iter().fold((0.0, serde_json::Value::Null), |acc, e| {
                if e.0 > acc.0 {
                    (e.0, e.2.clone())
                } else {
                    acc
                }
            });
            let raise = errs.iter().map(|e| e.1).fold(0.0, f64::max);
            let name = label(d, &al);
            report.push(
                Check::at_most(
                    format!("delta_j h_m = Phi h_(m-e_j) {name}"),
                    lower,
                    cfg.tolerance,
                )
                .with_detail(&at)?,
            );
            report.push(Check::at_most(
                format!("delta_j* h_m = Phi h_(m+e_j) {name}"),
                raise,
                cfg.tolerance,
            ));

            let mut factor = 0.0f64;
            for m in &basis {
                let b = SpectralFunction::basis(&al, m)?;
                factor = factor.max(coeff_distance(
                    &oscillator_factorized(&b)?,
                    &oscillator_apply(&b),
                ));
            }
            let mut adjoint = 0.0f64;
            for k in 0..cfg.random_functions {
                let mut r = rng(cfg.seed, k as u64);
                let f = random_in(&al, None, cfg.modes, cfg.max_degree, &mut r)?;
                let g = random_in(&al, None, cfg.modes, cfg.max_degree, &mut r)?;
                factor = factor.max(coeff_distance(
                    &oscillator_factorized(&f)?,
                    &oscillator_apply(&f),
                ));
                for j in 0..d {
                    let lhs = delta_apply(&f, j)?.inner(&g);
                    let rhs = f.inner(&delta_star_apply(&g, j)?);
                    adjoint = adjoint.max((lhs - rhs).abs() / (f.norm_l2() * g.norm_l2()));
                }
            }
            report.push(Check::at_most(
                format!("(1/2) sum(d*d + dd*) = L {name}"),
                factor,
                cfg.coefficient_tolerance,
            ));
            report.push(Check::at_most(
                format!("<delta_j f, g> = <f, delta_j* g> {name}"),
                adjoint,
                cfg.coefficient_tolerance,
            ));

            let lam = (0..=cfg.max_degree)
                .map(|n| {
                    let direct =
                        2.0 * n as f64 + 2.0 * al.entries().iter().sum::<f64>() + 2.0 * d as f64;
                    (eigenvalue(n, &al) - direct).abs() / direct.abs()
                })
                .fold(0.0, f64::max);
            report.push(Check::at_most(
                format!("lambda_n = 2n + 2|alpha| + 2d {name}"),
                lam,
                4.0 * f64::EPSILON,
            ));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SemigroupConfig {
    pub dims: Vec<usize>,
    pub alphas: Vec<f64>,
    /// `(t, s)` pairs for `T_t T_s = T_{t+s}`.
    pub times: Vec<(f64, f64)>,
    pub random_functions: usize,
    pub modes: usize,
    pub max_degree: usize,
    pub seed: u64,
    /// Relative tolerance of the spectral laws (rounding only).
    pub spectral_tolerance: f64,
    /// `(x, y)` pairs for the kernel composition check in `d = 1`.
    pub kernel_points: Vec<(f64, f64)>,
    pub kernel_times: (f64, f64),
    pub kernel_quadrature: GridLayout,
    pub kernel_tolerance: f64,
    pub subordination_times: Vec<f64>,
    /// Subordination is checked for `λ_n`, `n ≤ subordination_degree`.
    pub subordination_degree: usize,
    pub subordination_tolerance: f64,
}

impl Default for SemigroupConfig {
    fn default() -> Self {
        SemigroupConfig {
            dims: vec![1, 2],
            alphas: vec![-0.5, 0.0, 1.3],
            times: vec![(0.1, 0.3), (0.5, 1.2), (2.0, 0.25)],
            random_functions: 5,
            modes: 6,
            max_degree: 8,
            seed: 0,
            spectral_tolerance: 1e-13,
            kernel_points: vec![(0.5, 1.2), (-0.8, 0.3), (1.5, -1.5), (0.0, 2.0)],
            kernel_times: (0.2, 0.35),
            kernel_quadrature: GridLayout {
                extent: 14.0,
                panels: 40,
                order: 20,
            },
            kernel_tolerance: 1e-5,
            subordination_times: vec![0.05, 0.5, 1.0, 2.0, 5.0],
            subordination_degree: 16,
            subordination_tolerance: SUBORDINATION_TOL,
        }
    }
}

/// Semigroup laws: exact spectral composition for heat and Poisson, kernel
/// composition by quadrature (`d = 1`), and subordination against `e^{-t√λ}`.
pub fn semigroup(cfg: &SemigroupConfig) -> Result<VerificationReport> {
    check_dims(&cfg.dims)?;
    let mut report = VerificationReport::new("semigroup", cfg)?;
    let sub_rule = default_subordination_rule::<f64>();
    for &d in &cfg.dims {
        for al in alpha_vectors(d, &cfg.alphas, false)? {
            let name = label(d, &al);
            let (mut heat, mut poisson, mut contraction, mut sub_warnings) =
                (0.0f64, 0.0f64, 0.0f64, 0usize);
            let lambda0 = eigenvalue(0, &al);
            for k in 0..cfg.random_functions {
                let mut r = rng(cfg.seed, k as u64);
                let f = random_in(&al, None, cfg.modes, cfg.max_degree, &mut r)?;
                let mut variants = vec![(f.clone(), None)];
                for e in EpsVector::all(d) {
                    let fe = random_in(&al, Some(&e), cfg.modes, cfg.max_degree, &mut r)?;
                    variants.push((fe, Some(e)));
                }
                for (g, e) in &variants {
                    for &(t, s) in &cfg.times {
                        let two = heat_apply(
                            &heat_apply(g, s, e.as_ref(), false)?,
                            t,
                            e.as_ref(),
                            false,
                        )?;
                        heat = heat.max(coeff_distance(
                            &two,
                            &heat_apply(g, t + s, e.as_ref(), false)?,
                        ));
                        let two = poisson_apply(
                            &poisson_apply(g, s, e.as_ref(), false)?,
                            t,
                            e.as_ref(),
                            false,
                        )?;
                        poisson = poisson.max(coeff_distance(
                            &two,
                            &poisson_apply(g, t + s, e.as_ref(), false)?,
                        ));
                        let n = heat_apply(g, t, e.as_ref(), false)?.norm_l2()
                            / ((-t * lambda0).exp() * g.norm_l2());
                        contraction = contraction.max(n);
                        if poisson_subordinated(g, t, e.as_ref(), false)?.1.is_some() {
                            sub_warnings += 1;
                        }
                    }
                }
            }
            report.push(Check::at_most(
                format!("T_t T_s = T_(t+s) {name}"),
                heat,
                cfg.spectral_tolerance,
            ));
            report.push(Check::at_most(
                format!("P_t P_s = P_(t+s) {name}"),
                poisson,
                cfg.spectral_tolerance,
            ));
            report.push(Check::at_most(
                format!("|T_t f| <= exp(-t lambda_0)|f| {name}"),
                contraction,
                1.0 + cfg.spectral_tolerance,
            ));

            let mut sub = (0.0, serde_json::Value::Null);
            for n in 0..=cfg.subordination_degree {
                let lam = eigenvalue(n, &al);
                for &t in &cfg.subordination_times {
                    let err = (subordinated_multiplier(lam, t, &sub_rule)
                        - (-t * lam.sqrt()).exp())
                    .abs();
                    worst(&mut sub, err, || serde_json::json!({ "n": n, "t": t }));
                }
            }
            let detail =
                serde_json::json!({ "worst": sub.1, "warnings_on_random_functions": sub_warnings });
            report.push(
                Check::at_most(
                    format!("subordination vs exp(-t sqrt(lambda)) {name}"),
                    sub.0,
                    cfg.subordination_tolerance,
                )
                .with_detail(&detail)?,
            );

            if d == 1 {
                report.push(kernel_composition(cfg, &al)?);
            }
        }
    }
    Ok(report)
}

/// `∫_ℝ G_t(x, w) G_s(w, y) dw_α(w)` against `G_{t+s}(x, y)` for the full kernel.
fn kernel_composition(cfg: &SemigroupConfig, al: &AlphaVector<f64>) -> Result<Check> {
    let hk = HeatKernel::new(al, &KernelEvalConfig::default())?;
    let grid = cfg.kernel_quadrature.orthant(al)?;
    let (t, s) = cfg.kernel_times;
    let rows: Vec<serde_json::Value> = cfg
        .kernel_points
        .par_iter()
        .map(|&(x, y)| {
            let lhs: f64 = grid
                .nodes()
                .iter()
                .map(|(w, wt)| {
                    let w = w[0];
                    wt * (hk.full_value(&[x], &[w], t).value * hk.full_value(&[w], &[y], s).value
                        + hk.full_value(&[x], &[-w], t).value * hk.full_value(&[-w], &[y], s).value)
                })
                .sum();
            let rhs = hk.full_value(&[x], &[y], t + s).value;
            serde_json::json!({ "x": x, "y": y, "composed": lhs, "direct": rhs, "rel": (lhs - rhs).abs() / rhs.abs() })
        })
        .collect();
    let max = rows
        .iter()
        .map(|r| r["rel"].as_f64().unwrap_or(f64::NAN))
        .fold(0.0, |a: f64, b| if b.is_nan() { b } else { a.max(b) });
    Check::at_most(
        format!("kernel G_t * G_s = G_(t+s) {}", label(1, al)),
        max,
        cfg.kernel_tolerance,
    )
    .with_detail(&rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelXcheckConfig {
    pub dims: Vec<usize>,
    pub alphas: Vec<f64>,
    /// Per-coordinate sample values in `(0, 3]`; `x` and `y` range over their tensor products.
    pub points: Vec<f64>,
    pub times: Vec<f64>,
    pub series_order: usize,
    pub pi_nodes: usize,
    pub tolerance: f64,
}

impl Default for KernelXcheckConfig {
    fn default() -> Self {
        KernelXcheckConfig {
            dims: vec![1, 2],
            alphas: vec![-0.5, 0.0, 1.3],
            points: vec![0.6, 1.2, 1.8, 2.4, 3.0],
            times: vec![0.05, 0.1, 0.25, 0.5, 1.0, 2.0],
            series_order: 64,
            pi_nodes: 48,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
struct PerTime {
    t: f64,
    series: f64,
    schlafli: f64,
}

/// Agreement of the truncated series, Bessel and Schläfli forms of
/// `G_t^{α,ε}` relative to the Bessel value, over all `ε`.
pub fn kernel_xcheck(cfg: &KernelXcheckConfig) -> Result<VerificationReport> {
    check_dims(&cfg.dims)?;
    let mut report = VerificationReport::new("kernel-xcheck", cfg)?;
    for &d in &cfg.dims {
        let points = tensor_points(d, &cfg.points);
        for al in alpha_vectors(d, &cfg.alphas, true)? {
            let mut per_t: Vec<PerTime> = cfg
                .times
                .iter()
                .map(|&t| PerTime {
                    t,
                    ..PerTime::default()
                })
                .collect();
            let mut worst_series = (0.0, serde_json::Value::Null);
            let mut worst_schlafli = (0.0, serde_json::Value::Null);
            for e in EpsVector::all(d) {
                let comp = ComponentKernel::new(&al, &e, cfg.pi_nodes)?;
                let series = SeriesKernel::new(&al, Some(&e), cfg.series_order);
                let rows: Vec<Vec<(f64, f64)>> = points
                    .par_iter()
                    .map(|x| {
                        let mut out = Vec::with_capacity(points.len() * cfg.times.len());
                        for y in &points {
                            for &t in &cfg.times {
                                let b = comp.bessel(x, y, t);
                                let s = series.heat(x, y, t).0;
                                let q = comp.schlafli(x, y, &ZetaTime::from_t(t));
                                out.push(((s - b).abs() / b.abs(), (q - b).abs() / b.abs()));
                            }
                        }
                        out
                    })
                    .collect();
                for (xi, row) in rows.iter().enumerate() {
                    for (k, &(rs, rq)) in row.iter().enumerate() {
                        let (yi, ti) = (k / cfg.times.len(), k % cfg.times.len());
                        let at = || serde_json::json!({ "eps": e, "x": points[xi], "y": points[yi], "t": cfg.times[ti] });
                        worst(&mut worst_series, rs, at);
                        worst(&mut worst_schlafli, rq, at);
                        per_t[ti].series = per_t[ti].series.max(rs);
                        per_t[ti].schlafli = per_t[ti].schlafli.max(rq);
                    }
                }
            }
            let name = label(d, &al);
            let detail =
                |w: &serde_json::Value| serde_json::json!({ "worst": w, "per_time": per_t });
            report.push(
                Check::at_most(
                    format!("series(N={}) vs bessel {name}", cfg.series_order),
                    worst_series.0,
                    cfg.tolerance,
                )
                .with_detail(&detail(&worst_series.1))?,
            );
            report.push(
                Check::at_most(
                    format!("schlafli vs bessel {name}"),
                    worst_schlafli.0,
                    cfg.tolerance,
                )
                .with_detail(&detail(&worst_schlafli.1))?,
            );
        }
    }
    Ok(report)
}
