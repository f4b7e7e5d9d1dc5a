//! Numerical audit of the Calderón–Zygmund size and smoothness estimates of
//! the nine `ε`-plus kernel families.
//!
//! "Bounded constant" is replaced by refinement stability: the empirical
//! constant `C_k` over the `k`-th nested grid may grow by at most
//! [`CzConfig::pass_ratio`] per level. This is a heuristic surrogate and
//! proves nothing; see [`GridSpec`] for the grid layout and the near-diagonal
//! cutoff it implies.

mod grid;
#[cfg(test)]
mod tests;

pub use grid::{AuditPair, AuditTriple, GridSpec, TripleGrid};

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{
    ConeSpec, FamilyEvaluator, KernelEvalConfig, KernelFamily, Space, NORM_REFINEMENT_TOL,
};
use crate::measure::{ball_measure, BallSpec};
use crate::quadrature::ZetaPanels;
use crate::real::Real;
use crate::report::{Check, VerificationReport};
use crate::specfun::{AlphaVector, EpsVector};

/// Which standard estimate an audit measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditKind {
    Growth,
    SmoothX,
    SmoothY,
}

impl fmt::Display for AuditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AuditKind::Growth => "growth",
            AuditKind::SmoothX => "smooth-x",
            AuditKind::SmoothY => "smooth-y",
        })
    }
}

/// Argument varied by a smoothness audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Argument {
    X,
    Y,
}

impl Argument {
    fn kind(self) -> AuditKind {
        match self {
            Argument::X => AuditKind::SmoothX,
            Argument::Y => AuditKind::SmoothY,
        }
    }
}

/// Audit parameters. The default quadrature is coarser than
/// [`KernelEvalConfig::default`]; the constant-defining item of every audit is
/// re-evaluated with the default panels and a warning is attached when the two
/// disagree by more than [`NORM_REFINEMENT_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CzConfig {
    pub grid: GridSpec,
    pub kernel: KernelEvalConfig,
    pub cone: ConeSpec,
    pub pass_ratio: f64,
    pub refinement_check: bool,
}

impl Default for CzConfig {
    fn default() -> Self {
        CzConfig {
            grid: GridSpec::default(),
            kernel: KernelEvalConfig {
                panels: ZetaPanels {
                    near_zero: 24,
                    near_one: 24,
                    order: 10,
                },
                ..KernelEvalConfig::default()
            },
            cone: ConeSpec {
                panels: ZetaPanels {
                    near_zero: 20,
                    near_one: 16,
                    order: 8,
                },
                cross_order: 4,
                ..ConeSpec::default()
            },
            pass_ratio: 1.5,
            refinement_check: true,
        }
    }
}

impl CzConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.kernel.validate()?;
        self.cone.validate()?;
        if !(self.pass_ratio >= 1.0) {
            return Err(Error::Domain(format!(
                "pass ratio must be >= 1, got {}",
                self.pass_ratio
            )));
        }
        Ok(())
    }
}

/// Kernel under audit.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditTarget<T> {
    pub family: KernelFamily,
    pub space: Space,
    pub alpha: AlphaVector<T>,
    pub eps: EpsVector,
}

impl<T: Real> AuditTarget<T> {
    /// Target measured in the family's own space.
    pub fn new(family: KernelFamily, alpha: AlphaVector<T>, eps: EpsVector) -> Self {
        AuditTarget {
            family,
            space: family.default_space(),
            alpha,
            eps,
        }
    }

    fn evaluator(&self, cfg: &CzConfig) -> Result<FamilyEvaluator<T>> {
        FamilyEvaluator::with_space(
            self.family,
            self.space,
            &self.alpha,
            &self.eps,
            &cfg.kernel,
            &cfg.cone,
        )
    }

    fn reference(&self, cfg: &CzConfig) -> Result<FamilyEvaluator<T>> {
        let kernel = KernelEvalConfig {
            panels: ZetaPanels::default(),
            ..cfg.kernel.clone()
        };
        let cone = ConeSpec {
            panels: ZetaPanels::default(),
            cross_order: ConeSpec::default().cross_order,
            ..cfg.cone
        };
        FamilyEvaluator::with_space(
            self.family,
            self.space,
            &self.alpha,
            &self.eps,
            &kernel,
            &cone,
        )
    }
}

/// One evaluated pair or triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub level: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub moved: Option<Vec<f64>>,
    /// `|x − y|`.
    pub separation: f64,
    /// `‖K(x,y)‖_B`, or the norm of the difference for triples.
    pub norm: f64,
    /// `w_α^+(B(x, |x − y|))`.
    pub ball: f64,
    /// `V_{|x−y|}^{α,+}(x)`.
    pub cube: f64,
    /// `|moved − original| / |x − y|`.
    pub rho: Option<f64>,
}

impl Contribution {
    /// `(ball, cube)` constants for exponent `delta`.
    pub fn constants(&self, delta: f64) -> (f64, f64) {
        let factor = self.rho.map_or(1.0, |r| r.powf(delta));
        (
            self.norm * self.ball / factor,
            self.norm * self.cube / factor,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelConstant {
    pub k: usize,
    /// Constant with the ball measure.
    pub c: f64,
    /// Constant with the cube surrogate.
    pub c_cube: f64,
    /// `C_k / C_{k-1}` for `k ≥ 2`.
    pub ratio: Option<f64>,
    pub ratio_cube: Option<f64>,
    pub pass: bool,
}

/// Largest finest-level constant among pairs with `|x − y| ≈ 2^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleMax {
    pub exponent: i32,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateAudit {
    pub family: String,
    pub space: String,
    pub alpha: Vec<f64>,
    pub eps: Vec<u8>,
    pub kind: AuditKind,
    pub delta: Option<f64>,
    pub levels: Vec<LevelConstant>,
    pub per_scale: Vec<ScaleMax>,
    /// Smallest `|x − y|` audited; estimates closer to the diagonal are not probed.
    pub near_diagonal_cutoff: f64,
    pub pass_ratio: f64,
    pub warnings: Vec<String>,
    pub pass: bool,
}

impl EstimateAudit {
    /// Largest level-to-level growth of the ball constant.
    pub fn max_ratio(&self) -> f64 {
        self.levels
            .iter()
            .filter_map(|l| l.ratio)
            .fold(0.0, f64::max)
    }

    /// Smallest level-to-level growth of the ball constant.
    pub fn min_ratio(&self) -> f64 {
        self.levels
            .iter()
            .filter_map(|l| l.ratio)
            .fold(f64::INFINITY, f64::min)
    }
}

/// An audit together with its raw evaluations, which can be rescored at
/// another exponent without re-evaluating kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditRun {
    pub audit: EstimateAudit,
    pub contributions: Vec<Contribution>,
}

impl AuditRun {
    pub fn rescored(&self, delta: f64) -> EstimateAudit {
        let mut a = self.audit.clone();
        a.delta = Some(delta);
        let (levels, per_scale) = score(
            &self.contributions,
            Some(delta),
            a.levels.len(),
            a.pass_ratio,
        );
        a.pass = levels.iter().all(|l| l.pass);
        a.levels = levels;
        a.per_scale = per_scale;
        a
    }
}

fn dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&u, &v)| (u - v) * (u - v))
        .sum::<T>()
        .sqrt()
}

fn to_f64<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.f64()).collect()
}

fn score(
    contributions: &[Contribution],
    delta: Option<f64>,
    levels: usize,
    pass_ratio: f64,
) -> (Vec<LevelConstant>, Vec<ScaleMax>) {
    let delta = delta.unwrap_or(0.0);
    let mut out: Vec<LevelConstant> = Vec::with_capacity(levels);
    for k in 1..=levels {
        let (mut c, mut c_cube) = (0.0f64, 0.0f64);
        for item in contributions.iter().filter(|i| i.level <= k) {
            let (b, q) = item.constants(delta);
            c = c.max(b);
            c_cube = c_cube.max(q);
        }
        let prev = out.last();
        let ratio = prev.map(|p| c / p.c);
        let ratio_cube = prev.map(|p| c_cube / p.c_cube);
        let finite = c.is_finite() && c > 0.0 && c_cube.is_finite() && c_cube > 0.0;
        let stable = |r: Option<f64>| r.is_none_or(|r| r <= pass_ratio);
        out.push(LevelConstant {
            k,
            c,
            c_cube,
            ratio,
            ratio_cube,
            pass: finite && stable(ratio) && stable(ratio_cube),
        });
    }
    let mut per_scale: Vec<ScaleMax> = Vec::new();
    for item in contributions {
        let exponent = item.separation.log2().round() as i32;
        let c = item.constants(delta).0;
        match per_scale.iter_mut().find(|s| s.exponent == exponent) {
            Some(s) => s.c = s.c.max(c),
            None => per_scale.push(ScaleMax { exponent, c }),
        }
    }
    per_scale.sort_by_key(|s| s.exponent);
    (out, per_scale)
}

/// Measures of `B(x, r)` and of the cube surrogate.
fn ball_pair<T: Real>(x: &[T], r: T, alpha: &AlphaVector<T>) -> Result<(f64, f64)> {
    let m = ball_measure(&BallSpec::new(x.to_vec(), r)?, alpha)?;
    Ok((m.value().f64(), m.cube.f64()))
}

fn finish<T: Real>(
    target: &AuditTarget<T>,
    kind: AuditKind,
    delta: Option<f64>,
    grid: &TripleGrid<T>,
    cfg: &CzConfig,
    contributions: Vec<Contribution>,
    recheck: impl Fn(&Contribution) -> Option<f64>,
) -> AuditRun {
    let (levels, per_scale) = score(&contributions, delta, grid.levels(), cfg.pass_ratio);
    let mut warnings = Vec::new();
    let bad = contributions.iter().filter(|c| !c.norm.is_finite()).count();
    if bad > 0 {
        warnings.push(format!("{bad} kernel norms are not finite"));
    }
    if cfg.refinement_check {
        let d = delta.unwrap_or(0.0);
        let worst = contributions
            .iter()
            .max_by(|a, b| a.constants(d).0.total_cmp(&b.constants(d).0));
        if let Some(w) = worst {
            if let Some(fine) = recheck(w) {
                let rel = ((fine - w.norm) / fine).abs();
                if !(rel <= NORM_REFINEMENT_TOL) {
                    warnings.push(format!(
                        "panel refinement changes the extremal norm by {rel:.2e} (relative)"
                    ));
                }
            }
        }
    }
    let audit = EstimateAudit {
        family: target.family.to_string(),
        space: target.space.to_string(),
        alpha: to_f64(target.alpha.entries()),
        eps: target.eps.entries().to_vec(),
        kind,
        delta,
        pass: levels.iter().all(|l| l.pass),
        levels,
        per_scale,
        near_diagonal_cutoff: cfg.grid.diagonal_cutoff(),
        pass_ratio: cfg.pass_ratio,
        warnings,
    };
    AuditRun {
        audit,
        contributions,
    }
}

fn check_target<T: Real>(
    target: &AuditTarget<T>,
    grid: &TripleGrid<T>,
    cfg: &CzConfig,
) -> Result<()> {
    cfg.validate()?;
    target.alpha.check_dim(target.eps.dim())?;
    target.alpha.check_dim(grid.dim())
}

/// `C_k = max ‖K(x,y)‖_B · w_α^+(B(x, |x − y|))` over the level-`k` pairs.
pub fn growth_audit<T: Real>(
    target: &AuditTarget<T>,
    grid: &TripleGrid<T>,
    cfg: &CzConfig,
) -> Result<AuditRun> {
    check_target(target, grid, cfg)?;
    let ev = target.evaluator(cfg)?;
    let contributions = grid
        .pairs()
        .par_iter()
        .map(|p| {
            let r = dist(&p.x, &p.y);
            if !(r > T::zero()) {
                return Err(Error::Precondition("growth audit requires x != y".into()));
            }
            let (ball, cube) = ball_pair(&p.x, r, &target.alpha)?;
            Ok(Contribution {
                level: p.level,
                x: to_f64(&p.x),
                y: to_f64(&p.y),
                moved: None,
                separation: r.f64(),
                norm: ev.norm(&p.x, &p.y).f64(),
                ball,
                cube,
                rho: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let reference = target.reference(cfg)?;
    let recheck = |c: &Contribution| {
        let x: Vec<T> = c.x.iter().map(|&v| T::c(v)).collect();
        let y: Vec<T> = c.y.iter().map(|&v| T::c(v)).collect();
        Some(reference.norm(&x, &y).f64())
    };
    Ok(finish(
        target,
        AuditKind::Growth,
        None,
        grid,
        cfg,
        contributions,
        recheck,
    ))
}

/// `C_k = max ‖K(x,y) − K(x',y)‖_B · w_α^+(B(x, |x − y|)) / (|x − x'| / |x − y|)^δ`
/// (or with `y` moved) over the level-`k` triples.
pub fn smoothness_audit<T: Real>(
    target: &AuditTarget<T>,
    which: Argument,
    delta: f64,
    grid: &TripleGrid<T>,
    cfg: &CzConfig,
) -> Result<AuditRun> {
    check_target(target, grid, cfg)?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Domain(format!(
            "smoothness exponent must be positive, got {delta}"
        )));
    }
    let ev = target.evaluator(cfg)?;
    let triples = match which {
        Argument::X => grid.x_triples(),
        Argument::Y => grid.y_triples(),
    };
    let moved_args = |tr: &AuditTriple<T>| -> (Vec<T>, Vec<T>) {
        match which {
            Argument::X => (tr.moved.clone(), tr.y.clone()),
            Argument::Y => (tr.x.clone(), tr.moved.clone()),
        }
    };
    let contributions = triples
        .par_iter()
        .map(|tr| {
            let r = dist(&tr.x, &tr.y);
            let base = if which == Argument::X { &tr.x } else { &tr.y };
            let shift = dist(base, &tr.moved);
            if !(r > T::two() * shift) {
                return Err(Error::Precondition(
                    "smoothness triple violates |x - y| > 2 |shift|".into(),
                ));
            }
            let (ball, cube) = ball_pair(&tr.x, r, &target.alpha)?;
            let (x2, y2) = moved_args(tr);
            Ok(Contribution {
                level: tr.level,
                x: to_f64(&tr.x),
                y: to_f64(&tr.y),
                moved: Some(to_f64(&tr.moved)),
                separation: r.f64(),
                norm: ev.norm_diff(&tr.x, &tr.y, &x2, &y2).f64(),
                ball,
                cube,
                rho: Some((shift / r).f64()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let reference = target.reference(cfg)?;
    let recheck = |c: &Contribution| {
        let x: Vec<T> = c.x.iter().map(|&v| T::c(v)).collect();
        let y: Vec<T> = c.y.iter().map(|&v| T::c(v)).collect();
        let m: Vec<T> = c.moved.as_ref()?.iter().map(|&v| T::c(v)).collect();
        let v = match which {
            Argument::X => reference.norm_diff(&x, &y, &m, &y),
            Argument::Y => reference.norm_diff(&x, &y, &x, &m),
        };
        Some(v.f64())
    };
    Ok(finish(
        target,
        which.kind(),
        Some(delta),
        grid,
        cfg,
        contributions,
        recheck,
    ))
}

/// Configuration of [`audit_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CzSuiteConfig {
    pub d: usize,
    pub alphas: Vec<f64>,
    /// Parity vectors for the heat families; `None` means all `2^d`.
    pub eps: Option<Vec<EpsVector>>,
    /// Families to audit; `None` means all nine (coordinate 1, and `i = 2` for the tilde family when `d ≥ 2`).
    pub families: Option<Vec<KernelFamily>>,
    /// Exponent override; `None` uses 1 for g-functions and 1/2 for area integrals.
    pub delta: Option<f64>,
    /// Stronger exponent for the negative control on g-function families.
    pub negative_delta: f64,
    /// Minimum growth per level required of the negative control.
    pub negative_growth: f64,
    pub audit: CzConfig,
}

impl Default for CzSuiteConfig {
    fn default() -> Self {
        CzSuiteConfig {
            d: 1,
            alphas: vec![-0.5, 0.0, 1.3],
            eps: None,
            families: None,
            delta: None,
            negative_delta: 1.5,
            negative_growth: 2.0,
            audit: CzConfig::default(),
        }
    }
}

impl CzSuiteConfig {
    pub fn families(&self) -> Vec<KernelFamily> {
        self.families
            .clone()
            .unwrap_or_else(|| KernelFamily::all(0, usize::from(self.d > 1)).to_vec())
    }

    /// Audit targets; Laguerre families fix their own component and appear once per `α`.
    pub fn targets(&self) -> Result<Vec<AuditTarget<f64>>> {
        if self.d == 0 {
            return Err(Error::Precondition("dimension must be positive".into()));
        }
        let eps = self.eps.clone().unwrap_or_else(|| EpsVector::all(self.d));
        for e in &eps {
            if e.dim() != self.d {
                return Err(Error::Dimension {
                    expected: self.d,
                    got: e.dim(),
                });
            }
        }
        let mut out = Vec::new();
        for &a in &self.alphas {
            let alpha = AlphaVector::uniform(self.d, a)?;
            for fam in self.families() {
                match fam {
                    KernelFamily::SVLaguerre | KernelFamily::SHLaguerre(_) => {
                        out.push(AuditTarget::new(
                            fam,
                            alpha.clone(),
                            EpsVector::zero(self.d),
                        ));
                    }
                    KernelFamily::SHTilde { j, .. } => {
                        out.push(AuditTarget::new(
                            fam,
                            alpha.clone(),
                            EpsVector::unit(self.d, j),
                        ));
                    }
                    _ => out.extend(
                        eps.iter()
                            .map(|e| AuditTarget::new(fam, alpha.clone(), e.clone())),
                    ),
                }
            }
        }
        Ok(out)
    }
}

/// Audits of one target: growth, both smoothness audits at the family's
/// exponent, the `δ/2` rescoring, and (g-functions) the negative control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetAudits {
    pub growth: EstimateAudit,
    pub smooth_x: EstimateAudit,
    pub smooth_y: EstimateAudit,
    pub half_delta: [EstimateAudit; 2],
    pub negative: Option<[EstimateAudit; 2]>,
}

impl TargetAudits {
    /// Negative controls pass when every level grows by at least `growth`.
    pub fn negative_detected(&self, growth: f64) -> Option<bool> {
        self.negative
            .as_ref()
            .map(|n| n.iter().all(|a| a.min_ratio() >= growth))
    }
}

pub fn audit_target(
    target: &AuditTarget<f64>,
    grid: &TripleGrid<f64>,
    cfg: &CzSuiteConfig,
) -> Result<TargetAudits> {
    let delta = cfg
        .delta
        .unwrap_or_else(|| target.family.smoothness_exponent());
    let growth = growth_audit(target, grid, &cfg.audit)?.audit;
    let sx = smoothness_audit(target, Argument::X, delta, grid, &cfg.audit)?;
    let sy = smoothness_audit(target, Argument::Y, delta, grid, &cfg.audit)?;
    let negative = (!target.family.is_area()).then(|| {
        [
            sx.rescored(cfg.negative_delta),
            sy.rescored(cfg.negative_delta),
        ]
    });
    Ok(TargetAudits {
        growth,
        half_delta: [sx.rescored(delta / 2.0), sy.rescored(delta / 2.0)],
        smooth_x: sx.audit,
        smooth_y: sy.audit,
        negative,
    })
}

/// Runs every configured audit and collects them into a report: one check per
/// audit, one per `δ/2` rescoring, and one per negative control.
pub fn audit_suite(cfg: &CzSuiteConfig) -> Result<VerificationReport> {
    let grid = TripleGrid::dyadic(cfg.d, &cfg.audit.grid)?;
    let mut report = VerificationReport::new("cz-audit", cfg)?;
    report.warn(format!(
        "estimates are probed down to |x - y| = {} and out to |x| = {}; constants are refinement-stable surrogates, not bounds",
        cfg.audit.grid.diagonal_cutoff(),
        2f64.powi(cfg.audit.grid.max_exp)
    ));
    for target in cfg.targets()? {
        let a = audit_target(&target, &grid, cfg)?;
        let label = format!(
            "{} alpha={:?} eps={}",
            target.family,
            target.alpha.entries(),
            target.eps
        );
        for audit in [&a.growth, &a.smooth_x, &a.smooth_y] {
            for w in &audit.warnings {
                report.warn(format!("{label} {}: {w}", audit.kind));
            }
            let check = Check::at_most(
                format!("{label} {}", audit.kind),
                audit.max_ratio(),
                cfg.audit.pass_ratio,
            );
            report.push(
                Check {
                    pass: audit.pass,
                    ..check
                }
                .with_detail(audit)?,
            );
        }
        for audit in &a.half_delta {
            let check = Check::at_most(
                format!("{label} {} delta/2", audit.kind),
                audit.max_ratio(),
                cfg.audit.pass_ratio,
            );
            report.push(
                Check {
                    pass: audit.pass,
                    ..check
                }
                .with_detail(audit)?,
            );
        }
        if let Some(neg) = &a.negative {
            for audit in neg {
                let mut check = Check::new(
                    format!(
                        "{label} {} negative control delta={}",
                        audit.kind, cfg.negative_delta
                    ),
                    audit.min_ratio() >= cfg.negative_growth,
                );
                check.value = Some(audit.min_ratio());
                check.threshold = Some(cfg.negative_growth);
                report.push(check.with_detail(audit)?);
            }
        }
    }
    Ok(report)
}
