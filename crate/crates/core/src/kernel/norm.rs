use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::area::AreaKind;
use super::{check_coordinate, ComponentKernel, KernelEvalConfig};
use crate::error::{Error, Result};
use crate::measure::phi_alpha;
use crate::quadrature::{gauss_legendre, TRule, ZetaPanels, ZetaTime};
use crate::real::Real;
use crate::specfun::{AlphaVector, EpsVector};

/// Banach space in which a kernel family `{K_t(x, y)}` is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    /// `L²((0,∞), t dt)`
    L2Tdt,
    /// `L²((0,∞), dt)`
    L2Dt,
    /// `L²(A, t dt dz)`
    ConeTdt,
    /// `L²(A, dt dz)`
    ConeDt,
}

impl Space {
    pub fn is_cone(&self) -> bool {
        matches!(self, Space::ConeTdt | Space::ConeDt)
    }

    pub fn t_weighted(&self) -> bool {
        matches!(self, Space::L2Tdt | Space::ConeTdt)
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Space::L2Tdt => "L2(tdt)",
            Space::L2Dt => "L2(dt)",
            Space::ConeTdt => "L2(A,tdtdz)",
            Space::ConeDt => "L2(A,dtdz)",
        };
        f.write_str(s)
    }
}

/// Parabolic cone `A_β = {(z, t) : |z| < β√t}` and its discretisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub beta: f64,
    pub panels: ZetaPanels,
    /// Gauss–Legendre points per cross-section panel.
    pub cross_order: usize,
    /// Geometric refinement levels toward the orthant boundary `x_j + z_j = 0`.
    pub grading: usize,
}

impl Default for ConeSpec {
    fn default() -> Self {
        ConeSpec {
            beta: 1.0,
            panels: ZetaPanels::default(),
            cross_order: 8,
            grading: 4,
        }
    }
}

impl ConeSpec {
    pub fn with_beta(beta: f64) -> Self {
        ConeSpec {
            beta,
            ..ConeSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::Domain(format!(
                "cone aperture must be positive, got {}",
                self.beta
            )));
        }
        if self.cross_order == 0 || self.panels.order == 0 {
            return Err(Error::Precondition("quadrature orders must be >= 1".into()));
        }
        Ok(())
    }
}

/// The nine kernel families associated with the `ε`-plus square functions:
/// the heat g-functions and area integrals, and the Laguerre area integrals
/// built from `𝕋_t = 2^d T_t^{α,0,+}` and `T̃_t^{j} = 2^d e^{-2t} T_t^{α,e_j,+}`.
///
/// Coordinate indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelFamily {
    GV,
    GH(usize),
    GHStar(usize),
    SV,
    SH(usize),
    SHStar(usize),
    SVLaguerre,
    SHLaguerre(usize),
    /// `δ_i T̃^j` for `i ≠ j`, `δ_j^* T̃^j` for `i = j`.
    SHTilde {
        j: usize,
        i: usize,
    },
}

impl KernelFamily {
    /// One representative of each of the nine families for coordinate `j`.
    pub fn all(j: usize, i: usize) -> [KernelFamily; 9] {
        use KernelFamily::*;
        [
            GV,
            GH(j),
            GHStar(j),
            SV,
            SH(j),
            SHStar(j),
            SVLaguerre,
            SHLaguerre(j),
            SHTilde { j, i },
        ]
    }

    pub fn is_area(&self) -> bool {
        !matches!(
            self,
            KernelFamily::GV | KernelFamily::GH(_) | KernelFamily::GHStar(_)
        )
    }

    pub fn default_space(&self) -> Space {
        use KernelFamily::*;
        match self {
            GV => Space::L2Tdt,
            GH(_) | GHStar(_) => Space::L2Dt,
            SV | SVLaguerre => Space::ConeTdt,
            _ => Space::ConeDt,
        }
    }

    /// Hölder exponent in the smoothness estimates: 1 for g-functions, 1/2 for area integrals.
    pub fn smoothness_exponent(&self) -> f64 {
        if self.is_area() {
            0.5
        } else {
            1.0
        }
    }

    fn derivative(&self) -> AreaKind {
        use KernelFamily::*;
        match *self {
            GV | SV | SVLaguerre => AreaKind::V,
            GH(j) | SH(j) | SHLaguerre(j) => AreaKind::H(j),
            GHStar(j) | SHStar(j) => AreaKind::HStar(j),
            SHTilde { j, i } if i == j => AreaKind::HStar(j),
            SHTilde { i, .. } => AreaKind::H(i),
        }
    }

    /// Component actually evaluated; Laguerre families fix it.
    fn component(&self, eps: &EpsVector) -> EpsVector {
        match *self {
            KernelFamily::SVLaguerre | KernelFamily::SHLaguerre(_) => EpsVector::zero(eps.dim()),
            KernelFamily::SHTilde { j, .. } => EpsVector::unit(eps.dim(), j),
            _ => eps.clone(),
        }
    }

    fn coordinates(&self) -> Vec<usize> {
        use KernelFamily::*;
        match *self {
            GH(j) | GHStar(j) | SH(j) | SHStar(j) | SHLaguerre(j) => vec![j],
            SHTilde { j, i } => vec![j, i],
            _ => vec![],
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use KernelFamily::*;
        match *self {
            GV => write!(f, "gV"),
            GH(j) => write!(f, "gH:{}", j + 1),
            GHStar(j) => write!(f, "gH*:{}", j + 1),
            SV => write!(f, "SV"),
            SH(j) => write!(f, "SH:{}", j + 1),
            SHStar(j) => write!(f, "SH*:{}", j + 1),
            SVLaguerre => write!(f, "SV_T"),
            SHLaguerre(j) => write!(f, "SH_T:{}", j + 1),
            SHTilde { j, i } => write!(f, "SH_Ttilde:{},{}", j + 1, i + 1),
        }
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    /// Names as printed by `Display`; the `:j` suffix is one-based and defaults to 1.
    fn from_str(s: &str) -> Result<Self> {
        use KernelFamily::*;
        let (name, idx) = match s.split_once(':') {
            Some((n, i)) => (n, Some(i)),
            None => (s, None),
        };
        let parse = |v: &str| -> Result<usize> {
            match v.trim().parse::<usize>() {
                Ok(k) if k >= 1 => Ok(k - 1),
                _ => Err(Error::Domain(format!(
                    "bad coordinate index '{v}' in family '{s}'"
                ))),
            }
        };
        let one = || idx.map(parse).unwrap_or(Ok(0));
        Ok(match name {
            "gV" => GV,
            "gH" => GH(one()?),
            "gH*" | "gHstar" => GHStar(one()?),
            "SV" => SV,
            "SH" => SH(one()?),
            "SH*" | "SHstar" => SHStar(one()?),
            "SV_T" => SVLaguerre,
            "SH_T" => SHLaguerre(one()?),
            "SH_Ttilde" => {
                let (j, i) = match idx {
                    Some(p) => match p.split_once(',') {
                        Some((a, b)) => (parse(a)?, parse(b)?),
                        None => (parse(p)?, parse(p)?),
                    },
                    None => (0, 0),
                };
                SHTilde { j, i }
            }
            other => return Err(Error::Domain(format!("unknown kernel family '{other}'"))),
        })
    }
}

/// A norm value and an optional refinement warning.
#[derive(Debug, Clone, PartialEq)]
pub struct NormOutcome<T> {
    pub value: T,
    pub warning: Option<String>,
}

/// Evaluates the vector-valued kernel `K(x, y)` of one family and its norms.
#[derive(Debug, Clone)]
pub struct FamilyEvaluator<T> {
    family: KernelFamily,
    space: Space,
    alpha: AlphaVector<T>,
    comp: ComponentKernel<T>,
    scale: T,
    beta: T,
    cross_order: usize,
    grading: usize,
    rule: TRule<T>,
}

/// Evaluation points `(x, y)` of one kernel term in a (possibly differenced) norm.
type Arg<'a, T> = (&'a [T], &'a [T]);

impl<T: Real> FamilyEvaluator<T> {
    pub fn new(
        family: KernelFamily,
        alpha: &AlphaVector<T>,
        eps: &EpsVector,
        cfg: &KernelEvalConfig,
        cone: &ConeSpec,
    ) -> Result<Self> {
        Self::with_space(family, family.default_space(), alpha, eps, cfg, cone)
    }

    pub fn with_space(
        family: KernelFamily,
        space: Space,
        alpha: &AlphaVector<T>,
        eps: &EpsVector,
        cfg: &KernelEvalConfig,
        cone: &ConeSpec,
    ) -> Result<Self> {
        cfg.validate()?;
        cone.validate()?;
        alpha.check_dim(eps.dim())?;
        for j in family.coordinates() {
            check_coordinate(j, alpha.dim())?;
        }
        if family.is_area() != space.is_cone() {
            return Err(Error::Precondition(format!(
                "family {family} is not measured in {space}"
            )));
        }
        let comp = ComponentKernel::new(alpha, &family.component(eps), cfg.pi_nodes)?;
        let scale = if matches!(
            family,
            KernelFamily::SVLaguerre | KernelFamily::SHLaguerre(_) | KernelFamily::SHTilde { .. }
        ) {
            T::two().powi(alpha.dim() as i32)
        } else {
            T::one()
        };
        let panels = if family.is_area() {
            cone.panels
        } else {
            cfg.panels
        };
        Ok(FamilyEvaluator {
            family,
            space,
            alpha: alpha.clone(),
            comp,
            scale,
            beta: T::c(cone.beta),
            cross_order: cone.cross_order,
            grading: cone.grading,
            rule: panels.t_rule(),
        })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// Replaces the `t` rule, e.g. with a coarser layout for refinement checks.
    pub fn with_panels(mut self, panels: ZetaPanels) -> Self {
        self.rule = panels.t_rule();
        self
    }

    pub fn with_cross_order(mut self, order: usize) -> Self {
        self.cross_order = order.max(1);
        self
    }

    /// `D G_t(w, y)` times the family's semigroup scaling.
    pub fn field(&self, w: &[T], y: &[T], zt: &ZetaTime<T>) -> T {
        let mut s = self.scale;
        if let KernelFamily::SHTilde { .. } = self.family {
            s = s * (-T::two() * zt.t).exp();
        }
        s * self.family.derivative().derivative(&self.comp, w, y, zt)
    }

    /// Pointwise family value: `K_t(x, y)` for g-functions, `K_{z,t}(x, y)` for area families.
    pub fn value(&self, x: &[T], y: &[T], z: &[T], zt: &ZetaTime<T>) -> T {
        if !self.family.is_area() {
            return self.field(x, y, zt);
        }
        let w: Vec<T> = x.iter().zip(z).map(|(&a, &b)| a + b).collect();
        if w.iter().any(|&v| v < T::zero()) {
            return T::zero();
        }
        self.field(&w, y, zt) * phi_alpha(x, z, zt.t, &self.alpha).sqrt()
    }

    /// `‖K(x, y)‖_B`.
    pub fn norm(&self, x: &[T], y: &[T]) -> T {
        self.norm_of(&[(x, y)])
    }

    /// `‖K(x, y) - K(x', y')‖_B`.
    pub fn norm_diff(&self, x: &[T], y: &[T], x2: &[T], y2: &[T]) -> T {
        self.norm_of(&[(x, y), (x2, y2)])
    }

    fn norm_of(&self, args: &[Arg<'_, T>]) -> T {
        let vertical = self.space.t_weighted();
        let vals: Vec<T> = self
            .rule
            .nodes
            .par_iter()
            .zip(self.rule.weights.par_iter())
            .map(|(zt, &w)| {
                let inner = if self.space.is_cone() {
                    self.cross_section(args, zt)
                } else {
                    self.pointwise(args, zt)
                };
                let tw = if vertical { zt.t } else { T::one() };
                w * tw * inner
            })
            .collect();
        vals.iter().fold(T::zero(), |a, &b| a + b).sqrt()
    }

    fn pointwise(&self, args: &[Arg<'_, T>], zt: &ZetaTime<T>) -> T {
        let mut v = self.field(args[0].0, args[0].1, zt);
        if let Some(&(x2, y2)) = args.get(1) {
            v = v - self.field(x2, y2, zt);
        }
        v * v
    }

    /// `∫_{|z|<β√t} |Σ ± K_{z,t}(x_k, y_k)|² dz`.
    fn cross_section(&self, args: &[Arg<'_, T>], zt: &ZetaTime<T>) -> T {
        let radius = self.beta * zt.t.sqrt();
        let d = self.alpha.dim();
        let cuts: Vec<Vec<T>> = (0..d)
            .map(|j| args.iter().map(|a| -a.0[j]).collect())
            .collect();
        let nodes = cone_nodes(radius, &cuts, self.cross_order, self.grading, true);
        let mut acc = T::zero();
        for (z, w) in &nodes {
            let mut v = self.value(args[0].0, args[0].1, z, zt);
            if let Some(&(x2, y2)) = args.get(1) {
                v = v - self.value(x2, y2, z, zt);
            }
            acc = acc + *w * v * v;
        }
        acc
    }
}

/// Lebesgue quadrature on `{|z| < R}` with panel breaks at the cuts `c_{j,k}`.
///
/// With `clip`, only `{z_j ≥ min_k c_{j,k}}` is covered and panels are refined
/// geometrically on the right of each cut (where `x_j + z_j = 0` starts a
/// power-law factor); otherwise the whole ball is covered and refinement is
/// applied on both sides. Outer coordinates use `z_j = ρ sin θ` so that the
/// nested chord lengths stay smooth; the last coordinate is integrated directly.
pub fn cone_nodes<T: Real>(
    radius: T,
    cuts: &[Vec<T>],
    order: usize,
    grading: usize,
    clip: bool,
) -> Vec<(Vec<T>, T)> {
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(cuts.len());
    let layout = CrossLayout {
        order,
        grading,
        clip,
        gl: gauss_legendre::<T>(order),
    };
    collect_cone(radius, cuts, &layout, &mut prefix, T::one(), &mut out);
    out
}

struct CrossLayout<T> {
    order: usize,
    grading: usize,
    clip: bool,
    gl: crate::quadrature::Rule<T>,
}

fn collect_cone<T: Real>(
    rho: T,
    cuts: &[Vec<T>],
    layout: &CrossLayout<T>,
    prefix: &mut Vec<T>,
    weight: T,
    out: &mut Vec<(Vec<T>, T)>,
) {
    let lowest = cuts[0].iter().copied().fold(T::infinity(), T::min);
    if layout.clip && lowest >= rho {
        return;
    }
    let last = cuts.len() == 1;
    // Work in s = z (last coordinate) or s = θ with z = ρ sin θ.
    let to_s = |z: T| {
        if last {
            z
        } else {
            (z / rho).max(-T::one()).min(T::one()).asin()
        }
    };
    let s_hi = if last { rho } else { T::c(FRAC_PI_2) };
    // (position, refine on the left, refine on the right)
    let mut edges: Vec<(T, bool, bool)> = Vec::new();
    let start = if layout.clip && lowest > -rho {
        to_s(lowest)
    } else {
        -s_hi
    };
    edges.push((start, false, layout.clip && lowest > -rho));
    let mut inner: Vec<T> = cuts[0]
        .iter()
        .copied()
        .filter(|&c| c > -rho && c < rho)
        .map(to_s)
        .filter(|&s| s > start)
        .collect();
    inner.sort_by(|a, b| a.partial_cmp(b).expect("finite cut"));
    inner.dedup();
    edges.extend(inner.into_iter().map(|s| (s, !layout.clip, true)));
    edges.push((s_hi, false, false));
    let z_len = |a: T, b: T| if last { b - a } else { rho * (b - a) };
    for pair in edges.windows(2) {
        let ((a, _, grade_a), (b, grade_b, _)) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let mut sub = vec![a];
        if grade_a {
            for k in (1..=layout.grading).rev() {
                sub.push(a + (b - a) * T::c(0.25).powi(k as i32));
            }
        }
        if grade_b {
            let floor = *sub.last().expect("nonempty");
            for k in 1..=layout.grading {
                let e = b - (b - a) * T::c(0.25).powi(k as i32);
                if e > floor {
                    sub.push(e);
                }
            }
        }
        sub.push(b);
        for piece in sub.windows(2) {
            let (p, q) = (piece[0], piece[1]);
            let count = z_len(p, q).ceil().to_usize().unwrap_or(1).clamp(1, 16);
            let step = (q - p) / T::from_usize_lossy(count);
            for c in 0..count {
                let lo = p + step * T::from_usize_lossy(c);
                let rule = layout.gl.mapped(lo, lo + step);
                for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
                    if last {
                        let mut z = prefix.clone();
                        z.push(s);
                        out.push((z, weight * w));
                    } else {
                        let half = rho * s.cos();
                        prefix.push(rho * s.sin());
                        collect_cone(half, &cuts[1..], layout, prefix, weight * w * half, out);
                        prefix.pop();
                    }
                }
            }
        }
    }
    let _ = layout.order;
}

/// `‖K(x, y)‖_B` for one kernel family, with a refinement check against a
/// coarser quadrature.
#[allow(clippy::too_many_arguments)]
pub fn banach_norm<T: Real>(
    family: KernelFamily,
    x: &[T],
    y: &[T],
    space: Space,
    alpha: &AlphaVector<T>,
    eps: &EpsVector,
    cone: &ConeSpec,
    cfg: &KernelEvalConfig,
) -> Result<NormOutcome<T>> {
    let d = alpha.dim();
    if x.len() != d || y.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: x.len().max(y.len()),
        });
    }
    if x.iter().chain(y).any(|&v| !(v >= T::zero())) {
        return Err(Error::Domain(
            "kernel arguments must lie in the closed positive orthant".into(),
        ));
    }
    if x == y {
        return Err(Error::Precondition("banach_norm requires x != y".into()));
    }
    let ev = FamilyEvaluator::with_space(family, space, alpha, eps, cfg, cone)?;
    let value = ev.norm(x, y);
    let panels = if family.is_area() {
        cone.panels
    } else {
        cfg.panels
    };
    let coarse_panels = ZetaPanels {
        order: (panels.order * 3 / 4).max(2),
        ..panels
    };
    let coarse = ev
        .clone()
        .with_panels(coarse_panels)
        .with_cross_order((cone.cross_order * 3 / 4).max(2))
        .norm(x, y);
    let rel = ((value - coarse) / value).abs();
    let warning = if !value.is_finite() {
        Some("norm is not finite".to_string())
    } else if rel.f64() > NORM_REFINEMENT_TOL {
        Some(format!(
            "panel refinement changes the norm by {:.2e} (relative)",
            rel.f64()
        ))
    } else {
        None
    };
    Ok(NormOutcome { value, warning })
}

/// Relative fine/coarse disagreement above which a norm carries a warning.
pub const NORM_REFINEMENT_TOL: f64 = 1e-4;
