//! Square functions of the heat and Poisson semigroups: vertical and horizontal
//! g-functions, Lusin area integrals over parabolic cones, their `ε`-plus and
//! Laguerre variants, and empirical `L^p` / weak-type probes.
//!
//! Every square function is a weighted `L²` norm of a derivative field
//! `D S_t f(w)` in `(t, z)`. Spectral inputs give the field in closed form (and
//! g-functions an exact double sum in `t`); grid inputs go through kernel
//! quadrature, see [`GridField`].

mod field;
mod lp;

#[cfg(test)]
mod tests;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::kernel::ConeSpec;
use crate::kernel::{cone_nodes, AreaKind};
use crate::measure::{density, phi_alpha, v_cube};
use crate::operators::SpectralFunction;
use crate::quadrature::{TRule, ZetaPanels, ZetaTime};
use crate::real::Real;
use crate::specfun::{AlphaVector, EpsVector};

pub use field::{DerivativeField, GridField, GridFieldConfig, SpectralField};
pub use lp::{weak11_probe, weighted_lp_ratio, LpGrid, LpRatio, Weak11Report};

/// The derivative and measure of one square function; coordinates are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SquareOp {
    GV,
    GH(usize),
    GHStar(usize),
    SV,
    SH(usize),
    SHStar(usize),
}

impl SquareOp {
    pub fn is_area(&self) -> bool {
        matches!(self, SquareOp::SV | SquareOp::SH(_) | SquareOp::SHStar(_))
    }

    /// Vertical square functions carry the measure `t dt`.
    pub fn t_weighted(&self) -> bool {
        matches!(self, SquareOp::GV | SquareOp::SV)
    }

    pub fn derivative(&self) -> AreaKind {
        match *self {
            SquareOp::GV | SquareOp::SV => AreaKind::V,
            SquareOp::GH(j) | SquareOp::SH(j) => AreaKind::H(j),
            SquareOp::GHStar(j) | SquareOp::SHStar(j) => AreaKind::HStar(j),
        }
    }
}

impl fmt::Display for SquareOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SquareOp::GV => write!(f, "gV"),
            SquareOp::GH(j) => write!(f, "gH:{}", j + 1),
            SquareOp::GHStar(j) => write!(f, "gH*:{}", j + 1),
            SquareOp::SV => write!(f, "SV"),
            SquareOp::SH(j) => write!(f, "SH:{}", j + 1),
            SquareOp::SHStar(j) => write!(f, "SH*:{}", j + 1),
        }
    }
}

impl FromStr for SquareOp {
    type Err = Error;

    /// `gV`, `gH:j`, `gH*:j`, `SV`, `SH:j`, `SH*:j` with one-based `j` (default 1).
    fn from_str(s: &str) -> Result<Self> {
        let (name, idx) = s.split_once(':').unwrap_or((s, "1"));
        let j = match idx.trim().parse::<usize>() {
            Ok(k) if k >= 1 => k - 1,
            _ => return Err(Error::Domain(format!("bad coordinate index in '{s}'"))),
        };
        Ok(match name {
            "gV" => SquareOp::GV,
            "gH" => SquareOp::GH(j),
            "gH*" | "gHstar" => SquareOp::GHStar(j),
            "SV" => SquareOp::SV,
            "SH" => SquareOp::SH(j),
            "SH*" | "SHstar" => SquareOp::SHStar(j),
            other => return Err(Error::Domain(format!("unknown square function '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Semigroup {
    Heat,
    Poisson,
}

impl FromStr for Semigroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heat" => Ok(Semigroup::Heat),
            "poisson" => Ok(Semigroup::Poisson),
            other => Err(Error::Domain(format!("unknown semigroup '{other}'"))),
        }
    }
}

/// Full space with `T_t^α`, or the orthant with `T_t^{α,ε,+}` acting on `f^+`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setting {
    FullSpace,
    EpsPlus(EpsVector),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SquareFnKind {
    pub op: SquareOp,
    pub semigroup: Semigroup,
    pub setting: Setting,
}

impl SquareFnKind {
    pub fn new(op: SquareOp, semigroup: Semigroup, setting: Setting) -> Result<Self> {
        if op.is_area() && semigroup == Semigroup::Poisson {
            return Err(Error::Precondition(
                "area integrals of the Poisson semigroup are not provided".into(),
            ));
        }
        Ok(SquareFnKind {
            op,
            semigroup,
            setting,
        })
    }

    pub fn heat(op: SquareOp, setting: Setting) -> Self {
        SquareFnKind {
            op,
            semigroup: Semigroup::Heat,
            setting,
        }
    }

    fn validate(&self, alpha_dim: usize) -> Result<()> {
        if let SquareOp::GH(j) | SquareOp::GHStar(j) | SquareOp::SH(j) | SquareOp::SHStar(j) =
            self.op
        {
            if j >= alpha_dim {
                return Err(Error::Precondition(format!(
                    "coordinate {} out of range for d = {alpha_dim}",
                    j + 1
                )));
            }
        }
        if let Setting::EpsPlus(e) = &self.setting {
            if e.dim() != alpha_dim {
                return Err(Error::Dimension {
                    expected: alpha_dim,
                    got: e.dim(),
                });
            }
        }
        Self::new(self.op, self.semigroup, self.setting.clone()).map(|_| ())
    }
}

impl fmt::Display for SquareFnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.op)?;
        if self.semigroup == Semigroup::Poisson {
            write!(f, ",P")?;
        }
        if let Setting::EpsPlus(e) = &self.setting {
            write!(f, "^{e}+")?;
        }
        Ok(())
    }
}

/// Laguerre area integrals built from `𝕋_t = 2^d T_t^{α,0,+}` and
/// `T̃_t^{j} = 2^d e^{-2t} T_t^{α,e_j,+}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LaguerreKind {
    V,
    H(usize),
    /// `δ_i T̃^j` for `i ≠ j`, `δ_j^* T̃^j` for `i = j`.
    Tilde {
        j: usize,
        i: usize,
    },
}

impl LaguerreKind {
    pub fn component(&self, d: usize) -> EpsVector {
        match *self {
            LaguerreKind::V | LaguerreKind::H(_) => EpsVector::zero(d),
            LaguerreKind::Tilde { j, .. } => EpsVector::unit(d, j),
        }
    }

    pub fn derivative(&self) -> AreaKind {
        match *self {
            LaguerreKind::V => AreaKind::V,
            LaguerreKind::H(j) => AreaKind::H(j),
            LaguerreKind::Tilde { j, i } if i == j => AreaKind::HStar(j),
            LaguerreKind::Tilde { i, .. } => AreaKind::H(i),
        }
    }

    /// Extra exponential decay rate `e^{-shift·t}` of the semigroup.
    pub fn decay_shift(&self) -> f64 {
        match self {
            LaguerreKind::Tilde { .. } => 2.0,
            _ => 0.0,
        }
    }

    fn coordinates(&self) -> Vec<usize> {
        match *self {
            LaguerreKind::V => vec![],
            LaguerreKind::H(j) => vec![j],
            LaguerreKind::Tilde { j, i } => vec![j, i],
        }
    }
}

/// Quadrature settings for square function evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareFnConfig {
    /// `t` panels of the g-function quadrature path.
    pub panels: ZetaPanels,
    /// Cone aperture and discretisation of area integrals.
    pub cone: ConeSpec,
    /// Re-evaluate quadrature paths on a coarser layout and warn on disagreement.
    pub refinement_check: bool,
    pub grid: GridFieldConfig,
}

impl Default for SquareFnConfig {
    fn default() -> Self {
        SquareFnConfig {
            panels: ZetaPanels::default(),
            cone: ConeSpec::default(),
            refinement_check: true,
            grid: GridFieldConfig::default(),
        }
    }
}

impl SquareFnConfig {
    pub fn validate(&self) -> Result<()> {
        self.cone.validate()?;
        if self.panels.order == 0 || self.panels.panel_count() == 0 {
            return Err(Error::Precondition(
                "at least one t panel with order >= 1 is required".into(),
            ));
        }
        self.grid.validate()
    }

    fn coarse(&self) -> Self {
        let coarsen = |p: ZetaPanels| ZetaPanels {
            order: (p.order * 3 / 4).max(2),
            ..p
        };
        let mut out = self.clone();
        out.panels = coarsen(self.panels);
        out.cone.panels = coarsen(self.cone.panels);
        out.cone.cross_order = (self.cone.cross_order * 3 / 4).max(2);
        out
    }
}

/// Relative fine/coarse disagreement above which a value carries a warning.
pub const SQUARE_REFINEMENT_TOL: f64 = 1e-4;

/// A square function value with an error estimate (fine/coarse difference;
/// zero for closed forms) and an optional warning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareFnValue<T> {
    pub value: T,
    pub error: T,
    pub warning: Option<String>,
}

/// Input of a square function: a finite Hermite expansion or grid samples.
#[derive(Debug, Clone, Copy)]
pub enum SquareInput<'a, T> {
    Spectral(&'a SpectralFunction<T>),
    Grid(&'a crate::operators::GridFunction<T>),
}

fn check_point<T: Real>(x: &[T], alpha: &AlphaVector<T>, setting: &Setting) -> Result<()> {
    alpha.check_dim(x.len())?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("evaluation point must be finite".into()));
    }
    if matches!(setting, Setting::EpsPlus(_)) && x.iter().any(|&v| v < T::zero()) {
        return Err(Error::Domain(
            "eps-plus square functions are evaluated on the closed orthant".into(),
        ));
    }
    Ok(())
}

/// Takes a square root, clamping cancellation-level negative squares at zero.
fn checked_sqrt<T: Real>(sq: T, scale: T) -> (T, Option<String>) {
    if sq >= T::zero() {
        return (sq.sqrt(), None);
    }
    let warning = (sq.abs() > T::c(1e-12) * scale.abs())
        .then(|| format!("negative square {:.3e} clamped to zero", sq.f64()));
    (T::zero(), warning)
}

fn build_field<'a, T: Real>(
    kind: &SquareFnKind,
    input: SquareInput<'a, T>,
    alpha: &AlphaVector<T>,
    cfg: &SquareFnConfig,
) -> Result<Box<dyn DerivativeField<T> + 'a>> {
    Ok(match input {
        SquareInput::Spectral(f) => Box::new(SpectralField::new(
            f,
            kind.op.derivative(),
            kind.semigroup,
            &kind.setting,
        )?),
        SquareInput::Grid(g) => Box::new(GridField::new(
            g,
            alpha,
            kind.op.derivative(),
            kind.semigroup,
            &kind.setting,
            &cfg.grid,
        )?),
    })
}

fn input_alpha<T: Real>(
    input: SquareInput<'_, T>,
    alpha: Option<&AlphaVector<T>>,
) -> Result<AlphaVector<T>> {
    match (input, alpha) {
        (SquareInput::Spectral(f), _) => Ok(f.alpha().clone()),
        (SquareInput::Grid(_), Some(a)) => Ok(a.clone()),
        (SquareInput::Grid(_), None) => Err(Error::Precondition(
            "grid input needs the multiplicity vector alpha".into(),
        )),
    }
}

/// A g-function at `x`: the exact double sum in `t` for spectral input, the
/// `t` quadrature for grid input.
pub fn g_function<T: Real>(
    kind: &SquareFnKind,
    input: SquareInput<'_, T>,
    alpha: Option<&AlphaVector<T>>,
    x: &[T],
    cfg: &SquareFnConfig,
) -> Result<SquareFnValue<T>> {
    if kind.op.is_area() {
        return Err(Error::Precondition(format!(
            "{} is an area integral",
            kind.op
        )));
    }
    match input {
        SquareInput::Spectral(f) => {
            let al = f.alpha().clone();
            kind.validate(al.dim())?;
            check_point(x, &al, &kind.setting)?;
            let field = SpectralField::new(f, kind.op.derivative(), kind.semigroup, &kind.setting)?;
            let (sq, scale) = field.closed_form_square(x, kind.op.t_weighted());
            let (value, warning) = checked_sqrt(sq, scale);
            Ok(SquareFnValue {
                value,
                error: T::zero(),
                warning,
            })
        }
        SquareInput::Grid(_) => g_function_quadrature(kind, input, alpha, x, cfg),
    }
}

/// A g-function at `x` by quadrature of `|D S_t f(x)|²` over the `t` panels.
pub fn g_function_quadrature<T: Real>(
    kind: &SquareFnKind,
    input: SquareInput<'_, T>,
    alpha: Option<&AlphaVector<T>>,
    x: &[T],
    cfg: &SquareFnConfig,
) -> Result<SquareFnValue<T>> {
    if kind.op.is_area() {
        return Err(Error::Precondition(format!(
            "{} is an area integral",
            kind.op
        )));
    }
    cfg.validate()?;
    let al = input_alpha(input, alpha)?;
    kind.validate(al.dim())?;
    check_point(x, &al, &kind.setting)?;
    let field = build_field(kind, input, &al, cfg)?;
    let vertical = kind.op.t_weighted();
    let eval = |panels: &ZetaPanels| {
        time_integral(&panels.t_rule(), vertical, |zt| field.value(x, zt).powi(2))
    };
    refined(
        eval(&cfg.panels),
        cfg.refinement_check.then(|| eval(&cfg.coarse().panels)),
    )
}

/// `∫_0^∞ F(t) (t dt | dt)`.
fn time_integral<T: Real, F: Fn(&ZetaTime<T>) -> T + Sync>(
    rule: &TRule<T>,
    vertical: bool,
    f: F,
) -> T {
    let vals: Vec<T> = rule
        .nodes
        .par_iter()
        .zip(rule.weights.par_iter())
        .map(|(zt, &w)| {
            let tw = if vertical { zt.t } else { T::one() };
            w * tw * f(zt)
        })
        .collect();
    vals.iter().fold(T::zero(), |a, &b| a + b)
}

fn refined<T: Real>(fine_sq: T, coarse_sq: Option<T>) -> Result<SquareFnValue<T>> {
    let (value, mut warning) = checked_sqrt(fine_sq, fine_sq);
    if !value.is_finite() {
        return Err(Error::Precondition(
            "square function quadrature is not finite".into(),
        ));
    }
    let Some(c) = coarse_sq else {
        return Ok(SquareFnValue {
            value,
            error: T::zero(),
            warning,
        });
    };
    let coarse = c.max(T::zero()).sqrt();
    let error = (value - coarse).abs();
    if value > T::zero() && (error / value).f64() > SQUARE_REFINEMENT_TOL && warning.is_none() {
        warning = Some(format!(
            "quadrature refinement changes the value by {:.2e} (relative)",
            (error / value).f64()
        ));
    }
    Ok(SquareFnValue {
        value,
        error,
        warning,
    })
}

/// Normalising weight of the area measure at `(x, z, t)`: `φ_α(x, z, t)` on
/// the orthant, `w_α(x+z) / V_{√t}^α(x)` on the full space.
fn area_weight<T: Real>(
    x: &[T],
    z: &[T],
    t: T,
    alpha: &AlphaVector<T>,
    orthant: bool,
    full_volume: T,
) -> T {
    if orthant {
        return phi_alpha(x, z, t, alpha);
    }
    let w: Vec<T> = x.iter().zip(z).map(|(&a, &b)| a + b).collect();
    density(alpha, &w) / full_volume
}

fn cone_integral<T: Real>(
    field: &dyn DerivativeField<T>,
    x: &[T],
    alpha: &AlphaVector<T>,
    orthant: bool,
    vertical: bool,
    cone: &ConeSpec,
) -> Result<T> {
    let beta = T::c(cone.beta);
    let cuts: Vec<Vec<T>> = x.iter().map(|&v| vec![-v]).collect();
    let rule = cone.panels.t_rule::<T>();
    let vals: Vec<Result<T>> = rule
        .nodes
        .par_iter()
        .zip(rule.weights.par_iter())
        .map(|(zt, &wt)| {
            let st = zt.t.sqrt();
            let full_volume = if orthant {
                T::one()
            } else {
                v_cube(x, st, alpha)?
            };
            let nodes = cone_nodes(beta * st, &cuts, cone.cross_order, cone.grading, orthant);
            let mut acc = T::zero();
            let mut w = vec![T::zero(); x.len()];
            for (z, wz) in &nodes {
                for ((slot, &a), &b) in w.iter_mut().zip(x).zip(z) {
                    *slot = a + b;
                }
                let v = field.value(&w, zt);
                acc = acc + *wz * v * v * area_weight(x, z, zt.t, alpha, orthant, full_volume);
            }
            let tw = if vertical { zt.t } else { T::one() };
            Ok(wt * tw * acc)
        })
        .collect();
    let mut total = T::zero();
    for v in vals {
        total = total + v?;
    }
    Ok(total)
}

/// Lusin area integral at `x` over the cone `{|z| < β√t}` of `cfg.cone`.
pub fn area_integral<T: Real>(
    kind: &SquareFnKind,
    input: SquareInput<'_, T>,
    alpha: Option<&AlphaVector<T>>,
    x: &[T],
    cfg: &SquareFnConfig,
) -> Result<SquareFnValue<T>> {
    if !kind.op.is_area() {
        return Err(Error::Precondition(format!(
            "{} is not an area integral",
            kind.op
        )));
    }
    cfg.validate()?;
    let al = input_alpha(input, alpha)?;
    kind.validate(al.dim())?;
    check_point(x, &al, &kind.setting)?;
    let field = build_field(kind, input, &al, cfg)?;
    let orthant = matches!(kind.setting, Setting::EpsPlus(_));
    let vertical = kind.op.t_weighted();
    let fine = cone_integral(field.as_ref(), x, &al, orthant, vertical, &cfg.cone)?;
    let coarse = if cfg.refinement_check {
        Some(cone_integral(
            field.as_ref(),
            x,
            &al,
            orthant,
            vertical,
            &cfg.coarse().cone,
        )?)
    } else {
        None
    };
    refined(fine, coarse)
}

/// Laguerre area integral at `x ∈ ℝ^d_+` of `f` given on the orthant as the
/// restriction of an expansion supported in `N_0` (for `𝕋`) or `N_{e_j}` (for `T̃^j`).
pub fn laguerre_area_integral<T: Real>(
    kind: LaguerreKind,
    f: &SpectralFunction<T>,
    x: &[T],
    cfg: &SquareFnConfig,
) -> Result<SquareFnValue<T>> {
    cfg.validate()?;
    let al = f.alpha().clone();
    let d = al.dim();
    for j in kind.coordinates() {
        if j >= d {
            return Err(Error::Precondition(format!(
                "coordinate {} out of range for d = {d}",
                j + 1
            )));
        }
    }
    let setting = Setting::EpsPlus(kind.component(d));
    check_point(x, &al, &setting)?;
    let field = SpectralField::laguerre(f, kind)?;
    let vertical = matches!(kind, LaguerreKind::V);
    let fine = cone_integral(&field, x, &al, true, vertical, &cfg.cone)?;
    let coarse = if cfg.refinement_check {
        Some(cone_integral(
            &field,
            x,
            &al,
            true,
            vertical,
            &cfg.coarse().cone,
        )?)
    } else {
        None
    };
    refined(fine, coarse)
}

/// Square function value for any kind: dispatches to [`g_function`] or [`area_integral`].
pub fn evaluate<T: Real>(
    kind: &SquareFnKind,
    input: SquareInput<'_, T>,
    alpha: Option<&AlphaVector<T>>,
    x: &[T],
    cfg: &SquareFnConfig,
) -> Result<SquareFnValue<T>> {
    if kind.op.is_area() {
        area_integral(kind, input, alpha, x, cfg)
    } else {
        g_function(kind, input, alpha, x, cfg)
    }
}
