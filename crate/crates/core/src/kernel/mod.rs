//! Heat kernel components `G_t^{α,ε}` in series, Bessel and Schläfli form,
//! their time and `δ_j`, `δ_j^*` derivatives, area-integral kernels, and
//! Banach-space norms of the resulting kernel families.
//!
//! Components are evaluated on the closed positive orthant; full-space values
//! at sign-mixed arguments come from the parity `G^{α,ε}(ηx, y) = η^ε G^{α,ε}(x, y)`.

mod area;
mod norm;
mod series;

use serde::{Deserialize, Serialize};

pub use area::{area_kernel, AreaKind};
pub use norm::{
    banach_norm, cone_nodes, ConeSpec, FamilyEvaluator, KernelFamily, NormOutcome, Space,
    NORM_REFINEMENT_TOL,
};
pub use series::SeriesKernel;

use crate::error::{Error, Result};
use crate::measure::{pi_beta_rule, PiBetaRule};
use crate::quadrature::ZetaPanels;
pub use crate::quadrature::ZetaTime;
use crate::real::Real;
use crate::specfun::{bessel_i_ratio_scaled, AlphaVector, EpsVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Series,
    Bessel,
    Schlafli,
}

impl std::str::FromStr for Representation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "series" => Ok(Representation::Series),
            "bessel" => Ok(Representation::Bessel),
            "schlafli" => Ok(Representation::Schlafli),
            other => Err(Error::Domain(format!("unknown representation {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelEvalConfig {
    pub representation: Representation,
    /// Series truncation: all `m` with `|m| ≤ series_order`.
    pub series_order: usize,
    /// `Π_β` nodes per coordinate.
    pub pi_nodes: usize,
    pub panels: ZetaPanels,
    /// Tail-bound level above which series evaluations carry a warning.
    pub tail_tolerance: f64,
}

impl Default for KernelEvalConfig {
    fn default() -> Self {
        KernelEvalConfig {
            representation: Representation::Bessel,
            series_order: 64,
            pi_nodes: 48,
            panels: ZetaPanels::default(),
            tail_tolerance: 1e-9,
        }
    }
}

impl KernelEvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.series_order < 1 || self.pi_nodes < 1 || self.panels.order < 1 {
            return Err(Error::Precondition(
                "series order, Pi nodes and panel order must be >= 1".into(),
            ));
        }
        if self.panels.near_zero + self.panels.near_one == 0 {
            return Err(Error::Precondition(
                "at least one zeta panel is required".into(),
            ));
        }
        Ok(())
    }
}

/// `q_±(x, y, s) = |x|² + |y|² ± 2 Σ x_i y_i s_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QPair<T> {
    pub q_plus: T,
    pub q_minus: T,
}

pub fn q_pm<T: Real>(x: &[T], y: &[T], s: &[T]) -> QPair<T> {
    // Written as sums of squares so that both forms stay nonnegative in
    // floating point: |x|² + |y|² ± 2Σ x_i y_i s_i = Σ (x_i ± y_i s_i)² + y_i²(1 - s_i²).
    let mut qp = T::zero();
    let mut qm = T::zero();
    for ((&xi, &yi), &si) in x.iter().zip(y).zip(s) {
        let rest = yi * yi * (T::one() - si * si);
        qp = qp + (xi + yi * si) * (xi + yi * si) + rest;
        qm = qm + (xi - yi * si) * (xi - yi * si) + rest;
    }
    QPair {
        q_plus: qp,
        q_minus: qm,
    }
}

/// Component selector for the heat kernel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EpsSelector {
    Component(EpsVector),
    Full,
}

/// Per-coordinate tilted moments `(∫ e^{b(s-1)} Π(ds), ∫ (1-s) e^{b(s-1)} Π(ds))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentBackend {
    /// Quadrature against the `Π_β` rule.
    Quadrature,
    /// Closed forms through `I_β(b)/b^β` and `I_{β+1}(b)/b^{β+1}`.
    BesselRatio,
}

/// Evaluator for one component `G^{α,ε}` with the `Π_{α+ε}` rule prepared once.
#[derive(Debug, Clone)]
pub struct ComponentKernel<T> {
    alpha: AlphaVector<T>,
    eps: EpsVector,
    beta: Vec<T>,
    pi: PiBetaRule<T>,
    backend: MomentBackend,
}

/// Shared pieces of the Schläfli form at one `(x, y, ζ)`.
struct SchlafliParts<T> {
    /// `2^{-d} ((1-ζ²)/(2ζ))^{d+|α|+|ε|} e^{-|x-y|²/(4ζ) - ζ|x+y|²/4}`.
    pref: T,
    m0: Vec<T>,
    n1: Vec<T>,
}

impl<T: Real> ComponentKernel<T> {
    pub fn new(alpha: &AlphaVector<T>, eps: &EpsVector, pi_nodes: usize) -> Result<Self> {
        alpha.check_dim(eps.dim())?;
        let beta = alpha.shifted(eps);
        let pi = pi_beta_rule(&beta, pi_nodes)?;
        Ok(ComponentKernel {
            alpha: alpha.clone(),
            eps: eps.clone(),
            beta,
            pi,
            backend: MomentBackend::Quadrature,
        })
    }

    pub fn with_backend(mut self, backend: MomentBackend) -> Self {
        self.backend = backend;
        self
    }

    pub fn alpha(&self) -> &AlphaVector<T> {
        &self.alpha
    }

    pub fn eps(&self) -> &EpsVector {
        &self.eps
    }

    pub fn dim(&self) -> usize {
        self.alpha.dim()
    }

    /// `d + |α| + |ε|`.
    fn exponent(&self) -> T {
        T::from_usize_lossy(self.dim() + self.eps.norm1()) + self.alpha.norm1()
    }

    fn moments(&self, i: usize, b: T) -> (T, T) {
        match self.backend {
            MomentBackend::Quadrature => self.pi.coords[i].tilted_moments(b),
            MomentBackend::BesselRatio => {
                let beta = self.beta[i];
                let m0 = bessel_i_ratio_scaled(beta, b);
                (m0, m0 - b * bessel_i_ratio_scaled(beta + T::one(), b))
            }
        }
    }

    fn parts(&self, x: &[T], y: &[T], zt: &ZetaTime<T>) -> SchlafliParts<T> {
        let d = self.dim();
        let z = zt.zeta;
        let a = zt.sech2 / (T::two() * z);
        let mut dist2 = T::zero();
        let mut sum2 = T::zero();
        let mut m0 = Vec::with_capacity(d);
        let mut n1 = Vec::with_capacity(d);
        for i in 0..d {
            dist2 = dist2 + (x[i] - y[i]) * (x[i] - y[i]);
            sum2 = sum2 + (x[i] + y[i]) * (x[i] + y[i]);
            let (p, q) = self.moments(i, x[i] * y[i] * a);
            m0.push(p);
            n1.push(q);
        }
        let log_pref = self.exponent() * a.ln()
            - dist2 / (T::c(4.0) * z)
            - z * sum2 / T::c(4.0)
            - T::from_usize_lossy(d) * T::c(2f64.ln());
        SchlafliParts {
            pref: log_pref.exp(),
            m0,
            n1,
        }
    }

    /// `(xy)^ε`.
    fn xy_eps(&self, x: &[T], y: &[T]) -> T {
        (0..self.dim())
            .filter(|&i| self.eps.get(i) == 1)
            .map(|i| x[i] * y[i])
            .fold(T::one(), |a, b| a * b)
    }

    /// `G_t^{α,ε}(x, y)` from the Schläfli integral.
    pub fn schlafli(&self, x: &[T], y: &[T], zt: &ZetaTime<T>) -> T {
        let p = self.parts(x, y, zt);
        p.pref * self.xy_eps(x, y) * p.m0.iter().copied().fold(T::one(), |a, b| a * b)
    }

    /// `G_t^{α,ε}(x, y)` from the Bessel-function product.
    pub fn bessel(&self, x: &[T], y: &[T], t: T) -> T {
        let s2 = (T::two() * t).sinh();
        let ln_s2 = ln_sinh(T::two() * t);
        let th2 = (T::two() * t).tanh();
        let th = t.tanh();
        let mut log_acc = -T::from_usize_lossy(self.dim()) * (T::c(2f64.ln()) + ln_s2);
        let mut acc = T::one();
        for i in 0..self.dim() {
            let nu = self.beta[i];
            let xy = x[i] * y[i];
            log_acc =
                log_acc - (x[i] - y[i]) * (x[i] - y[i]) / (T::two() * th2) - xy * th - nu * ln_s2;
            acc = acc * bessel_i_ratio_scaled(nu, xy / s2);
            if self.eps.get(i) == 1 {
                acc = acc * xy;
            }
        }
        acc * log_acc.exp()
    }

    pub fn eval(
        &self,
        x: &[T],
        y: &[T],
        t: T,
        repr: Representation,
        series: Option<&SeriesKernel<T>>,
    ) -> T {
        match repr {
            Representation::Bessel => self.bessel(x, y, t),
            Representation::Schlafli => self.schlafli(x, y, &ZetaTime::from_t(t)),
            Representation::Series => match series {
                Some(s) => s.heat(x, y, t).0,
                None => self.bessel(x, y, t),
            },
        }
    }

    /// `∂_t G_t^{α,ε}(x, y)` from the differentiated Schläfli form.
    pub fn dt(&self, x: &[T], y: &[T], zt: &ZetaTime<T>) -> T {
        let d = self.dim();
        let p = self.parts(x, y, zt);
        let z = zt.zeta;
        let z2 = z * z;
        let prod: T = p.m0.iter().copied().fold(T::one(), |a, b| a * b);
        let mut dist2 = T::zero();
        let mut sum2 = T::zero();
        let mut cross = T::zero();
        for i in 0..d {
            dist2 = dist2 + (x[i] - y[i]) * (x[i] - y[i]);
            sum2 = sum2 + (x[i] + y[i]) * (x[i] + y[i]);
            let others: T = (0..d)
                .filter(|&k| k != i)
                .map(|k| p.m0[k])
                .fold(T::one(), |a, b| a * b);
            cross = cross + x[i] * y[i] * p.n1[i] * others;
        }
        let h = self.exponent() * (T::one() + z2) / z * prod
            + zt.sech2 / (T::c(4.0) * z2) * (z2 * sum2 - dist2) * prod
            - zt.sech2 * (T::one() + z2) / (T::two() * z2) * cross;
        -p.pref * self.xy_eps(x, y) * h
    }

    /// `δ_{j,x} G_t^{α,ε}(x, y)`, with `δ_j = ∂_j + x_j` (`ε_j = 0`) or
    /// `∂_j + x_j + (2α_j+1)/x_j` (`ε_j = 1`).
    pub fn delta(&self, x: &[T], y: &[T], zt: &ZetaTime<T>, j: usize) -> T {
        let d = self.dim();
        let p = self.parts(x, y, zt);
        let z = zt.zeta;
        let others: T = (0..d)
            .filter(|&k| k != j)
            .map(|k| p.m0[k])
            .fold(T::one(), |a, b| a * b);
        let (xj, yj) = (x[j], y[j]);
        let main = -((xj - yj) / (T::two() * z) + z * (xj + yj) / T::two() - xj) * p.m0[j]
            - yj * zt.sech2 / (T::two() * z) * p.n1[j];
        let mut h = self.xy_eps(x, y) * others * main;
        if self.eps.get(j) == 1 {
            // x^{ε - e_j} y^ε
            let w = (0..d)
                .filter(|&i| self.eps.get(i) == 1)
                .map(|i| if i == j { y[i] } else { x[i] * y[i] })
                .fold(T::one(), |a, b| a * b);
            h = h + (T::two() * self.alpha.get(j) + T::two()) * w * others * p.m0[j];
        }
        p.pref * h
    }

    /// `δ_{j,x}^* G = -δ_{j,x} G + 2 x_j G`.
    pub fn delta_star(&self, x: &[T], y: &[T], zt: &ZetaTime<T>, j: usize) -> T {
        -self.delta(x, y, zt, j) + T::two() * x[j] * self.schlafli(x, y, zt)
    }
}

/// All `2^d` components for one `α`, used for full-space values.
#[derive(Debug, Clone)]
pub struct HeatKernel<T> {
    pub alpha: AlphaVector<T>,
    pub cfg: KernelEvalConfig,
    components: Vec<ComponentKernel<T>>,
    series: Vec<Option<SeriesKernel<T>>>,
}

/// A kernel value with an optional accuracy warning.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelValue<T> {
    pub value: T,
    pub warning: Option<String>,
}

impl<T: Real> HeatKernel<T> {
    pub fn new(alpha: &AlphaVector<T>, cfg: &KernelEvalConfig) -> Result<Self> {
        cfg.validate()?;
        let d = alpha.dim();
        let eps_all = EpsVector::all(d);
        let components = eps_all
            .iter()
            .map(|e| ComponentKernel::new(alpha, e, cfg.pi_nodes))
            .collect::<Result<Vec<_>>>()?;
        let series = eps_all
            .iter()
            .map(|e| match cfg.representation {
                Representation::Series => Some(SeriesKernel::new(alpha, Some(e), cfg.series_order)),
                _ => None,
            })
            .collect();
        Ok(HeatKernel {
            alpha: alpha.clone(),
            cfg: cfg.clone(),
            components,
            series,
        })
    }

    fn index(&self, eps: &EpsVector) -> usize {
        eps.entries()
            .iter()
            .enumerate()
            .map(|(i, &e)| (e as usize) << i)
            .sum()
    }

    pub fn component(&self, eps: &EpsVector) -> &ComponentKernel<T> {
        &self.components[self.index(eps)]
    }

    /// `G_t^{α,ε}(x, y)` for `x, y` in the closed orthant.
    pub fn component_value(&self, x: &[T], y: &[T], t: T, eps: &EpsVector) -> KernelValue<T> {
        let k = self.index(eps);
        match (&self.cfg.representation, &self.series[k]) {
            (Representation::Series, Some(s)) => {
                let (value, tail) = s.heat(x, y, t);
                let warning = (tail.f64() > self.cfg.tail_tolerance)
                    .then(|| format!("series tail bound {:.3e} exceeds tolerance", tail.f64()));
                KernelValue { value, warning }
            }
            (repr, _) => KernelValue {
                value: self.components[k].eval(x, y, t, *repr, None),
                warning: None,
            },
        }
    }

    /// `G_t^α(x, y)` for arbitrary `x, y ∈ ℝ^d` via parity extension of the components.
    pub fn full_value(&self, x: &[T], y: &[T], t: T) -> KernelValue<T> {
        let ax: Vec<T> = x.iter().map(|v| v.abs()).collect();
        let ay: Vec<T> = y.iter().map(|v| v.abs()).collect();
        let mut total = T::zero();
        let mut warning = None;
        for eps in EpsVector::all(self.alpha.dim()) {
            let mut sign = T::one();
            for i in 0..x.len() {
                if eps.get(i) == 1 && (x[i] < T::zero()) != (y[i] < T::zero()) {
                    sign = -sign;
                }
            }
            let v = self.component_value(&ax, &ay, t, &eps);
            if v.warning.is_some() {
                warning = v.warning;
            }
            total = total + sign * v.value;
        }
        KernelValue {
            value: total,
            warning,
        }
    }
}

/// `log sinh x` without overflow for large `x`.
fn ln_sinh<T: Real>(x: T) -> T {
    if x > T::one() {
        x + (-(-T::two() * x).exp()).ln_1p() - T::c(2f64.ln())
    } else {
        x.sinh().ln()
    }
}

fn check_orthant<T: Real>(x: &[T], y: &[T], d: usize) -> Result<()> {
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
    Ok(())
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t > T::zero()) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    Ok(())
}

/// `G_t^{α,ε}(x, y)` (or the full kernel) in the configured representation.
pub fn heat_kernel<T: Real>(
    x: &[T],
    y: &[T],
    t: T,
    alpha: &AlphaVector<T>,
    eps: &EpsSelector,
    cfg: &KernelEvalConfig,
) -> Result<KernelValue<T>> {
    check_time(t)?;
    let d = alpha.dim();
    match eps {
        EpsSelector::Component(e) => {
            check_orthant(x, y, d)?;
            alpha.check_dim(e.dim())?;
            cfg.validate()?;
            if cfg.representation == Representation::Series {
                let (value, tail) =
                    SeriesKernel::new(alpha, Some(e), cfg.series_order).heat(x, y, t);
                let warning = (tail.f64() > cfg.tail_tolerance)
                    .then(|| format!("series tail bound {:.3e} exceeds tolerance", tail.f64()));
                return Ok(KernelValue { value, warning });
            }
            let comp = ComponentKernel::new(alpha, e, cfg.pi_nodes)?;
            Ok(KernelValue {
                value: comp.eval(x, y, t, cfg.representation, None),
                warning: None,
            })
        }
        EpsSelector::Full => {
            if x.len() != d || y.len() != d {
                return Err(Error::Dimension {
                    expected: d,
                    got: x.len().max(y.len()),
                });
            }
            Ok(HeatKernel::new(alpha, cfg)?.full_value(x, y, t))
        }
    }
}

/// `∂_t G_t^{α,ε}(x, y)` from the differentiated Schläfli form.
pub fn dt_heat_kernel<T: Real>(
    x: &[T],
    y: &[T],
    t: T,
    alpha: &AlphaVector<T>,
    eps: &EpsVector,
    cfg: &KernelEvalConfig,
) -> Result<T> {
    check_time(t)?;
    check_orthant(x, y, alpha.dim())?;
    Ok(ComponentKernel::new(alpha, eps, cfg.pi_nodes)?.dt(x, y, &ZetaTime::from_t(t)))
}

pub fn delta_j_kernel<T: Real>(
    x: &[T],
    y: &[T],
    t: T,
    alpha: &AlphaVector<T>,
    eps: &EpsVector,
    j: usize,
    cfg: &KernelEvalConfig,
) -> Result<T> {
    check_time(t)?;
    check_orthant(x, y, alpha.dim())?;
    check_coordinate(j, alpha.dim())?;
    Ok(ComponentKernel::new(alpha, eps, cfg.pi_nodes)?.delta(x, y, &ZetaTime::from_t(t), j))
}

pub fn delta_j_star_kernel<T: Real>(
    x: &[T],
    y: &[T],
    t: T,
    alpha: &AlphaVector<T>,
    eps: &EpsVector,
    j: usize,
    cfg: &KernelEvalConfig,
) -> Result<T> {
    check_time(t)?;
    check_orthant(x, y, alpha.dim())?;
    check_coordinate(j, alpha.dim())?;
    Ok(ComponentKernel::new(alpha, eps, cfg.pi_nodes)?.delta_star(x, y, &ZetaTime::from_t(t), j))
}

pub(crate) fn check_coordinate(j: usize, d: usize) -> Result<()> {
    if j >= d {
        return Err(Error::Precondition(format!(
            "coordinate index {j} out of range for d = {d}"
        )));
    }
    Ok(())
}
