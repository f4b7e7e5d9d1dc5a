use serde::{Deserialize, Serialize};

use super::{LaguerreKind, Semigroup, Setting};
use crate::error::{Error, Result};
use crate::kernel::{AreaKind, ComponentKernel, MomentBackend};
use crate::operators::{eigenvalue, GridFunction, SpectralFunction};
use crate::quadrature::{gauss_legendre, left_singular, Rule, ZetaTime};
use crate::real::Real;
use crate::specfun::hermite::HermiteTables;
use crate::specfun::{phi_factor, AlphaVector, EpsVector, MultiIndex};

/// A derivative field `(w, t) ↦ D S_t f(w)` whose weighted `L²` norms are
/// the square functions.
pub trait DerivativeField<T>: Sync {
    fn value(&self, w: &[T], zt: &ZetaTime<T>) -> T;
}

#[derive(Debug, Clone, PartialEq)]
struct FieldTerm<T> {
    mu: T,
    coeff: T,
    target: MultiIndex,
}

/// `D S_t f = Σ_k b_k e^{-t μ_k} h_{n_k}` for a finite expansion `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField<T> {
    alpha: AlphaVector<T>,
    terms: Vec<FieldTerm<T>>,
    kmax: usize,
}

impl<T: Real> SpectralField<T> {
    /// Field of `D T_t f` or `D P_t f` on the full space, or of
    /// `D T_t^{α,ε,+} f^+` for `f` supported in `N_ε`.
    pub fn new(
        f: &SpectralFunction<T>,
        deriv: AreaKind,
        semigroup: Semigroup,
        setting: &Setting,
    ) -> Result<Self> {
        let scale = match setting {
            Setting::FullSpace => T::one(),
            Setting::EpsPlus(e) => {
                require_support(f, e)?;
                T::c(0.5).powi(f.dim() as i32)
            }
        };
        Self::build(f, deriv, semigroup, scale, T::zero())
    }

    /// Field of the Laguerre semigroup `𝕋_t` or `T̃_t^j` applied to `f^+`.
    pub fn laguerre(f: &SpectralFunction<T>, kind: LaguerreKind) -> Result<Self> {
        require_support(f, &kind.component(f.dim()))?;
        // 2^d from the semigroup cancels the 2^{-d} of the restricted expansion.
        Self::build(
            f,
            kind.derivative(),
            Semigroup::Heat,
            T::one(),
            T::c(kind.decay_shift()),
        )
    }

    fn build(
        f: &SpectralFunction<T>,
        deriv: AreaKind,
        semigroup: Semigroup,
        scale: T,
        shift: T,
    ) -> Result<Self> {
        let alpha = f.alpha().clone();
        if let AreaKind::H(j) | AreaKind::HStar(j) = deriv {
            if j >= alpha.dim() {
                return Err(Error::Precondition(format!(
                    "coordinate {} out of range for d = {}",
                    j + 1,
                    alpha.dim()
                )));
            }
        }
        let mut terms = Vec::with_capacity(f.len());
        for (m, c) in f.terms() {
            let lambda = eigenvalue(m.iter().sum(), &alpha);
            let mu = match semigroup {
                Semigroup::Heat => lambda,
                Semigroup::Poisson => lambda.sqrt(),
            } + shift;
            let (coeff, target) = match deriv {
                AreaKind::V => (-mu * c, m.to_vec()),
                AreaKind::H(j) => {
                    if m[j] == 0 {
                        continue;
                    }
                    let mut n = m.to_vec();
                    n[j] -= 1;
                    (phi_factor(m[j], alpha.get(j)) * c, n)
                }
                AreaKind::HStar(j) => {
                    let mut n = m.to_vec();
                    n[j] += 1;
                    (phi_factor(m[j] + 1, alpha.get(j)) * c, n)
                }
            };
            terms.push(FieldTerm {
                mu,
                coeff: scale * coeff,
                target: MultiIndex::new(target),
            });
        }
        let kmax = terms
            .iter()
            .filter_map(|t| t.target.entries())
            .flatten()
            .copied()
            .max()
            .unwrap_or(0);
        Ok(SpectralField { alpha, terms, kmax })
    }

    fn weighted_values(&self, x: &[T]) -> Vec<T> {
        let tables = HermiteTables::new(self.kmax, &self.alpha, x);
        self.terms
            .iter()
            .map(|t| t.coeff * tables.eval(&t.target))
            .collect()
    }

    /// `∫_0^∞ |D S_t f(x)|² (t dt | dt) = Σ_{k,k'} b_k b_{k'} K(μ_k + μ_{k'})`
    /// with `K(s) = 1/s²` (vertical) or `1/s`, returned together with the sum
    /// of absolute terms as a cancellation scale.
    pub fn closed_form_square(&self, x: &[T], vertical: bool) -> (T, T) {
        let b = self.weighted_values(x);
        let mut sum = T::zero();
        let mut scale = T::zero();
        for (k, tk) in self.terms.iter().enumerate() {
            for (l, tl) in self.terms.iter().enumerate() {
                let s = tk.mu + tl.mu;
                let kern = if vertical { (s * s).recip() } else { s.recip() };
                let v = b[k] * b[l] * kern;
                sum = sum + v;
                scale = scale + v.abs();
            }
        }
        (sum, scale)
    }
}

impl<T: Real> DerivativeField<T> for SpectralField<T> {
    fn value(&self, w: &[T], zt: &ZetaTime<T>) -> T {
        let tables = HermiteTables::new(self.kmax, &self.alpha, w);
        self.terms
            .iter()
            .map(|t| t.coeff * (-zt.t * t.mu).exp() * tables.eval(&t.target))
            .fold(T::zero(), |a, b| a + b)
    }
}

fn require_support<T: Real>(f: &SpectralFunction<T>, e: &EpsVector) -> Result<()> {
    if e.dim() != f.dim() {
        return Err(Error::Dimension {
            expected: f.dim(),
            got: e.dim(),
        });
    }
    if !f.supported_in(e) {
        return Err(Error::Precondition(format!(
            "expansion is not supported in N_eps for eps = {e}"
        )));
    }
    Ok(())
}

/// `y` quadrature used by [`GridField`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridFieldConfig {
    /// Longest `y` panel away from the kernel peak.
    pub panel: f64,
    /// Gauss points per panel.
    pub order: usize,
    /// Times below this are evaluated at the floor.
    pub time_floor: f64,
    pub pi_nodes: usize,
}

impl Default for GridFieldConfig {
    fn default() -> Self {
        GridFieldConfig {
            panel: 0.5,
            order: 16,
            time_floor: 1e-8,
            pi_nodes: 48,
        }
    }
}

impl GridFieldConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.panel > 0.0) || self.order == 0 || !(self.time_floor > 0.0) || self.pi_nodes == 0
        {
            return Err(Error::Precondition(
                "grid field panel, order, time floor and Pi nodes must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Peak-relative breakpoints `w ± c√t`; the kernel has decayed below `e^{-60}` past the last.
const PEAK_OFFSETS: [f64; 6] = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0];

/// `D T_t^{α,ε,+} f(w) = ∫_{ℝ^d_+} D G_t^{α,ε}(w, y) f(y) dw_α^+(y)` for grid
/// samples `f` on the orthant, by tensor Gauss quadrature refined around `y = w`.
#[derive(Debug, Clone)]
pub struct GridField<'a, T> {
    f: &'a GridFunction<T>,
    comp: ComponentKernel<T>,
    deriv: AreaKind,
    extent: Vec<T>,
    gamma: Vec<T>,
    gl: Rule<T>,
    cfg: GridFieldConfig,
}

impl<'a, T: Real> GridField<'a, T> {
    pub fn new(
        f: &'a GridFunction<T>,
        alpha: &AlphaVector<T>,
        deriv: AreaKind,
        semigroup: Semigroup,
        setting: &Setting,
        cfg: &GridFieldConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        alpha.check_dim(f.dim())?;
        let Setting::EpsPlus(eps) = setting else {
            return Err(Error::Precondition(
                "grid input is supported for eps-plus square functions".into(),
            ));
        };
        if semigroup != Semigroup::Heat {
            return Err(Error::Precondition(
                "grid input is supported for the heat semigroup".into(),
            ));
        }
        let extent: Vec<T> = f
            .axes()
            .iter()
            .map(|a| *a.last().expect("axes have >= 2 points"))
            .collect();
        if extent.iter().any(|&l| !(l > T::zero())) {
            return Err(Error::Domain(
                "grid must extend into the positive orthant".into(),
            ));
        }
        let comp = ComponentKernel::new(alpha, eps, cfg.pi_nodes)?
            .with_backend(MomentBackend::BesselRatio);
        Ok(GridField {
            f,
            comp,
            deriv,
            extent,
            gamma: alpha
                .entries()
                .iter()
                .map(|&a| T::two() * a + T::one())
                .collect(),
            gl: gauss_legendre(cfg.order),
            cfg: *cfg,
        })
    }

    /// Rule on `[0, L]` with weight `y^γ`, broken at `w ± c√t`.
    fn axis_rule(&self, i: usize, w: T, st: T) -> Rule<T> {
        let len = self.extent[i];
        let mut pts = vec![T::zero(), len];
        for &c in &PEAK_OFFSETS {
            for p in [w - T::c(c) * st, w + T::c(c) * st] {
                if p > T::zero() && p < len {
                    pts.push(p);
                }
            }
        }
        if w > T::zero() && w < len {
            pts.push(w);
        }
        pts.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        pts.dedup();
        let gamma = self.gamma[i];
        let max_panel = T::c(self.cfg.panel);
        let mut rule = Rule {
            nodes: vec![],
            weights: vec![],
        };
        for pair in pts.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let n = ((b - a) / max_panel).ceil().to_usize().unwrap_or(1).max(1);
            let h = (b - a) / T::from_usize_lossy(n);
            for k in 0..n {
                let lo = a + h * T::from_usize_lossy(k);
                let hi = lo + h;
                if lo == T::zero() {
                    rule.append(left_singular(self.cfg.order, lo, hi, gamma));
                } else {
                    let mut p = self.gl.mapped(lo, hi);
                    for (wt, &y) in p.weights.iter_mut().zip(&p.nodes) {
                        *wt = *wt * y.powf(gamma);
                    }
                    rule.append(p);
                }
            }
        }
        rule
    }
}

impl<T: Real> DerivativeField<T> for GridField<'_, T> {
    fn value(&self, w: &[T], zt: &ZetaTime<T>) -> T {
        let floor = T::c(self.cfg.time_floor);
        let zt = if zt.t < floor {
            ZetaTime::from_t(floor)
        } else {
            *zt
        };
        let st = zt.t.sqrt();
        let rules: Vec<Rule<T>> = w
            .iter()
            .enumerate()
            .map(|(i, &wi)| self.axis_rule(i, wi, st))
            .collect();
        let mut idx = vec![0usize; w.len()];
        let mut y = vec![T::zero(); w.len()];
        let mut acc = T::zero();
        'outer: loop {
            let mut weight = T::one();
            for (i, r) in rules.iter().enumerate() {
                y[i] = r.nodes[idx[i]];
                weight = weight * r.weights[idx[i]];
            }
            acc = acc + weight * self.deriv.derivative(&self.comp, w, &y, &zt) * self.f.eval(&y);
            for i in (0..w.len()).rev() {
                idx[i] += 1;
                if idx[i] < rules[i].len() {
                    continue 'outer;
                }
                idx[i] = 0;
            }
            break;
        }
        acc
    }
}
