//! Dunkl operators, the ladder operators `δ_j`, `δ_j^*`, the oscillator
//! `L_α`, and the heat and Poisson semigroups acting on finite Hermite
//! expansions and on sampled functions.

mod grid;

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use grid::{GridFunction, GridSemigroup};

use crate::error::{Error, Result};
use crate::quadrature::{default_subordination_rule, Rule};
use crate::real::Real;
use crate::specfun::hermite::HermiteTables;
use crate::specfun::{phi_factor, AlphaVector, EpsVector, MultiIndex};

/// `λ_n^α = 2n + 2|α| + 2d`.
pub fn eigenvalue<T: Real>(n: usize, alpha: &AlphaVector<T>) -> T {
    T::two() * (T::from_usize_lossy(n) + alpha.norm1() + T::from_usize_lossy(alpha.dim()))
}

/// `λ_0^α, …, λ_N^α`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueTable<T> {
    pub values: Vec<T>,
}

impl<T: Real> EigenvalueTable<T> {
    pub fn new(n_max: usize, alpha: &AlphaVector<T>) -> Self {
        EigenvalueTable {
            values: (0..=n_max).map(|n| eigenvalue(n, alpha)).collect(),
        }
    }
}

/// Finite expansion `f = Σ c_m h_m^α`, keyed by multi-index in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction<T> {
    alpha: AlphaVector<T>,
    coeffs: BTreeMap<Vec<usize>, T>,
}

impl<T: Real> SpectralFunction<T> {
    pub fn zero(alpha: &AlphaVector<T>) -> Self {
        SpectralFunction {
            alpha: alpha.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    /// `h_m^α`.
    pub fn basis(alpha: &AlphaVector<T>, m: &MultiIndex) -> Result<Self> {
        let mut f = Self::zero(alpha);
        f.add_term(m, T::one())?;
        Ok(f)
    }

    pub fn from_terms(alpha: &AlphaVector<T>, terms: &[(MultiIndex, T)]) -> Result<Self> {
        let mut f = Self::zero(alpha);
        for (m, c) in terms {
            f.add_term(m, *c)?;
        }
        Ok(f)
    }

    /// Adds `c h_m`; invalid indices contribute nothing.
    pub fn add_term(&mut self, m: &MultiIndex, c: T) -> Result<()> {
        let Some(e) = m.entries() else { return Ok(()) };
        self.alpha.check_dim(e.len())?;
        if !c.is_finite() {
            return Err(Error::Data(format!("non-finite coefficient for {e:?}")));
        }
        let slot = self.coeffs.entry(e.to_vec()).or_insert(T::zero());
        *slot = *slot + c;
        Ok(())
    }

    pub fn alpha(&self) -> &AlphaVector<T> {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.alpha.dim()
    }

    pub fn coeff(&self, m: &[usize]) -> T {
        self.coeffs.get(m).copied().unwrap_or(T::zero())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], T)> + '_ {
        self.coeffs.iter().map(|(m, &c)| (m.as_slice(), c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest single-coordinate degree present.
    pub fn max_coord_degree(&self) -> usize {
        self.coeffs
            .keys()
            .flat_map(|m| m.iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs
            .keys()
            .map(|m| m.iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// `‖f‖_{L²(dw_α)}` by Parseval.
    pub fn norm_l2(&self) -> T {
        self.coeffs
            .values()
            .map(|&c| c * c)
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// `⟨f, g⟩_{L²(dw_α)}`.
    pub fn inner(&self, other: &Self) -> T {
        self.coeffs
            .iter()
            .map(|(m, &c)| c * other.coeff(m))
            .fold(T::zero(), |a, b| a + b)
    }

    /// Whether every index lies in `N_ε`.
    pub fn supported_in(&self, eps: &EpsVector) -> bool {
        self.coeffs.keys().all(|m| {
            m.iter()
                .enumerate()
                .all(|(i, &k)| k % 2 == eps.get(i) as usize)
        })
    }

    pub fn eval(&self, x: &[T]) -> T {
        let tables = HermiteTables::new(self.max_coord_degree(), &self.alpha, x);
        self.eval_with(&tables)
    }

    pub fn eval_with(&self, tables: &HermiteTables<T>) -> T {
        let mut acc = T::zero();
        for (m, &c) in &self.coeffs {
            let v = m
                .iter()
                .enumerate()
                .map(|(i, &k)| tables.coord(i, k))
                .fold(T::one(), |a, b| a * b);
            acc = acc + c * v;
        }
        acc
    }

    /// Coefficient-wise map `c_m ↦ g(m, c_m)`; zero results are dropped.
    pub fn map<F: Fn(&[usize], T) -> T>(&self, g: F) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(m, &c)| (m.clone(), g(m, c)))
            .filter(|(_, c)| *c != T::zero())
            .collect();
        SpectralFunction {
            alpha: self.alpha.clone(),
            coeffs,
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|_, c| s * c)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.alpha != other.alpha {
            return Err(Error::Precondition("expansions use different alpha".into()));
        }
        let mut out = self.clone();
        for (m, &c) in &other.coeffs {
            let slot = out.coeffs.entry(m.clone()).or_insert(T::zero());
            *slot = *slot + c;
        }
        out.coeffs.retain(|_, c| *c != T::zero());
        Ok(out)
    }

    fn shifted(&self, j: usize, raise: bool) -> Result<Self> {
        if j >= self.dim() {
            return Err(Error::Precondition(format!(
                "coordinate {j} out of range for d = {}",
                self.dim()
            )));
        }
        let a = self.alpha.get(j);
        let mut out = Self::zero(&self.alpha);
        for (m, &c) in &self.coeffs {
            let mut n = m.clone();
            let factor = if raise {
                n[j] += 1;
                phi_factor(m[j] + 1, a)
            } else {
                if m[j] == 0 {
                    continue;
                }
                n[j] -= 1;
                phi_factor(m[j], a)
            };
            let slot = out.coeffs.entry(n).or_insert(T::zero());
            *slot = *slot + factor * c;
        }
        out.coeffs.retain(|_, c| *c != T::zero());
        Ok(out)
    }

    /// Uniformly random coefficients in `[-1, 1]` on `modes` distinct indices
    /// with `|m| ≤ max_degree`, restricted to `N_ε` when `eps` is given.
    pub fn random<R: Rng>(
        alpha: &AlphaVector<T>,
        eps: Option<&EpsVector>,
        modes: usize,
        max_degree: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let pool: Vec<MultiIndex> = MultiIndex::all_up_to(alpha.dim(), max_degree)
            .into_iter()
            .filter(|m| eps.is_none_or(|e| e.contains(m)))
            .collect();
        if pool.len() < modes {
            return Err(Error::Precondition(format!(
                "only {} admissible indices with |m| <= {max_degree}, {modes} requested",
                pool.len()
            )));
        }
        let mut f = Self::zero(alpha);
        let picks = rand::seq::index::sample(rng, pool.len(), modes);
        for k in picks.iter() {
            let c: f64 = rng.gen_range(-1.0..=1.0);
            f.add_term(&pool[k], T::c(c))?;
        }
        Ok(f)
    }
}

/// `δ_j f`: `c_m` contributes `Φ(m_j, α_j) c_m` to `m - e_j`.
pub fn delta_apply<T: Real>(f: &SpectralFunction<T>, j: usize) -> Result<SpectralFunction<T>> {
    f.shifted(j, false)
}

/// `δ_j^* f`: `c_m` contributes `Φ(m_j + 1, α_j) c_m` to `m + e_j`.
pub fn delta_star_apply<T: Real>(f: &SpectralFunction<T>, j: usize) -> Result<SpectralFunction<T>> {
    f.shifted(j, true)
}

/// `L_α f`, diagonal with eigenvalues `λ_{|m|}`.
pub fn oscillator_apply<T: Real>(f: &SpectralFunction<T>) -> SpectralFunction<T> {
    let alpha = f.alpha.clone();
    f.map(|m, c| eigenvalue(m.iter().sum(), &alpha) * c)
}

/// `½ Σ_j (δ_j^* δ_j + δ_j δ_j^*) f`.
pub fn oscillator_factorized<T: Real>(f: &SpectralFunction<T>) -> Result<SpectralFunction<T>> {
    let mut acc = SpectralFunction::zero(&f.alpha);
    for j in 0..f.dim() {
        let a = delta_star_apply(&delta_apply(f, j)?, j)?;
        let b = delta_apply(&delta_star_apply(f, j)?, j)?;
        acc = acc.add(&a)?.add(&b)?;
    }
    Ok(acc.scale(T::half()))
}

/// `T_j^α f(x) = δ_j f(x) - x_j f(x)`.
pub fn dunkl_derivative<T: Real>(f: &SpectralFunction<T>, j: usize, x: &[T]) -> Result<T> {
    f.alpha.check_dim(x.len())?;
    let df = delta_apply(f, j)?;
    Ok(df.eval(x) - x[j] * f.eval(x))
}

fn filter_eps<T: Real>(
    f: &SpectralFunction<T>,
    eps: Option<&EpsVector>,
    restricted: bool,
) -> Result<SpectralFunction<T>> {
    match (eps, restricted) {
        (None, false) => Ok(f.clone()),
        (None, true) => Err(Error::Precondition(
            "the restricted semigroup needs a component eps".into(),
        )),
        (Some(e), restricted) => {
            f.alpha.check_dim(e.dim())?;
            if restricted && !f.supported_in(e) {
                return Err(Error::Precondition(format!(
                    "restricted semigroup acts on expansions supported in N_eps; f has indices outside eps = {e}"
                )));
            }
            Ok(f.map(|m, c| {
                if m.iter()
                    .enumerate()
                    .all(|(i, &k)| k % 2 == e.get(i) as usize)
                {
                    c
                } else {
                    T::zero()
                }
            }))
        }
    }
}

fn restriction_factor<T: Real>(d: usize, restricted: bool) -> T {
    if restricted {
        T::c(0.5).powi(d as i32)
    } else {
        T::one()
    }
}

/// `T_t^α f`, `T_t^{α,ε} f`, or (with `restricted`) `T_t^{α,ε,+} f^+`.
///
/// For `f` supported in `N_ε`, `T_t^{α,ε,+} f^+` is the restriction of
/// `2^{-d} Σ e^{-tλ_{|m|}} c_m h_m`; that expansion is returned.
pub fn heat_apply<T: Real>(
    f: &SpectralFunction<T>,
    t: T,
    eps: Option<&EpsVector>,
    restricted: bool,
) -> Result<SpectralFunction<T>> {
    if !(t >= T::zero()) {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    let g = filter_eps(f, eps, restricted)?;
    let s = restriction_factor::<T>(f.dim(), restricted);
    let alpha = f.alpha.clone();
    Ok(g.map(|m, c| s * (-t * eigenvalue(m.iter().sum(), &alpha)).exp() * c))
}

/// `P_t^α f` (and its `ε` variants), multiplying by `e^{-t√λ}`.
pub fn poisson_apply<T: Real>(
    f: &SpectralFunction<T>,
    t: T,
    eps: Option<&EpsVector>,
    restricted: bool,
) -> Result<SpectralFunction<T>> {
    if !(t >= T::zero()) {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    let g = filter_eps(f, eps, restricted)?;
    let s = restriction_factor::<T>(f.dim(), restricted);
    let alpha = f.alpha.clone();
    Ok(g.map(|m, c| s * (-t * eigenvalue(m.iter().sum(), &alpha).sqrt()).exp() * c))
}

/// Tolerance between the subordinated and closed-form Poisson multipliers.
pub const SUBORDINATION_TOL: f64 = 1e-7;

/// `∫_0^∞ e^{-λ t²/(4u)} e^{-u} du/√(πu)` by the given rule.
pub fn subordinated_multiplier<T: Real>(lambda: T, t: T, rule: &Rule<T>) -> T {
    if t == T::zero() {
        return rule.total_mass();
    }
    let q = lambda * t * t / T::c(4.0);
    rule.integrate(|u| (-q / u).exp())
}

/// `P_t` computed from heat multipliers through subordination, with a warning
/// when it departs from `e^{-t√λ}` by more than [`SUBORDINATION_TOL`].
pub fn poisson_subordinated<T: Real>(
    f: &SpectralFunction<T>,
    t: T,
    eps: Option<&EpsVector>,
    restricted: bool,
) -> Result<(SpectralFunction<T>, Option<String>)> {
    if !(t >= T::zero()) {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    let g = filter_eps(f, eps, restricted)?;
    let s = restriction_factor::<T>(f.dim(), restricted);
    let rule = default_subordination_rule::<T>();
    let alpha = f.alpha.clone();
    let multiplier =
        |m: &[usize]| subordinated_multiplier(eigenvalue(m.iter().sum(), &alpha), t, &rule);
    let worst = g
        .terms()
        .map(|(m, _)| {
            (multiplier(m) - (-t * eigenvalue(m.iter().sum(), &alpha).sqrt()).exp()).abs()
        })
        .fold(T::zero(), T::max);
    let out = g.map(|m, c| s * multiplier(m) * c);
    let warning = (worst.f64() > SUBORDINATION_TOL).then(|| {
        format!(
            "subordination deviates from exp(-t sqrt(lambda)) by {:.2e}",
            worst.f64()
        )
    });
    Ok((out, warning))
}

/// JSON form `{alpha: [...], coeffs: [{m: [...], c: ...}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFunctionDto {
    pub alpha: Vec<f64>,
    pub coeffs: Vec<CoeffDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffDto {
    pub m: Vec<usize>,
    pub c: f64,
}

impl From<&SpectralFunction<f64>> for SpectralFunctionDto {
    fn from(f: &SpectralFunction<f64>) -> Self {
        SpectralFunctionDto {
            alpha: f.alpha.entries().to_vec(),
            coeffs: f
                .terms()
                .map(|(m, c)| CoeffDto { m: m.to_vec(), c })
                .collect(),
        }
    }
}

impl TryFrom<SpectralFunctionDto> for SpectralFunction<f64> {
    type Error = Error;
    fn try_from(dto: SpectralFunctionDto) -> Result<Self> {
        let alpha = AlphaVector::new(dto.alpha)?;
        let mut f = SpectralFunction::zero(&alpha);
        for t in dto.coeffs {
            if t.m.len() != alpha.dim() {
                return Err(Error::Dimension {
                    expected: alpha.dim(),
                    got: t.m.len(),
                });
            }
            f.add_term(&MultiIndex::new(t.m), t.c)?;
        }
        Ok(f)
    }
}

impl Serialize for SpectralFunction<f64> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpectralFunctionDto::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpectralFunction<f64> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let dto = SpectralFunctionDto::deserialize(d)?;
        SpectralFunction::try_from(dto).map_err(serde::de::Error::custom)
    }
}
