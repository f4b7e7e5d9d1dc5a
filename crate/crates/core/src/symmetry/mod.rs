//! The reflection group `ℤ_2^d`: `ε`-symmetric components, orthant
//! restriction and parity extension, and a pointwise check of the chain of
//! inequalities that reduces full-space area integrals to their `ε`-plus versions.

#[cfg(test)]
mod tests;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{GridFunction, SpectralFunction};
use crate::real::Real;
use crate::specfun::EpsVector;
use crate::squarefn::{
    area_integral, LpGrid, Setting, SquareFnConfig, SquareFnKind, SquareInput, SquareOp,
};

/// A sign vector `η ∈ {-1, 1}^d` acting by `ηx = (η_1 x_1, …, η_d x_d)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReflectionSignature {
    eta: Vec<i8>,
}

impl ReflectionSignature {
    pub fn new(eta: Vec<i8>) -> Result<Self> {
        if eta.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Domain(format!(
                "reflection signs must be +1 or -1, got {eta:?}"
            )));
        }
        Ok(ReflectionSignature { eta })
    }

    /// `η_i = -1` exactly where `flips_i = 1`.
    pub fn from_flips(flips: &EpsVector) -> Self {
        ReflectionSignature {
            eta: flips
                .entries()
                .iter()
                .map(|&b| if b == 1 { -1 } else { 1 })
                .collect(),
        }
    }

    /// All `2^d` signatures.
    pub fn all(d: usize) -> Vec<Self> {
        EpsVector::all(d).iter().map(Self::from_flips).collect()
    }

    pub fn dim(&self) -> usize {
        self.eta.len()
    }

    pub fn signs(&self) -> &[i8] {
        &self.eta
    }

    /// `η^ε = ∏ η_i^{ε_i}`.
    pub fn power(&self, eps: &EpsVector) -> i8 {
        let neg = self
            .eta
            .iter()
            .zip(eps.entries())
            .filter(|(&s, &e)| s < 0 && e == 1)
            .count();
        if neg % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn apply<T: Real>(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .zip(&self.eta)
            .map(|(&v, &s)| if s < 0 { -v } else { v })
            .collect()
    }
}

/// `f_ε`: the coefficients of `f` with `m ∈ N_ε`.
pub fn eps_project<T: Real>(
    f: &SpectralFunction<T>,
    eps: &EpsVector,
) -> Result<SpectralFunction<T>> {
    if eps.dim() != f.dim() {
        return Err(Error::Dimension {
            expected: f.dim(),
            got: eps.dim(),
        });
    }
    let parity = |m: &[usize]| {
        m.iter()
            .zip(eps.entries())
            .all(|(&k, &e)| k % 2 == e as usize)
    };
    Ok(f.map(|m, c| if parity(m) { c } else { T::zero() }))
}

/// `f_ε(x) = 2^{-d} Σ_η η^ε f(ηx)` for any function.
pub fn eps_project_at<T: Real, F: Fn(&[T]) -> T>(f: F, eps: &EpsVector, x: &[T]) -> T {
    let mut acc = T::zero();
    for eta in ReflectionSignature::all(x.len()) {
        let v = f(&eta.apply(x));
        acc = if eta.power(eps) > 0 { acc + v } else { acc - v };
    }
    acc * T::c(0.5).powi(x.len() as i32)
}

fn check_symmetric_axes<T: Real>(g: &GridFunction<T>) -> Result<()> {
    for (i, ax) in g.axes().iter().enumerate() {
        let scale = ax.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
        let tol = T::c(1e-12) * scale;
        if ax
            .iter()
            .zip(ax.iter().rev())
            .any(|(&a, &b)| (a + b).abs() > tol)
        {
            return Err(Error::Precondition(format!(
                "axis {i} is not symmetric about 0"
            )));
        }
    }
    Ok(())
}

/// Row-major flat index of a multi-index.
fn flat(idx: &[usize], shape: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&k, &n)| acc * n + k)
}

fn for_each_index(shape: &[usize], mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; shape.len()];
    let total: usize = shape.iter().product();
    for _ in 0..total {
        f(&idx);
        for i in (0..shape.len()).rev() {
            idx[i] += 1;
            if idx[i] < shape[i] {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// `f_ε` on a grid whose axes are symmetric about the origin, node by node.
pub fn eps_project_grid<T: Real>(g: &GridFunction<T>, eps: &EpsVector) -> Result<GridFunction<T>> {
    if eps.dim() != g.dim() {
        return Err(Error::Dimension {
            expected: g.dim(),
            got: eps.dim(),
        });
    }
    check_symmetric_axes(g)?;
    let shape: Vec<usize> = g.axes().iter().map(|a| a.len()).collect();
    let etas = ReflectionSignature::all(g.dim());
    let norm = T::c(0.5).powi(g.dim() as i32);
    let mut values = Vec::with_capacity(g.values().len());
    for_each_index(&shape, |idx| {
        let mut acc = T::zero();
        for eta in &etas {
            let r: Vec<usize> = idx
                .iter()
                .zip(eta.signs())
                .zip(&shape)
                .map(|((&k, &s), &n)| if s < 0 { n - 1 - k } else { k })
                .collect();
            let v = g.values()[flat(&r, &shape)];
            acc = if eta.power(eps) > 0 { acc + v } else { acc - v };
        }
        values.push(norm * acc);
    });
    GridFunction::new(g.axes().to_vec(), values, g.order())
}

/// `f^+`: the nodes with every coordinate strictly positive.
pub fn restrict_plus<T: Real>(g: &GridFunction<T>) -> Result<GridFunction<T>> {
    let firsts: Vec<usize> = g
        .axes()
        .iter()
        .map(|a| {
            a.iter()
                .position(|&v| v > T::zero())
                .ok_or_else(|| Error::Domain("grid has no positive nodes".into()))
        })
        .collect::<Result<_>>()?;
    let axes: Vec<Vec<T>> = g
        .axes()
        .iter()
        .zip(&firsts)
        .map(|(a, &k)| a[k..].to_vec())
        .collect();
    let shape: Vec<usize> = g.axes().iter().map(|a| a.len()).collect();
    let sub: Vec<usize> = axes.iter().map(|a| a.len()).collect();
    let mut values = Vec::with_capacity(sub.iter().product());
    for_each_index(&sub, |idx| {
        let full: Vec<usize> = idx.iter().zip(&firsts).map(|(&k, &o)| k + o).collect();
        values.push(g.values()[flat(&full, &shape)]);
    });
    GridFunction::new(axes, values, g.order())
}

/// Extension of `f^+` (given on positive axes) to `ℝ^d` by `f(ηx) = η^ε f(x)`.
pub fn extend_eps<T: Real>(g: &GridFunction<T>, eps: &EpsVector) -> Result<GridFunction<T>> {
    if eps.dim() != g.dim() {
        return Err(Error::Dimension {
            expected: g.dim(),
            got: eps.dim(),
        });
    }
    if g.axes().iter().any(|a| !(a[0] > T::zero())) {
        return Err(Error::Domain(
            "extension needs axes inside the open orthant".into(),
        ));
    }
    let axes: Vec<Vec<T>> = g
        .axes()
        .iter()
        .map(|a| {
            a.iter()
                .rev()
                .map(|&v| -v)
                .chain(a.iter().copied())
                .collect()
        })
        .collect();
    let half: Vec<usize> = g.axes().iter().map(|a| a.len()).collect();
    let shape: Vec<usize> = axes.iter().map(|a| a.len()).collect();
    let mut values = Vec::with_capacity(shape.iter().product());
    for_each_index(&shape, |idx| {
        let mut neg = 0;
        let src: Vec<usize> = idx
            .iter()
            .zip(&half)
            .enumerate()
            .map(|(i, (&k, &n))| {
                if k < n {
                    if eps.get(i) == 1 {
                        neg += 1;
                    }
                    n - 1 - k
                } else {
                    k - n
                }
            })
            .collect();
        let v = g.values()[flat(&src, &half)];
        values.push(if neg % 2 == 0 { v } else { -v });
    });
    GridFunction::new(axes, values, g.order())
}

/// `‖f‖_{L^p(W dw_α)} / Σ_ε ‖f_ε^+‖_{L^p(W^+ dw_α^+)}` by grid quadrature.
pub fn decomposition_norm_ratio<W: Fn(&[f64]) -> f64 + Sync>(
    f: &SpectralFunction<f64>,
    weight: W,
    p: f64,
    full: &LpGrid<f64>,
    orthant: &LpGrid<f64>,
) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!(
            "exponent must lie in [1, inf), got {p}"
        )));
    }
    if full.is_orthant() || !orthant.is_orthant() {
        return Err(Error::Precondition(
            "expected a full-space grid and an orthant grid".into(),
        ));
    }
    let norm = |g: &SpectralFunction<f64>, grid: &LpGrid<f64>| {
        grid.nodes()
            .iter()
            .map(|(x, w)| w * weight(x) * g.eval(x).abs().powf(p))
            .sum::<f64>()
            .powf(p.recip())
    };
    let mut parts = 0.0;
    for e in EpsVector::all(f.dim()) {
        parts += norm(&eps_project(f, &e)?, orthant);
    }
    Ok(norm(f, full) / parts)
}

/// Constant of the second link of the reduction chain.
pub fn reduction_constant(d: usize) -> f64 {
    2f64.powf(1.5 * d as f64)
}

/// Relative slack allowed for quadrature error in [`reduction_verify`].
pub const REDUCTION_SLACK: f64 = 1e-4;

/// Both links of the chain at one point `x ∈ ℝ^d_+`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionPoint {
    pub x: Vec<f64>,
    /// `S(f)(x)` on the full space.
    pub full: f64,
    /// `𝒮^ε f_ε(x)` for each `ε` in [`EpsVector::all`] order.
    pub components: Vec<f64>,
    /// `S^{ε,+}(f_ε^+)(x)` in the same order.
    pub plus: Vec<f64>,
    /// `S(f)(x) / Σ_ε 𝒮^ε f_ε(x)`.
    pub first_ratio: f64,
    /// `max_ε 𝒮^ε f_ε(x) / (2^{3d/2} S^{ε,+}(f_ε^+)(x))`.
    pub second_ratio: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub op: SquareOp,
    pub constant: f64,
    pub slack: f64,
    pub points: Vec<ReductionPoint>,
    /// Largest ratio over both links and all points; the chain holds when `≤ 1 + slack`.
    pub max_ratio: f64,
    pub holds: bool,
}

impl ReductionReport {
    pub fn violations(&self) -> impl Iterator<Item = &ReductionPoint> {
        self.points.iter().filter(|p| !p.holds)
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else if a > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Evaluates `S(f) ≤ Σ_ε 𝒮^ε f_ε` and `𝒮^ε f_ε ≤ 2^{3d/2} S^{ε,+}(f_ε^+)` for
/// the area integral `op` at each `x` (strictly inside the orthant).
pub fn reduction_verify(
    f: &SpectralFunction<f64>,
    op: SquareOp,
    points: &[Vec<f64>],
    cfg: &SquareFnConfig,
) -> Result<ReductionReport> {
    if !op.is_area() {
        return Err(Error::Precondition(format!("{op} is not an area integral")));
    }
    let d = f.dim();
    if points.iter().flatten().any(|&v| !(v > 0.0)) {
        return Err(Error::Domain(
            "reduction points must lie in the open orthant".into(),
        ));
    }
    let constant = reduction_constant(d);
    let comps: Vec<(EpsVector, SpectralFunction<f64>)> = EpsVector::all(d)
        .into_iter()
        .map(|e| eps_project(f, &e).map(|p| (e, p)))
        .collect::<Result<_>>()?;
    let full_kind = SquareFnKind::heat(op, Setting::FullSpace);
    let evaluated: Vec<Result<ReductionPoint>> = points
        .par_iter()
        .map(|x| {
            let full = area_integral(&full_kind, SquareInput::Spectral(f), None, x, cfg)?.value;
            let mut components = Vec::with_capacity(comps.len());
            let mut plus = Vec::with_capacity(comps.len());
            for (e, fe) in &comps {
                if fe.is_empty() {
                    components.push(0.0);
                    plus.push(0.0);
                    continue;
                }
                components.push(
                    area_integral(&full_kind, SquareInput::Spectral(fe), None, x, cfg)?.value,
                );
                let kind = SquareFnKind::heat(op, Setting::EpsPlus(e.clone()));
                plus.push(area_integral(&kind, SquareInput::Spectral(fe), None, x, cfg)?.value);
            }
            let first_ratio = ratio(full, components.iter().sum());
            let second_ratio = components
                .iter()
                .zip(&plus)
                .map(|(&c, &p)| ratio(c, constant * p))
                .fold(0.0, f64::max);
            let holds =
                first_ratio <= 1.0 + REDUCTION_SLACK && second_ratio <= 1.0 + REDUCTION_SLACK;
            Ok(ReductionPoint {
                x: x.clone(),
                full,
                components,
                plus,
                first_ratio,
                second_ratio,
                holds,
            })
        })
        .collect();
    let points = evaluated.into_iter().collect::<Result<Vec<_>>>()?;
    let max_ratio = points
        .iter()
        .map(|p| p.first_ratio.max(p.second_ratio))
        .fold(0.0, f64::max);
    let holds = points.iter().all(|p| p.holds);
    Ok(ReductionReport {
        op,
        constant,
        slack: REDUCTION_SLACK,
        points,
        max_ratio,
        holds,
    })
}
