use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, Setting, SquareFnConfig, SquareFnKind, SquareInput};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, left_singular, Rule};
use crate::real::Real;
use crate::specfun::{AlphaVector, EpsVector};

/// Tensor quadrature for `∫ F dw_α` on the orthant `[0, L]^d` or the box `[-L, L]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpGrid<T> {
    nodes: Vec<(Vec<T>, T)>,
    orthant: bool,
}

impl<T: Real> LpGrid<T> {
    /// `panels` equal panels per axis on `[0, L]`, `order` Gauss points each.
    pub fn orthant(alpha: &AlphaVector<T>, extent: T, panels: usize, order: usize) -> Result<Self> {
        if !(extent > T::zero()) || panels == 0 || order == 0 {
            return Err(Error::Precondition(
                "grid extent, panel count and order must be positive".into(),
            ));
        }
        let axes: Vec<Rule<T>> = alpha
            .entries()
            .iter()
            .map(|&a| axis_rule(extent, panels, order, a))
            .collect();
        let mut nodes = vec![(Vec::new(), T::one())];
        for r in &axes {
            let mut next = Vec::with_capacity(nodes.len() * r.len());
            for (p, w) in &nodes {
                for (&y, &wy) in r.nodes.iter().zip(&r.weights) {
                    let mut q = p.clone();
                    q.push(y);
                    next.push((q, *w * wy));
                }
            }
            nodes = next;
        }
        Ok(LpGrid {
            nodes,
            orthant: true,
        })
    }

    /// The orthant grid reflected into every orthant of `[-L, L]^d`.
    pub fn full_space(
        alpha: &AlphaVector<T>,
        extent: T,
        panels: usize,
        order: usize,
    ) -> Result<Self> {
        let base = Self::orthant(alpha, extent, panels, order)?;
        let mut nodes = Vec::with_capacity(base.nodes.len() << alpha.dim());
        for eta in EpsVector::all(alpha.dim()) {
            for (x, w) in &base.nodes {
                let y = x
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| if eta.get(i) == 1 { -v } else { v })
                    .collect();
                nodes.push((y, *w));
            }
        }
        Ok(LpGrid {
            nodes,
            orthant: false,
        })
    }

    pub fn nodes(&self) -> &[(Vec<T>, T)] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_orthant(&self) -> bool {
        self.orthant
    }
}

fn axis_rule<T: Real>(extent: T, panels: usize, order: usize, a: T) -> Rule<T> {
    let gamma = T::two() * a + T::one();
    let h = extent / T::from_usize_lossy(panels);
    let mut r = left_singular(order, T::zero(), h, gamma);
    let gl = gauss_legendre::<T>(order);
    for k in 1..panels {
        let mut p = gl.mapped(h * T::from_usize_lossy(k), h * T::from_usize_lossy(k + 1));
        for (w, &y) in p.weights.iter_mut().zip(&p.nodes) {
            *w = *w * y.powf(gamma);
        }
        r.append(p);
    }
    r
}

fn check_grid<T: Real>(kinds: &[SquareFnKind], grid: &LpGrid<T>) -> Result<()> {
    if kinds.is_empty() {
        return Err(Error::Precondition(
            "at least one square function is required".into(),
        ));
    }
    for k in kinds {
        let orthant = matches!(k.setting, Setting::EpsPlus(_));
        if orthant != grid.orthant {
            return Err(Error::Precondition(format!(
                "{k} needs an {} grid",
                if orthant { "orthant" } else { "full-space" }
            )));
        }
    }
    Ok(())
}

fn input_value<T: Real>(input: SquareInput<'_, T>, x: &[T]) -> T {
    match input {
        SquareInput::Spectral(f) => f.eval(x),
        SquareInput::Grid(g) => g.eval(x),
    }
}

/// `|(g_1(f)(x), …, g_k(f)(x))|_{ℓ²}` at every grid node.
fn aggregated_values<T: Real>(
    kinds: &[SquareFnKind],
    input: SquareInput<'_, T>,
    alpha: Option<&AlphaVector<T>>,
    grid: &LpGrid<T>,
    cfg: &SquareFnConfig,
) -> Result<Vec<T>> {
    grid.nodes
        .par_iter()
        .map(|(x, _)| {
            let mut sq = T::zero();
            for k in kinds {
                let v = evaluate(k, input, alpha, x, cfg)?.value;
                sq = sq + v * v;
            }
            Ok(sq.sqrt())
        })
        .collect()
}

/// Result of [`weighted_lp_ratio`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpRatio<T> {
    pub ratio: T,
    pub square_norm: T,
    pub input_norm: T,
}

/// `‖|(g_1(f), …, g_k(f))|_{ℓ²}‖_{L^p(U dw)} / ‖f‖_{L^p(U dw)}` by grid quadrature.
pub fn weighted_lp_ratio<T: Real, U: Fn(&[T]) -> T + Sync>(
    kinds: &[SquareFnKind],
    input: SquareInput<'_, T>,
    alpha: Option<&AlphaVector<T>>,
    weight: U,
    p: T,
    grid: &LpGrid<T>,
    cfg: &SquareFnConfig,
) -> Result<LpRatio<T>> {
    if !(p > T::one()) || !p.is_finite() {
        return Err(Error::Domain(format!(
            "exponent must lie in (1, inf), got {p}"
        )));
    }
    check_grid(kinds, grid)?;
    let g = aggregated_values(kinds, input, alpha, grid, cfg)?;
    let mut gs = T::zero();
    let mut fs = T::zero();
    for ((x, w), gv) in grid.nodes.iter().zip(&g) {
        let u = weight(x);
        if !(u > T::zero()) {
            return Err(Error::Domain("weight must be positive on the grid".into()));
        }
        gs = gs + *w * u * gv.powf(p);
        fs = fs + *w * u * input_value(input, x).abs().powf(p);
    }
    let square_norm = gs.powf(p.recip());
    let input_norm = fs.powf(p.recip());
    Ok(LpRatio {
        ratio: square_norm / input_norm,
        square_norm,
        input_norm,
    })
}

/// Empirical weak-(1,1) constant `sup_λ λ (U dw)({g(f) > λ}) / ‖f‖_{L¹(U dw)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weak11Report<T> {
    pub lambdas: Vec<T>,
    /// `λ (U dw)({g(f) > λ}) / ‖f‖_{L¹(U dw)}` for each `λ`.
    pub ratios: Vec<T>,
    pub input_l1: T,
    pub sup: T,
}

pub fn weak11_probe<T: Real, U: Fn(&[T]) -> T + Sync>(
    kind: &SquareFnKind,
    input: SquareInput<'_, T>,
    alpha: Option<&AlphaVector<T>>,
    weight: U,
    lambdas: &[T],
    grid: &LpGrid<T>,
    cfg: &SquareFnConfig,
) -> Result<Weak11Report<T>> {
    check_grid(std::slice::from_ref(kind), grid)?;
    let g = aggregated_values(std::slice::from_ref(kind), input, alpha, grid, cfg)?;
    let weights: Vec<T> = grid.nodes.iter().map(|(x, w)| *w * weight(x)).collect();
    let input_l1 = grid
        .nodes
        .iter()
        .zip(&weights)
        .map(|((x, _), &w)| w * input_value(input, x).abs())
        .sum::<T>();
    if !(input_l1 > T::zero()) {
        return Err(Error::Precondition(
            "input has zero L1 norm on the grid".into(),
        ));
    }
    let ratios: Vec<T> = lambdas
        .iter()
        .map(|&lam| {
            let level = g
                .iter()
                .zip(&weights)
                .filter(|(&v, _)| v > lam)
                .map(|(_, &w)| w)
                .sum::<T>();
            lam * level / input_l1
        })
        .collect();
    let sup = ratios.iter().copied().fold(T::zero(), T::max);
    Ok(Weak11Report {
        lambdas: lambdas.to_vec(),
        ratios,
        input_l1,
        sup,
    })
}
