use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Layout of the nested dyadic audit grids.
///
/// Level `k = 1..=levels` uses separations and anchor radii `2^j` for `j` in
/// `[max(min_exp, base_min - k + 1), min(max_exp, base_max + k - 1)]`: the base
/// window covers the unit scale of the oscillator and every refinement reaches
/// one octave closer to the diagonal and (until `max_exp`) one octave further
/// out. Level `k` also adds the ratio `ρ_k = rho_first · rho_factor^{-(k-1)}`
/// for the smoothness triples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub levels: usize,
    pub min_exp: i32,
    pub max_exp: i32,
    pub base_min: i32,
    pub base_max: i32,
    pub rho_first: f64,
    pub rho_factor: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            levels: 4,
            min_exp: -5,
            max_exp: 3,
            base_min: -2,
            base_max: 1,
            rho_first: 0.125,
            rho_factor: 16.0,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.levels < 2 {
            return Err(Error::Precondition(
                "an audit needs at least two grid levels".into(),
            ));
        }
        let steps = self.levels as i32 - 1;
        if !(self.min_exp <= self.base_min
            && self.base_min <= self.base_max
            && self.base_max <= self.max_exp)
        {
            return Err(Error::Precondition(
                "base window must lie inside [min_exp, max_exp]".into(),
            ));
        }
        if self.base_min - steps != self.min_exp || self.base_max + steps < self.max_exp {
            return Err(Error::Precondition(format!(
                "{} levels starting from [{}, {}] do not reach [{}, {}] (the diagonal side must be reached exactly)",
                self.levels, self.base_min, self.base_max, self.min_exp, self.max_exp
            )));
        }
        if !(self.rho_first > 0.0 && self.rho_first < 0.5) || !(self.rho_factor > 1.0) {
            return Err(Error::Domain(
                "rho_first must lie in (0, 1/2) and rho_factor must exceed 1".into(),
            ));
        }
        Ok(())
    }

    /// Exponent window of level `k` (one-based).
    pub fn window(&self, k: usize) -> (i32, i32) {
        let step = k as i32 - 1;
        (
            (self.base_min - step).max(self.min_exp),
            (self.base_max + step).min(self.max_exp),
        )
    }

    pub fn rho(&self, k: usize) -> f64 {
        self.rho_first * self.rho_factor.powi(1 - k as i32)
    }

    /// Smallest separation reached at the finest level.
    pub fn diagonal_cutoff(&self) -> f64 {
        2f64.powi(self.min_exp)
    }

    /// First level whose window contains `j`.
    fn level_of(&self, j: i32) -> usize {
        (1..=self.levels)
            .find(|&k| {
                let (lo, hi) = self.window(k);
                lo <= j && j <= hi
            })
            .unwrap_or(self.levels)
    }
}

/// A pair `(x, y)`, `x ≠ y`, first present at `level`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditPair<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub level: usize,
}

/// `(x, y)` with one argument moved to `moved`, `|x − y| > 2|moved − original|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditTriple<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub moved: Vec<T>,
    pub level: usize,
}

/// Nested evaluation sets for the growth and smoothness audits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleGrid<T> {
    dim: usize,
    levels: usize,
    pairs: Vec<AuditPair<T>>,
    x_triples: Vec<AuditTriple<T>>,
    y_triples: Vec<AuditTriple<T>>,
}

fn dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&u, &v)| (u - v) * (u - v))
        .sum::<T>()
        .sqrt()
}

impl<T: Real> TripleGrid<T> {
    /// Checks the separation hypotheses and level tags of hand-built lists.
    pub fn new(
        dim: usize,
        levels: usize,
        pairs: Vec<AuditPair<T>>,
        x_triples: Vec<AuditTriple<T>>,
        y_triples: Vec<AuditTriple<T>>,
    ) -> Result<Self> {
        if dim == 0 || levels == 0 {
            return Err(Error::Precondition(
                "grid dimension and level count must be positive".into(),
            ));
        }
        let check_point = |p: &[T]| -> Result<()> {
            if p.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|&v| !(v >= T::zero()) || !v.is_finite()) {
                return Err(Error::Domain(
                    "grid points must lie in the closed positive orthant".into(),
                ));
            }
            Ok(())
        };
        let check_level = |l: usize| -> Result<()> {
            if l == 0 || l > levels {
                return Err(Error::Precondition(format!(
                    "level {l} outside 1..={levels}"
                )));
            }
            Ok(())
        };
        for p in &pairs {
            check_point(&p.x)?;
            check_point(&p.y)?;
            check_level(p.level)?;
            if !(dist(&p.x, &p.y) > T::zero()) {
                return Err(Error::Precondition("growth pairs require x != y".into()));
            }
        }
        for (list, moves_x) in [(&x_triples, true), (&y_triples, false)] {
            for tr in list {
                check_point(&tr.x)?;
                check_point(&tr.y)?;
                check_point(&tr.moved)?;
                check_level(tr.level)?;
                let base = if moves_x { &tr.x } else { &tr.y };
                if !(dist(&tr.x, &tr.y) > T::two() * dist(base, &tr.moved)) {
                    return Err(Error::Precondition(
                        "smoothness triples require |x - y| > 2 |moved - original|".into(),
                    ));
                }
            }
        }
        Ok(TripleGrid {
            dim,
            levels,
            pairs,
            x_triples,
            y_triples,
        })
    }

    /// Nested dyadic grids on `ℝ^d_+`.
    ///
    /// Anchors are `0` and `2^j` along the axes and the diagonal; partners sit
    /// at distance `2^j` along `±e_i` (and `±(e_1 ± e_2)/√2` for `d ≥ 2`).
    /// Smoothness triples move one argument a fraction `ρ` of the way toward the other.
    pub fn dyadic(dim: usize, spec: &GridSpec) -> Result<Self> {
        spec.validate()?;
        if dim == 0 {
            return Err(Error::Precondition(
                "grid dimension must be positive".into(),
            ));
        }
        let (lo, hi) = spec.window(spec.levels);
        let mut anchors: Vec<(Vec<T>, usize)> = vec![(vec![T::zero(); dim], 1)];
        for j in lo..=hi {
            let r = T::two().powi(j);
            let level = spec.level_of(j);
            let mut dirs: Vec<Vec<T>> = vec![vec![T::one(); dim]];
            if dim > 1 {
                dirs.extend((0..dim).map(|i| {
                    (0..dim)
                        .map(|k| if k == i { T::one() } else { T::zero() })
                        .collect()
                }));
            }
            for u in dirs {
                let norm = u.iter().map(|&v| v * v).sum::<T>().sqrt();
                anchors.push((u.iter().map(|&v| r * v / norm).collect(), level));
            }
        }
        let mut dirs: Vec<Vec<T>> = Vec::new();
        for i in 0..dim {
            let e: Vec<T> = (0..dim)
                .map(|k| if k == i { T::one() } else { T::zero() })
                .collect();
            dirs.push(e.clone());
            dirs.push(e.iter().map(|&v| -v).collect());
        }
        if dim > 1 {
            let s = T::half().sqrt();
            for sign in [T::one(), -T::one()] {
                let mut u = vec![T::zero(); dim];
                u[0] = s;
                u[1] = sign * s;
                dirs.push(u.clone());
                dirs.push(u.iter().map(|&v| -v).collect());
            }
        }
        let mut pairs = Vec::new();
        for (x, la) in &anchors {
            for j in lo..=hi {
                let s = T::two().powi(j);
                let level = (*la).max(spec.level_of(j));
                for u in &dirs {
                    let y: Vec<T> = x.iter().zip(u).map(|(&a, &b)| a + s * b).collect();
                    // partners on the boundary are kept; round-off below zero is snapped
                    if y.iter().any(|&v| v < -T::c(1e-12) * s) {
                        continue;
                    }
                    let y = y.into_iter().map(|v| v.max(T::zero())).collect();
                    pairs.push(AuditPair {
                        x: x.clone(),
                        y,
                        level,
                    });
                }
            }
        }
        let mut x_triples = Vec::new();
        let mut y_triples = Vec::new();
        for p in &pairs {
            for k in 1..=spec.levels {
                let rho = T::c(spec.rho(k));
                let level = p.level.max(k);
                let toward = |from: &[T], to: &[T]| -> Vec<T> {
                    from.iter()
                        .zip(to)
                        .map(|(&a, &b)| a + rho * (b - a))
                        .collect()
                };
                x_triples.push(AuditTriple {
                    x: p.x.clone(),
                    y: p.y.clone(),
                    moved: toward(&p.x, &p.y),
                    level,
                });
                y_triples.push(AuditTriple {
                    x: p.x.clone(),
                    y: p.y.clone(),
                    moved: toward(&p.y, &p.x),
                    level,
                });
            }
        }
        Self::new(dim, spec.levels, pairs, x_triples, y_triples)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn pairs(&self) -> &[AuditPair<T>] {
        &self.pairs
    }

    pub fn x_triples(&self) -> &[AuditTriple<T>] {
        &self.x_triples
    }

    pub fn y_triples(&self) -> &[AuditTriple<T>] {
        &self.y_triples
    }

    /// Item counts per level (cumulative).
    pub fn counts(&self) -> Vec<(usize, usize, usize)> {
        (1..=self.levels)
            .map(|k| {
                (
                    self.pairs.iter().filter(|p| p.level <= k).count(),
                    self.x_triples.iter().filter(|p| p.level <= k).count(),
                    self.y_triples.iter().filter(|p| p.level <= k).count(),
                )
            })
            .collect()
    }
}
