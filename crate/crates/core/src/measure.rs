//! The measures `dw_α(x) = ∏ |x_j|^{2α_j+1} dx` and `dw_α^+`, cube and ball
//! volumes, the area-integral weight `φ_α`, the Schläfli measures `Π_β`, and
//! empirical Muckenhoupt constants.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_jacobi, gauss_laguerre, gauss_legendre, left_singular, Rule};
use crate::real::Real;
use crate::specfun::gamma::ln_gamma;
use crate::specfun::AlphaVector;

/// `dw_α` on `ℝ^d`, or its restriction `dw_α^+` to the open orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMeasure<T> {
    pub alpha: AlphaVector<T>,
    pub restricted: bool,
}

impl<T: Real> WeightedMeasure<T> {
    pub fn new(alpha: AlphaVector<T>, restricted: bool) -> Self {
        WeightedMeasure { alpha, restricted }
    }

    /// Density with respect to Lebesgue measure.
    pub fn density(&self, x: &[T]) -> T {
        if self.restricted && x.iter().any(|&v| v < T::zero()) {
            return T::zero();
        }
        density(&self.alpha, x)
    }
}

/// `∏ |x_j|^{2α_j+1}`.
pub fn density<T: Real>(alpha: &AlphaVector<T>, x: &[T]) -> T {
    alpha
        .entries()
        .iter()
        .zip(x)
        .map(|(&a, &v)| v.abs().powf(T::two() * a + T::one()))
        .fold(T::one(), |acc, v| acc * v)
}

/// `∫_0^u s^{2a+1} ds`.
fn radial_primitive<T: Real>(u: T, a: T) -> T {
    let p = T::two() * a + T::two();
    u.powf(p) / p
}

/// `w_{a}^+((x - t, x + t) ∩ ℝ_+)`.
pub fn v_plus<T: Real>(xj: T, t: T, aj: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::Domain(format!(
            "cube half-side must be positive, got {t}"
        )));
    }
    Ok(v_plus_unchecked(xj, t, aj))
}

pub(crate) fn v_plus_unchecked<T: Real>(xj: T, t: T, aj: T) -> T {
    if xj < t {
        radial_primitive(xj + t, aj)
    } else {
        radial_primitive(xj + t, aj) - radial_primitive(xj - t, aj)
    }
}

/// `w_{a}((x - t, x + t))` on the whole line.
pub fn v_full<T: Real>(xj: T, t: T, aj: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::Domain(format!(
            "cube half-side must be positive, got {t}"
        )));
    }
    let signed = |u: T| {
        if u < T::zero() {
            -radial_primitive(-u, aj)
        } else {
            radial_primitive(u, aj)
        }
    };
    Ok(signed(xj + t) - signed(xj - t))
}

/// `V_t^{α,+}(x) = ∏ V_t^{α_j,+}(x_j)`.
pub fn v_plus_cube<T: Real>(x: &[T], t: T, alpha: &AlphaVector<T>) -> Result<T> {
    alpha.check_dim(x.len())?;
    let mut acc = T::one();
    for (&xj, &aj) in x.iter().zip(alpha.entries()) {
        acc = acc * v_plus(xj, t, aj)?;
    }
    Ok(acc)
}

/// `V_t^α(x) = ∏ V_t^{α_j}(x_j)` over full cubes in `ℝ^d`.
pub fn v_cube<T: Real>(x: &[T], t: T, alpha: &AlphaVector<T>) -> Result<T> {
    alpha.check_dim(x.len())?;
    let mut acc = T::one();
    for (&xj, &aj) in x.iter().zip(alpha.entries()) {
        acc = acc * v_full(xj, t, aj)?;
    }
    Ok(acc)
}

/// `φ_α(x, z, t) = ∏ (x_j + z_j)^{2α_j+1} / V_{√t}^{α_j,+}(x_j)`, and zero when
/// `x + z` leaves the closed orthant.
pub fn phi_alpha<T: Real>(x: &[T], z: &[T], t: T, alpha: &AlphaVector<T>) -> T {
    let st = t.sqrt();
    let mut acc = T::one();
    for ((&xj, &zj), &aj) in x.iter().zip(z).zip(alpha.entries()) {
        let w = xj + zj;
        if w < T::zero() {
            return T::zero();
        }
        acc = acc * w.powf(T::two() * aj + T::one()) / v_plus_unchecked(xj, st, aj);
    }
    acc
}

/// One coordinate of `Π_β`: density `(1-s²)^{β-1/2} / (√π 2^β Γ(β+1/2))` on
/// `[-1, 1]`, or `(η_{-1} + η_1)/√(2π)` at `β = -1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiMeasure1d<T> {
    pub beta: T,
    pub point_mass: bool,
    /// Gauss–Jacobi nodes on `[-1, 1]` with normalised weights.
    pub rule: Rule<T>,
    /// Generalized Gauss–Laguerre rule with exponent `β - 1/2` for large tilts.
    laguerre: Rule<T>,
    norm: T,
}

/// Tilt above which `∫ e^{b(s-1)} Π_β(ds)` is evaluated through `s = 1 - r/b`.
pub const TILT_SWITCH: f64 = 30.0;

impl<T: Real> PiMeasure1d<T> {
    pub fn new(beta: T, n: usize) -> Result<Self> {
        if !(beta >= -T::half()) {
            return Err(Error::Domain(format!(
                "Pi measure order must be >= -1/2, got {beta}"
            )));
        }
        let n = n.max(1);
        if beta == -T::half() {
            let w = T::one() / (T::two() * T::PI()).sqrt();
            return Ok(PiMeasure1d {
                beta,
                point_mass: true,
                rule: Rule {
                    nodes: vec![-T::one(), T::one()],
                    weights: vec![w, w],
                },
                laguerre: Rule {
                    nodes: vec![],
                    weights: vec![],
                },
                norm: w,
            });
        }
        let ex = beta - T::half();
        let norm =
            (-(T::half() * T::PI().ln() + beta * T::c(2f64.ln()) + ln_gamma(beta + T::half())))
                .exp();
        let gj = gauss_jacobi(n, ex, ex);
        let rule = Rule {
            nodes: gj.nodes,
            weights: gj.weights.iter().map(|&w| w * norm).collect(),
        };
        Ok(PiMeasure1d {
            beta,
            point_mass: false,
            rule,
            laguerre: gauss_laguerre(n, ex),
            norm,
        })
    }

    pub fn total_mass(&self) -> T {
        self.rule.total_mass()
    }

    /// `(∫ e^{b(s-1)} Π_β(ds), ∫ (1-s) e^{b(s-1)} Π_β(ds))` for `b ≥ 0`.
    pub fn tilted_moments(&self, b: T) -> (T, T) {
        if self.point_mass {
            let e = (-T::two() * b).exp();
            let w = self.norm;
            return (w * (T::one() + e), w * T::two() * e);
        }
        if b <= T::c(TILT_SWITCH) {
            let mut m0 = T::zero();
            let mut n1 = T::zero();
            for (&s, &w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                let e = w * (b * (s - T::one())).exp();
                m0 = m0 + e;
                n1 = n1 + e * (T::one() - s);
            }
            return (m0, n1);
        }
        // s = 1 - r/b: ∫_0^{2b} e^{-r} (r/b)^{β-1/2} (2 - r/b)^{β-1/2} dr / b
        let ex = self.beta - T::half();
        let scale = self.norm * b.powf(-(self.beta + T::half()));
        let limit = T::two() * b;
        let mut m0 = T::zero();
        let mut n1 = T::zero();
        for (&r, &w) in self.laguerre.nodes.iter().zip(&self.laguerre.weights) {
            if r >= limit {
                break;
            }
            let v = w * (T::two() - r / b).powf(ex);
            m0 = m0 + v;
            n1 = n1 + v * r / b;
        }
        (m0 * scale, n1 * scale)
    }
}

/// `Π_β = ⨂ Π_{β_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiBetaRule<T> {
    pub coords: Vec<PiMeasure1d<T>>,
}

impl<T: Real> PiBetaRule<T> {
    pub fn total_mass(&self) -> T {
        self.coords
            .iter()
            .map(|c| c.total_mass())
            .fold(T::one(), |a, b| a * b)
    }

    pub fn has_point_mass(&self, i: usize) -> bool {
        self.coords[i].point_mass
    }
}

/// Tensor `Π_β` rule with `n` nodes per coordinate (two point masses when `β_i = -1/2`).
pub fn pi_beta_rule<T: Real>(beta: &[T], n: usize) -> Result<PiBetaRule<T>> {
    let coords = beta
        .iter()
        .map(|&b| PiMeasure1d::new(b, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(PiBetaRule { coords })
}

/// Ball `B(x, r)` with centre in the closed orthant, restricted to `ℝ^d_+`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSpec<T> {
    pub center: Vec<T>,
    pub radius: T,
}

impl<T: Real> BallSpec<T> {
    pub fn new(center: Vec<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(Error::Domain(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        if center.iter().any(|&c| !(c >= T::zero())) {
            return Err(Error::Domain(
                "ball centre must lie in the closed positive orthant".into(),
            ));
        }
        Ok(BallSpec { center, radius })
    }
}

/// `w_α^+(B)` together with the cube surrogate `V_r^{α,+}(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallMeasure<T> {
    /// Quadrature value; `None` when the dimension exceeds the exact path.
    pub ball: Option<T>,
    pub cube: T,
    /// Whether the caller should rely on the cube surrogate.
    pub surrogate_only: bool,
}

impl<T: Real> BallMeasure<T> {
    /// Ball value when available, otherwise the cube surrogate.
    pub fn value(&self) -> T {
        self.ball.unwrap_or(self.cube)
    }

    pub fn ratio(&self) -> Option<T> {
        self.ball.map(|b| b / self.cube)
    }
}

/// Highest dimension handled by nested ball quadrature.
pub const BALL_EXACT_MAX_DIM: usize = 3;
const BALL_ORDER: usize = 16;
const BALL_GRADING: usize = 4;

pub fn ball_measure<T: Real>(ball: &BallSpec<T>, alpha: &AlphaVector<T>) -> Result<BallMeasure<T>> {
    alpha.check_dim(ball.center.len())?;
    let cube = v_plus_cube(&ball.center, ball.radius, alpha)?;
    if ball.center.len() > BALL_EXACT_MAX_DIM {
        return Ok(BallMeasure {
            ball: None,
            cube,
            surrogate_only: true,
        });
    }
    let value = nested_ball_measure(&ball.center, ball.radius, alpha.entries());
    Ok(BallMeasure {
        ball: Some(value),
        cube,
        surrogate_only: false,
    })
}

/// Graded composite rule for `∫_{θ_lo}^{π/2} g(θ) (c + ρ sin θ)^γ dθ`, refined
/// toward `θ_lo`; the returned weights include the factor `(c + ρ sin θ)^γ`.
fn theta_rule<T: Real>(c: T, rho: T, gamma: T) -> Vec<(T, T)> {
    let top = T::c(FRAC_PI_2);
    let cut = c < rho;
    let lo = if cut { (-c / rho).asin() } else { -top };
    let len = top - lo;
    let mut edges = vec![lo];
    for k in (0..BALL_GRADING).rev() {
        edges.push(lo + len * T::c(0.25).powi(k as i32 + 1));
    }
    edges.push(top);
    let gl = gauss_legendre::<T>(BALL_ORDER);
    let mut pts = Vec::new();
    for (i, w) in edges.windows(2).enumerate() {
        if i == 0 && cut && gamma != T::zero() && c > T::zero() {
            // c + ρ sin θ vanishes linearly at θ_lo; the rule absorbs (θ - θ_lo)^γ.
            let rule = left_singular(BALL_ORDER, w[0], w[1], gamma);
            for (&th, &wt) in rule.nodes.iter().zip(&rule.weights) {
                let x = c + rho * th.sin();
                pts.push((th, wt * (x / (th - lo)).powf(gamma)));
            }
        } else {
            let rule = gl.mapped(w[0], w[1]);
            for (&th, &wt) in rule.nodes.iter().zip(&rule.weights) {
                let x = (c + rho * th.sin()).max(T::zero());
                pts.push((th, wt * x.powf(gamma)));
            }
        }
    }
    pts
}

fn nested_ball_measure<T: Real>(center: &[T], rho: T, alpha: &[T]) -> T {
    let (c, a) = (center[0], alpha[0]);
    if center.len() == 1 {
        return v_plus_unchecked(c, rho, a);
    }
    let mut acc = T::zero();
    for (th, w) in theta_rule(c, rho, T::two() * a + T::one()) {
        let half = rho * th.cos();
        if half <= T::zero() {
            continue;
        }
        acc = acc + w * half * nested_ball_measure(&center[1..], half, &alpha[1..]);
    }
    acc
}

/// Nodes and weights (density included) for `∫_{B ∩ ℝ^d_+} F dw_α^+`, `d ≤ 3`.
pub fn ball_nodes<T: Real>(ball: &BallSpec<T>, alpha: &AlphaVector<T>) -> Result<Vec<(Vec<T>, T)>> {
    alpha.check_dim(ball.center.len())?;
    if ball.center.len() > BALL_EXACT_MAX_DIM {
        return Err(Error::Precondition(format!(
            "ball quadrature supports d <= {BALL_EXACT_MAX_DIM}, got {}",
            ball.center.len()
        )));
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(ball.center.len());
    collect_ball_nodes(
        &ball.center,
        ball.radius,
        alpha.entries(),
        &mut prefix,
        T::one(),
        &mut out,
    );
    Ok(out)
}

fn collect_ball_nodes<T: Real>(
    center: &[T],
    rho: T,
    alpha: &[T],
    prefix: &mut Vec<T>,
    weight: T,
    out: &mut Vec<(Vec<T>, T)>,
) {
    let (c, a) = (center[0], alpha[0]);
    let gamma = T::two() * a + T::one();
    if center.len() == 1 {
        let hi = c + rho;
        let rule = if c - rho <= T::zero() {
            left_singular(BALL_ORDER, T::zero(), hi, gamma)
        } else {
            let mut r = gauss_legendre::<T>(BALL_ORDER).mapped(c - rho, hi);
            for (w, &x) in r.weights.iter_mut().zip(&r.nodes) {
                *w = *w * x.powf(gamma);
            }
            r
        };
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let mut p = prefix.clone();
            p.push(x);
            out.push((p, weight * w));
        }
        return;
    }
    for (th, w) in theta_rule(c, rho, gamma) {
        let half = rho * th.cos();
        if half <= T::zero() {
            continue;
        }
        prefix.push(c + rho * th.sin());
        collect_ball_nodes(
            &center[1..],
            half,
            &alpha[1..],
            prefix,
            weight * w * half,
            out,
        );
        prefix.pop();
    }
}

/// Empirical `A_p` constant of `U` over a family of balls in `(ℝ^d_+, dw_α^+)`.
///
/// For `p > 1` the ratio is `⟨U⟩_B ⟨U^{-1/(p-1)}⟩_B^{p-1}`; for `p = 1` it is
/// `⟨U⟩_B / min_B U` with the minimum taken over the quadrature nodes.
pub fn ap_constant<T: Real, F: Fn(&[T]) -> T>(
    weight: F,
    p: T,
    alpha: &AlphaVector<T>,
    balls: &[BallSpec<T>],
) -> Result<T> {
    if !(p >= T::one()) {
        return Err(Error::Domain(format!("A_p exponent must be >= 1, got {p}")));
    }
    let mut sup = T::zero();
    for ball in balls {
        let nodes = ball_nodes(ball, alpha)?;
        let mut mass = T::zero();
        let mut avg_u = T::zero();
        let mut avg_dual = T::zero();
        let mut min_u = T::infinity();
        for (x, w) in &nodes {
            let u = weight(x);
            if !(u > T::zero()) || !u.is_finite() {
                return Err(Error::Data(format!(
                    "weight must be positive and finite, got {u} at {x:?}"
                )));
            }
            mass = mass + *w;
            avg_u = avg_u + *w * u;
            if p > T::one() {
                avg_dual = avg_dual + *w * u.powf(-T::one() / (p - T::one()));
            }
            min_u = min_u.min(u);
        }
        if mass <= T::zero() {
            continue;
        }
        avg_u = avg_u / mass;
        let ratio = if p > T::one() {
            avg_u * (avg_dual / mass).powf(p - T::one())
        } else {
            avg_u / min_u
        };
        sup = sup.max(ratio);
    }
    Ok(sup)
}

/// Deterministic ball family: centres on the grid `{0} ∪ {2^k}` per coordinate
/// for `k = center_exps`, radii `2^k` for `k = radius_exps`.
pub fn dyadic_ball_family<T: Real>(
    d: usize,
    center_exps: std::ops::RangeInclusive<i32>,
    center_step: usize,
    radius_exps: std::ops::RangeInclusive<i32>,
) -> Vec<BallSpec<T>> {
    let mut coords = vec![T::zero()];
    coords.extend(
        center_exps
            .step_by(center_step.max(1))
            .map(|k| T::two().powi(k)),
    );
    let mut centers: Vec<Vec<T>> = vec![vec![]];
    for _ in 0..d {
        centers = centers
            .into_iter()
            .flat_map(|c| {
                coords.iter().map(move |&v| {
                    let mut n = c.clone();
                    n.push(v);
                    n
                })
            })
            .collect();
    }
    let mut out = Vec::new();
    for c in &centers {
        for k in radius_exps.clone() {
            out.push(BallSpec {
                center: c.clone(),
                radius: T::two().powi(k),
            });
        }
    }
    out
}
