//! Gaussian rules built from three-term recurrences, plus the composite
//! layouts used for t-integrals and the subordination integral.
//!
//! Nodes come from the Golub–Welsch eigenproblem (implicit QL on the Jacobi
//! matrix), are polished by Newton steps on the orthonormal recurrence, and
//! the weights are recomputed with the Christoffel formula
//! `w_k = 1 / Σ_j p_j(x_k)^2`, which keeps small weights relatively accurate.

use crate::real::Real;
use crate::specfun::gamma::ln_gamma;

/// A one-dimensional quadrature rule `Σ w_k f(x_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> Rule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + w * f(x))
    }

    pub fn total_mass(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// Affine image of a rule on `[-1, 1]` onto `[lo, hi]`, weights scaled by
    /// the Jacobian. Only meaningful for rules with a constant weight function.
    pub fn mapped(&self, lo: T, hi: T) -> Rule<T> {
        let half = (hi - lo) * T::half();
        let mid = (hi + lo) * T::half();
        Rule {
            nodes: self.nodes.iter().map(|&x| mid + half * x).collect(),
            weights: self.weights.iter().map(|&w| w * half).collect(),
        }
    }

    pub fn append(&mut self, other: Rule<T>) {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
    }
}

/// Symmetric tridiagonal eigenproblem by implicit QL; returns eigenvalues and
/// the squared first components of the normalized eigenvectors.
fn tridiagonal_eigen<T: Real>(diag: &[T], offdiag: &[T]) -> (Vec<T>, Vec<T>) {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![T::zero(); n];
    e[..n.saturating_sub(1)].copy_from_slice(&offdiag[..n.saturating_sub(1)]);
    let mut z = vec![T::zero(); n];
    if n > 0 {
        z[0] = T::one();
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (T::two() * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + T::two() * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let fz = z[i + 1];
                z[i + 1] = s * z[i] + c * fz;
                z[i] = c * z[i] - s * fz;
            }
            if underflow {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    (
        idx.iter().map(|&i| d[i]).collect(),
        idx.iter().map(|&i| z[i] * z[i]).collect(),
    )
}

/// Evaluates the orthonormal polynomials `p_0..p_n` at `x`; returns
/// `(p_n(x), p_n'(x), Σ_{j<n} p_j(x)^2)`.
fn orthonormal_eval<T: Real>(x: T, a: &[T], sqrt_b: &[T], p0: T) -> (T, T, T) {
    let n = a.len();
    let mut p_prev = T::zero();
    let mut dp_prev = T::zero();
    let mut p = p0;
    let mut dp = T::zero();
    let mut sum = T::zero();
    for k in 0..n {
        sum = sum + p * p;
        let sb_prev = if k == 0 { T::zero() } else { sqrt_b[k - 1] };
        let sb = sqrt_b[k];
        let p_next = ((x - a[k]) * p - sb_prev * p_prev) / sb;
        let dp_next = (p + (x - a[k]) * dp - sb_prev * dp_prev) / sb;
        p_prev = p;
        dp_prev = dp;
        p = p_next;
        dp = dp_next;
    }
    (p, dp, sum)
}

/// Gauss rule for the monic recurrence `p_{k+1} = (x - a_k) p_k - b_k p_{k-1}`
/// with total mass `mu0`. `a` has length `n`, `b` has length `n` (entry 0 is
/// unused; `b[n]` is needed for polishing so `b` must have length `n + 1`).
pub fn gauss_from_recurrence<T: Real>(a: &[T], b: &[T], mu0: T) -> Rule<T> {
    let n = a.len();
    assert!(b.len() > n, "need n+1 recurrence coefficients b_k");
    if n == 0 {
        return Rule {
            nodes: vec![],
            weights: vec![],
        };
    }
    let off: Vec<T> = (1..n).map(|k| b[k].sqrt()).collect();
    let (mut nodes, z2) = tridiagonal_eigen(a, &off);
    let mut weights: Vec<T> = z2.iter().map(|&w| w * mu0).collect();
    // sqrt_b[k] couples p_k and p_{k+1}.
    let sqrt_b: Vec<T> = (1..=n).map(|k| b[k].sqrt()).collect();
    let p0 = T::one() / mu0.sqrt();
    for k in 0..n {
        let gap = if n == 1 {
            T::one()
        } else if k == 0 {
            nodes[1] - nodes[0]
        } else if k + 1 == n {
            nodes[k] - nodes[k - 1]
        } else {
            (nodes[k + 1] - nodes[k]).min(nodes[k] - nodes[k - 1])
        };
        let mut x = nodes[k];
        for _ in 0..3 {
            let (p, dp, _) = orthonormal_eval(x, a, &sqrt_b, p0);
            if dp == T::zero() || !(p / dp).is_finite() {
                break;
            }
            let step = p / dp;
            if step.abs() > gap * T::c(0.1) {
                break;
            }
            x = x - step;
            if step.abs() <= T::epsilon() * x.abs().max(T::one()) {
                break;
            }
        }
        let (_, _, sum) = orthonormal_eval(x, a, &sqrt_b, p0);
        if sum.is_finite() && sum > T::zero() {
            nodes[k] = x;
            weights[k] = T::one() / sum;
        }
    }
    Rule { nodes, weights }
}

/// Gauss–Jacobi rule on `[-1, 1]` for the weight `(1-x)^a (1+x)^b`.
pub fn gauss_jacobi<T: Real>(n: usize, a: T, b: T) -> Rule<T> {
    assert!(
        a > -T::one() && b > -T::one(),
        "Jacobi exponents must exceed -1"
    );
    let ab = a + b;
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n + 1);
    beta.push(T::zero());
    for k in 0..n {
        let kk = T::from_usize_lossy(k);
        let s = T::two() * kk + ab;
        let ak = if k == 0 {
            (b - a) / (ab + T::two())
        } else {
            (b * b - a * a) / (s * (s + T::two()))
        };
        alpha.push(ak);
    }
    for k in 1..=n {
        let kk = T::from_usize_lossy(k);
        let s = T::two() * kk + ab;
        let bk = if k == 1 {
            T::c(4.0) * (T::one() + a) * (T::one() + b)
                / ((ab + T::two()).powi(2) * (ab + T::c(3.0)))
        } else {
            T::c(4.0) * kk * (kk + a) * (kk + b) * (kk + ab)
                / (s * s * (s + T::one()) * (s - T::one()))
        };
        beta.push(bk);
    }
    let ln_mu0 = (ab + T::one()) * T::LN_2() + ln_gamma(a + T::one()) + ln_gamma(b + T::one())
        - ln_gamma(ab + T::two());
    gauss_from_recurrence(&alpha, &beta, ln_mu0.exp())
}

pub fn gauss_legendre<T: Real>(n: usize) -> Rule<T> {
    gauss_jacobi(n, T::zero(), T::zero())
}

/// Generalized Gauss–Laguerre rule on `(0, ∞)` for the weight `x^a e^{-x}`.
pub fn gauss_laguerre<T: Real>(n: usize, a: T) -> Rule<T> {
    assert!(a > -T::one(), "Laguerre exponent must exceed -1");
    let alpha: Vec<T> = (0..n)
        .map(|k| T::two() * T::from_usize_lossy(k) + a + T::one())
        .collect();
    let beta: Vec<T> = (0..=n)
        .map(|k| {
            let kk = T::from_usize_lossy(k);
            kk * (kk + a)
        })
        .collect();
    gauss_from_recurrence(&alpha, &beta, ln_gamma(a + T::one()).exp())
}

/// Rule on `[lo, hi]` for `∫ g(v) (v - lo)^gamma dv`: the returned weights
/// already contain the factor `(v - lo)^gamma`, so callers sum `w_k g(v_k)`.
pub fn left_singular<T: Real>(n: usize, lo: T, hi: T, gamma: T) -> Rule<T> {
    let half = (hi - lo) * T::half();
    if gamma == T::zero() {
        return gauss_legendre(n).mapped(lo, hi);
    }
    let base = gauss_jacobi(n, T::zero(), gamma);
    let scale = half.powf(gamma + T::one());
    Rule {
        nodes: base
            .nodes
            .iter()
            .map(|&x| lo + half * (x + T::one()))
            .collect(),
        weights: base.weights.iter().map(|&w| w * scale).collect(),
    }
}

/// Same as [`left_singular`] with the power-law factor at the right end.
pub fn right_singular<T: Real>(n: usize, lo: T, hi: T, gamma: T) -> Rule<T> {
    let half = (hi - lo) * T::half();
    if gamma == T::zero() {
        return gauss_legendre(n).mapped(lo, hi);
    }
    let base = gauss_jacobi(n, gamma, T::zero());
    let scale = half.powf(gamma + T::one());
    Rule {
        nodes: base
            .nodes
            .iter()
            .map(|&x| lo + half * (x + T::one()))
            .collect(),
        weights: base.weights.iter().map(|&w| w * scale).collect(),
    }
}

/// Dyadic panel layout on `(0, 1)` for the variable `ζ = tanh t`.
///
/// Panels `[2^{-k-1}, 2^{-k}]` for `k = 1..=near_zero` accumulate at `ζ = 0`
/// and panels `[1 - 2^{-k}, 1 - 2^{-k-1}]` for `k = 1..=near_one` accumulate at
/// `ζ = 1`; each panel carries an `order`-point Gauss–Legendre rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ZetaPanels {
    pub near_zero: usize,
    pub near_one: usize,
    pub order: usize,
}

impl Default for ZetaPanels {
    fn default() -> Self {
        ZetaPanels {
            near_zero: 36,
            near_one: 48,
            order: 16,
        }
    }
}

impl ZetaPanels {
    pub fn panel_count(&self) -> usize {
        self.near_zero + self.near_one
    }

    /// Panel endpoints in increasing order; consecutive panels share endpoints.
    pub fn breakpoints<T: Real>(&self) -> Vec<T> {
        let mut pts = Vec::with_capacity(self.panel_count() + 1);
        for k in (1..=self.near_zero + 1).rev() {
            pts.push(T::c(0.5).powi(k as i32));
        }
        for k in 2..=self.near_one + 1 {
            pts.push(T::one() - T::c(0.5).powi(k as i32));
        }
        pts
    }

    /// Rule for `∫_0^1 F(ζ) dζ`.
    pub fn zeta_rule<T: Real>(&self) -> Rule<T> {
        let base = gauss_legendre::<T>(self.order);
        let bp = self.breakpoints::<T>();
        let mut out = Rule {
            nodes: vec![],
            weights: vec![],
        };
        for w in bp.windows(2) {
            out.append(base.mapped(w[0], w[1]));
        }
        out
    }

    /// Rule for `∫_0^∞ F(t) dt`: the ζ panels pulled back through
    /// `t = atanh ζ`, `dt = dζ / (1 - ζ²)`, followed by an `order`-point
    /// Gauss–Laguerre tail on `[t(ζ_max), ∞)` where ζ is no longer resolved
    /// in floating point.
    pub fn t_rule<T: Real>(&self) -> TRule<T> {
        let base = gauss_legendre::<T>(self.order);
        let bp = self.breakpoints::<T>();
        let mut nodes = Vec::with_capacity(self.panel_count() * self.order + self.order);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for (k, w) in bp.windows(2).enumerate() {
            // Panels accumulating at ζ = 1 are parametrised by v = 1 - ζ, which
            // stays exactly representable where ζ itself does not.
            let near_one = k >= self.near_zero;
            let (lo, hi) = if near_one {
                (T::one() - w[1], T::one() - w[0])
            } else {
                (w[0], w[1])
            };
            let panel = base.mapped(lo, hi);
            for (&x, &wx) in panel.nodes.iter().zip(&panel.weights) {
                let zt = if near_one {
                    ZetaTime::from_one_minus_zeta(x)
                } else {
                    ZetaTime::from_zeta(x)
                };
                weights.push(wx / zt.sech2);
                nodes.push(zt);
            }
        }
        let t_end = t_of_zeta(*self.breakpoints::<T>().last().expect("at least one panel"));
        let tail = gauss_laguerre::<T>(self.order, T::zero());
        for (&s, &w) in tail.nodes.iter().zip(&tail.weights) {
            nodes.push(ZetaTime::from_t(t_end + s));
            weights.push(w * s.exp());
        }
        TRule { nodes, weights }
    }
}

/// A time `t > 0` together with `ζ = tanh t` and `1 - ζ² = sech² t`, the
/// latter kept separately so that large times do not lose it to rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaTime<T> {
    pub t: T,
    pub zeta: T,
    pub sech2: T,
}

impl<T: Real> ZetaTime<T> {
    pub fn from_t(t: T) -> Self {
        let e = (-T::two() * t).exp();
        let sech2 = T::c(4.0) * e / ((T::one() + e) * (T::one() + e));
        ZetaTime {
            t,
            zeta: t.tanh(),
            sech2,
        }
    }

    pub fn from_zeta(zeta: T) -> Self {
        ZetaTime {
            t: t_of_zeta(zeta),
            zeta,
            sech2: (T::one() - zeta) * (T::one() + zeta),
        }
    }

    /// From `v = 1 - ζ`, exact for `v` far below the spacing of doubles near 1.
    pub fn from_one_minus_zeta(v: T) -> Self {
        let t = T::half() * ((T::two() - v) / v).ln();
        ZetaTime {
            t,
            zeta: T::one() - v,
            sech2: v * (T::two() - v),
        }
    }
}

/// Quadrature for `∫_0^∞ F(t) dt` with nodes carrying their ζ values.
#[derive(Debug, Clone, PartialEq)]
pub struct TRule<T> {
    pub nodes: Vec<ZetaTime<T>>,
    pub weights: Vec<T>,
}

impl<T: Real> TRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(&ZetaTime<T>) -> T>(&self, mut f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(z, &w)| w * f(z))
            .sum()
    }
}

/// `t(ζ) = ½ log((1+ζ)/(1-ζ))`, evaluated without cancellation for small ζ.
pub fn t_of_zeta<T: Real>(zeta: T) -> T {
    T::half() * ((T::two() * zeta) / (T::one() - zeta)).ln_1p()
}

/// Exponentially mapped trapezoid rule for the subordination integral
/// `∫_0^∞ g(u) e^{-u} du / √(π u)`; returned weights include the measure.
///
/// With `u = e^{2s}` the integrand decays double-exponentially as `s → +∞`
/// and like `e^{s}` as `s → -∞`, so the trapezoid rule converges
/// geometrically in the step size.
pub fn subordination_rule<T: Real>(step: T, s_min: T, s_max: T) -> Rule<T> {
    let count = ((s_max - s_min) / step).round().to_usize().unwrap_or(0);
    let mut nodes = Vec::with_capacity(count + 1);
    let mut weights = Vec::with_capacity(count + 1);
    let norm = T::two() / T::PI().sqrt();
    for i in 0..=count {
        let s = s_min + step * T::from_usize_lossy(i);
        let u = (T::two() * s).exp();
        let w = step * norm * s.exp() * (-u).exp();
        if w > T::zero() {
            nodes.push(u);
            weights.push(w);
        }
    }
    Rule { nodes, weights }
}

/// Default subordination rule (step 1/16 on `s ∈ [-40, 5]`).
pub fn default_subordination_rule<T: Real>() -> Rule<T> {
    subordination_rule(T::c(1.0 / 16.0), T::c(-40.0), T::c(5.0))
}
