//! Generalized Hermite functions.
//!
//! In one dimension
//! `h_{2k}^a(x) = d_{2k,a} e^{-x²/2} L_k^a(x²)` and
//! `h_{2k+1}^a(x) = d_{2k+1,a} x e^{-x²/2} L_k^{a+1}(x²)`, with signed constants
//! `d_{2k,a} = (-1)^k |d_{2k,a}|`, `d_{2k+1,a} = (-1)^k |d_{2k+1,a}|` so that the
//! lowering rule `δ h_k = Φ(k,a) h_{k-1}` holds with the positive `Φ` and
//! `a = -1/2` reproduces the classical Hermite functions.

use crate::real::Real;
use crate::specfun::gamma::ln_gamma;
use crate::specfun::{AlphaVector, MultiIndex};

/// `|d_{k,a}|`, the positive constant normalising `h_k^a` in `L²(ℝ, |x|^{2a+1} dx)`.
pub fn normalizing_const<T: Real>(k: usize, a: T) -> T {
    let half_k = T::from_usize_lossy(k / 2);
    let order = if k.is_multiple_of(2) { a } else { a + T::one() };
    (T::half() * (ln_gamma(half_k + T::one()) - ln_gamma(half_k + order + T::one()))).exp()
}

/// `Φ(m, a)`: `√(2m)` for even `m`, `√(2m + 4a + 2)` for odd `m`.
pub fn phi_factor<T: Real>(m: usize, a: T) -> T {
    let mm = T::from_usize_lossy(m);
    if m.is_multiple_of(2) {
        (T::two() * mm).sqrt()
    } else {
        (T::two() * mm + T::c(4.0) * a + T::two()).sqrt()
    }
}

/// Orthonormal Laguerre functions `√(j!/Γ(j+a+1)) L_j^a(r)` for `j = 0..len`.
fn orthonormal_laguerre<T: Real>(len: usize, a: T, r: T) -> Vec<T> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    let l0 = (-T::half() * ln_gamma(a + T::one())).exp();
    out.push(l0);
    let mut prev = T::zero();
    let mut cur = l0;
    for j in 0..len.saturating_sub(1) {
        let jj = T::from_usize_lossy(j);
        let next = ((T::two() * jj + T::one() + a - r) * cur - (jj * (jj + a)).sqrt() * prev)
            / ((jj + T::one()) * (jj + T::one() + a)).sqrt();
        out.push(next);
        prev = cur;
        cur = next;
    }
    out
}

/// `h_0^a(x), …, h_{kmax}^a(x)`.
pub fn hermite_1d_table<T: Real>(kmax: usize, a: T, x: T) -> Vec<T> {
    let r = x * x;
    let gauss = (-T::half() * r).exp();
    let even = orthonormal_laguerre(kmax / 2 + 1, a, r);
    let odd = orthonormal_laguerre(kmax.div_ceil(2), a + T::one(), r);
    (0..=kmax)
        .map(|k| {
            let half = k / 2;
            let sign = if half % 2 == 0 { T::one() } else { -T::one() };
            if k % 2 == 0 {
                sign * gauss * even[half]
            } else {
                sign * gauss * x * odd[half]
            }
        })
        .collect()
}

/// `h_k^a(x)`.
pub fn hermite_1d<T: Real>(k: usize, a: T, x: T) -> T {
    hermite_1d_table(k, a, x)[k]
}

/// `h_m^α(x) = ∏_i h_{m_i}^{α_i}(x_i)`; zero for the invalid index.
pub fn hermite_gen<T: Real>(m: &MultiIndex, alpha: &AlphaVector<T>, x: &[T]) -> T {
    let Some(m) = m.entries() else {
        return T::zero();
    };
    debug_assert_eq!(m.len(), x.len());
    m.iter()
        .zip(alpha.entries())
        .zip(x)
        .map(|((&k, &a), &xi)| hermite_1d(k, a, xi))
        .fold(T::one(), |acc, v| acc * v)
}

/// Per-coordinate tables `h_k^{α_i}(x_i)`, `k ≤ kmax`, for fast evaluation of
/// many basis functions at one point.
#[derive(Debug, Clone)]
pub struct HermiteTables<T> {
    tables: Vec<Vec<T>>,
}

impl<T: Real> HermiteTables<T> {
    pub fn new(kmax: usize, alpha: &AlphaVector<T>, x: &[T]) -> Self {
        let tables = alpha
            .entries()
            .iter()
            .zip(x)
            .map(|(&a, &xi)| hermite_1d_table(kmax, a, xi))
            .collect();
        HermiteTables { tables }
    }

    pub fn kmax(&self) -> usize {
        self.tables[0].len() - 1
    }

    pub fn coord(&self, i: usize, k: usize) -> T {
        self.tables[i][k]
    }

    pub fn eval(&self, m: &MultiIndex) -> T {
        match m.entries() {
            Some(m) => m
                .iter()
                .enumerate()
                .map(|(i, &k)| self.tables[i][k])
                .fold(T::one(), |a, b| a * b),
            None => T::zero(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_laguerre;
    use crate::specfun::laguerre_poly;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn normalizing_examples() {
        assert_relative_eq!(
            normalizing_const(0, -0.5),
            PI.powf(-0.25),
            max_relative = 1e-14
        );
        assert_relative_eq!(normalizing_const(0, 0.0), 1.0, max_relative = 1e-14);
        assert_relative_eq!(
            normalizing_const(1, -0.5),
            (2.0 / PI.sqrt()).sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_factor(2, 0.7), 2.0);
        assert_relative_eq!(phi_factor(1, -0.5), 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(phi_factor(0, 1.3), 0.0);
    }

    #[test]
    fn explicit_formula_matches_table() {
        for &a in &[-0.5f64, 0.0, 1.3] {
            for &x in &[0.0, 0.4, 1.7, -2.2] {
                let table = hermite_1d_table(11, a, x);
                for (k, &v) in table.iter().enumerate() {
                    let half = k / 2;
                    let sign = if half % 2 == 0 { 1.0 } else { -1.0 };
                    let poly = if k % 2 == 0 {
                        laguerre_poly(half, a, x * x).unwrap()
                    } else {
                        x * laguerre_poly(half, a + 1.0, x * x).unwrap()
                    };
                    let want = sign * normalizing_const(k, a) * (-x * x / 2.0).exp() * poly;
                    assert!(
                        (v - want).abs() <= 1e-12 * want.abs().max(1e-3),
                        "k={k} a={a} x={x}"
                    );
                }
            }
        }
    }

    #[test]
    fn one_dimensional_orthonormality() {
        // ∫_ℝ h_k h_l |x|^{2a+1} dx reduces through r = x² to a Laguerre-weight integral.
        for &a in &[-0.5f64, 0.0, 1.3] {
            let even_rule = gauss_laguerre(40, a);
            let odd_rule = gauss_laguerre(40, a + 1.0);
            for k in 0..=16usize {
                for l in 0..=16usize {
                    let got = if k % 2 != l % 2 {
                        0.0
                    } else {
                        let rule = if k % 2 == 0 { &even_rule } else { &odd_rule };
                        rule.integrate(|r| {
                            let x = r.sqrt();
                            let hk = hermite_1d(k, a, x) * (r / 2.0).exp();
                            let hl = hermite_1d(l, a, x) * (r / 2.0).exp();
                            if k % 2 == 0 {
                                hk * hl
                            } else {
                                hk * hl / r
                            }
                        })
                    };
                    let want = if k == l { 1.0 } else { 0.0 };
                    assert!((got - want).abs() < 1e-12, "a={a} k={k} l={l} got {got}");
                }
            }
        }
    }

    #[test]
    fn classical_hermite_functions() {
        for &x in &[-3.0f64, -0.9, 0.0, 0.35, 1.0, 2.5, 4.0] {
            let mut prev = 0.0;
            let mut cur = PI.powf(-0.25) * (-x * x / 2.0f64).exp();
            let table = hermite_1d_table(30, -0.5, x);
            for (n, &v) in table.iter().enumerate() {
                assert!(
                    (v - cur).abs() <= 1e-10 * cur.abs().max(1e-6),
                    "n={n} x={x}: {v} vs {cur}"
                );
                let nn = n as f64;
                let next = (2.0 / (nn + 1.0)).sqrt() * x * cur - (nn / (nn + 1.0)).sqrt() * prev;
                prev = cur;
                cur = next;
            }
        }
    }

    #[test]
    fn lowering_rule_pointwise() {
        // δ^e = d/dx + x on even functions, δ^o = d/dx + x + (2a+1)/x on odd ones.
        // Derivatives come from d/dr L_k^b = -L_{k-1}^{b+1}.
        for &a in &[-0.5f64, 0.0, 1.3] {
            for i in 1..=20 {
                let x = 0.17 * i as f64;
                let r = x * x;
                let g = (-r / 2.0).exp();
                for k in 1..=12usize {
                    let half = k / 2;
                    let d = normalizing_const(k, a) * if half % 2 == 0 { 1.0 } else { -1.0 };
                    let dh = if k % 2 == 0 {
                        let l = laguerre_poly(half, a, r).unwrap();
                        let dl = if half == 0 {
                            0.0
                        } else {
                            -laguerre_poly(half - 1, a + 1.0, r).unwrap()
                        };
                        d * g * (-x * l + 2.0 * x * dl)
                    } else {
                        let l = laguerre_poly(half, a + 1.0, r).unwrap();
                        let dl = if half == 0 {
                            0.0
                        } else {
                            -laguerre_poly(half - 1, a + 2.0, r).unwrap()
                        };
                        d * g * (l - r * l + 2.0 * r * dl)
                    };
                    let h = hermite_1d(k, a, x);
                    let delta = if k % 2 == 0 {
                        dh + x * h
                    } else {
                        dh + x * h + (2.0 * a + 1.0) / x * h
                    };
                    let want = phi_factor(k, a) * hermite_1d(k - 1, a, x);
                    assert!(
                        (delta - want).abs() <= 1e-9 * want.abs().max(1e-4),
                        "a={a} k={k} x={x}: {delta} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn parity_under_reflection() {
        let alpha = AlphaVector::new(vec![0.0, 1.3]).unwrap();
        let m = MultiIndex::new(vec![3, 2]);
        let x = [0.8, -1.1];
        let v = hermite_gen(&m, &alpha, &x);
        assert_relative_eq!(
            hermite_gen(&m, &alpha, &[-0.8, -1.1]),
            -v,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            hermite_gen(&m, &alpha, &[0.8, 1.1]),
            v,
            max_relative = 1e-15
        );
        assert_eq!(hermite_gen(&MultiIndex::Invalid, &alpha, &x), 0.0);
    }
}
