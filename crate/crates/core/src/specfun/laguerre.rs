use crate::error::{Error, Result};
use crate::real::Real;

/// Laguerre polynomial `L_m^a(r)` by the three-term recurrence in the degree.
pub fn laguerre_poly<T: Real>(m: usize, a: T, r: T) -> Result<T> {
    if !(a > -T::one()) {
        return Err(Error::Domain(format!(
            "Laguerre order must exceed -1, got {}",
            a
        )));
    }
    Ok(laguerre_unchecked(m, a, r))
}

pub(crate) fn laguerre_unchecked<T: Real>(m: usize, a: T, r: T) -> T {
    let l0 = T::one();
    if m == 0 {
        return l0;
    }
    let l1 = T::one() + a - r;
    if m == 1 {
        return l1;
    }
    let (mut prev, mut cur) = (l0, l1);
    for k in 1..m {
        let kk = T::from_usize_lossy(k);
        let next = ((T::two() * kk + T::one() + a - r) * cur - (kk + a) * prev) / (kk + T::one());
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma::ln_gamma;
    use approx::assert_relative_eq;

    /// Explicit sum `Σ_k (-1)^k binom(m+a, m-k) r^k / k!` with the binomial
    /// formed as a finite product.
    fn power_series(m: usize, a: f64, r: f64) -> f64 {
        (0..=m)
            .map(|k| {
                let binom: f64 = (1..=m - k)
                    .map(|i| (a + (k + i) as f64) / i as f64)
                    .product();
                let fact: f64 = (1..=k).map(|i| i as f64).product();
                (-1f64).powi(k as i32) * binom * r.powi(k as i32) / fact
            })
            .sum()
    }

    #[test]
    fn low_degree_values() {
        assert_eq!(laguerre_poly(0, 0.5, 3.7).unwrap(), 1.0);
        assert_eq!(laguerre_poly(1, 0.0, 2.0).unwrap(), -1.0);
        assert_relative_eq!(
            laguerre_poly(2, 1.0, 0.0).unwrap(),
            3.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn rejects_order_at_or_below_minus_one() {
        assert!(matches!(laguerre_poly(3, -1.0, 0.2), Err(Error::Domain(_))));
        assert!(laguerre_poly(3, -0.999, 0.2).is_ok());
    }

    #[test]
    fn recurrence_matches_power_series() {
        for &a in &[-0.5f64, 0.0, 1.3, 2.5] {
            for m in 0..10 {
                for &r in &[0.0, 0.3, 1.7, 4.0] {
                    let want = power_series(m, a, r);
                    let got = laguerre_poly(m, a, r).unwrap();
                    assert!(
                        (got - want).abs() <= 1e-11 * want.abs().max(1.0),
                        "m={m} a={a} r={r} got={got} want={want}"
                    );
                }
            }
        }
    }

    #[test]
    fn value_at_origin_is_binomial() {
        for m in 0..12 {
            let a = 0.7;
            let want =
                (ln_gamma(m as f64 + a + 1.0) - ln_gamma(m as f64 + 1.0) - ln_gamma(a + 1.0)).exp();
            assert_relative_eq!(
                laguerre_poly(m, a, 0.0).unwrap(),
                want,
                max_relative = 1e-12
            );
        }
    }
}
