//! `I_ν(u) / u^ν`, the entire-in-`u²` normalisation of the modified Bessel
//! function of the first kind.

use crate::real::Real;
use crate::specfun::gamma::ln_gamma;

/// Argument above which the asymptotic expansion replaces the ascending series.
pub fn series_cutoff<T: Real>(nu: T) -> T {
    T::c(30.0).max(nu * nu)
}

/// `I_ν(u) / u^ν` for `ν ≥ -1/2`, `u ≥ 0`.
pub fn bessel_i_ratio<T: Real>(nu: T, u: T) -> T {
    if u <= series_cutoff(nu) {
        ascending_series(nu, u)
    } else {
        (u - nu * u.ln()).exp() * scaled_asymptotic(nu, u)
    }
}

/// `e^{-u} I_ν(u) / u^ν`; finite for every `u ≥ 0`.
pub fn bessel_i_ratio_scaled<T: Real>(nu: T, u: T) -> T {
    if u <= series_cutoff(nu) {
        ascending_series(nu, u) * (-u).exp()
    } else {
        (-nu * u.ln()).exp() * scaled_asymptotic(nu, u)
    }
}

/// `Σ_k (u/2)^{2k} / (2^ν k! Γ(k+ν+1))`.
pub fn ascending_series<T: Real>(nu: T, u: T) -> T {
    let q = u * u / T::c(4.0);
    let mut term = (-(nu * T::c(2f64.ln())) - ln_gamma(nu + T::one())).exp();
    let mut sum = term;
    let tol = T::epsilon() * T::c(0.25);
    for k in 1..10_000 {
        let kk = T::from_usize_lossy(k);
        term = term * q / (kk * (kk + nu));
        sum = sum + term;
        if term <= tol * sum {
            break;
        }
    }
    sum
}

/// `e^{-u} √(2πu) I_ν(u)` from the Hankel expansion, summed to its smallest term.
pub fn scaled_asymptotic<T: Real>(nu: T, u: T) -> T {
    let mu = T::c(4.0) * nu * nu;
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..200 {
        let kk = T::from_usize_lossy(k);
        let odd = T::two() * kk - T::one();
        let next = -term * (mu - odd * odd) / (kk * T::c(8.0) * u);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum / (T::two() * T::PI() * u).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma::gamma;
    use approx::assert_relative_eq;

    #[test]
    fn small_argument_limit() {
        for &nu in &[-0.5f64, 0.0, 0.5, 1.3, 2.3, 7.0] {
            let want = 1.0 / (2f64.powf(nu) * gamma(nu + 1.0));
            assert_relative_eq!(bessel_i_ratio(nu, 0.0), want, max_relative = 1e-13);
            assert_relative_eq!(bessel_i_ratio(nu, 1e-9), want, max_relative = 1e-13);
        }
    }

    #[test]
    fn half_integer_closed_forms() {
        // I_{-1/2}(u) = √(2/(πu)) cosh u, I_{1/2}(u) = √(2/(πu)) sinh u
        let c = (2.0 / std::f64::consts::PI).sqrt();
        assert_relative_eq!(
            bessel_i_ratio(-0.5, 1.0),
            c * 1f64.cosh(),
            max_relative = 1e-14
        );
        for &u in &[0.3f64, 2.0, 12.0, 29.0, 31.0, 45.0, 80.0, 300.0] {
            let cosh_form = c * (-u).exp() * u.cosh();
            let sinh_form = c * (-u).exp() * u.sinh() / u;
            assert_relative_eq!(
                bessel_i_ratio_scaled(-0.5, u),
                cosh_form,
                max_relative = 1e-13
            );
            assert_relative_eq!(
                bessel_i_ratio_scaled(0.5, u),
                sinh_form,
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn regimes_overlap() {
        for &nu in &[-0.5f64, 0.0, 0.3, 1.0, 2.3, 4.5] {
            for &u in &[30.0, 35.0, 40.0, 60.0] {
                if u < series_cutoff(nu) {
                    continue;
                }
                let s = ascending_series(nu, u) * (-u).exp();
                let a = (-nu * u.ln()).exp() * scaled_asymptotic(nu, u);
                assert!(((s - a) / s).abs() <= 1e-11, "nu={nu} u={u}: {s} vs {a}");
            }
        }
    }

    #[test]
    fn two_term_asymptotic_at_fifty() {
        // I_0(50) against e^{50}/√(100π)·(1 + 1/400); the neglected third term
        // is 9/(128·50²) ≈ 2.8e-5, which bounds the achievable agreement.
        let two_term = 50f64.exp() / (100.0 * std::f64::consts::PI).sqrt() * (1.0 + 1.0 / 400.0);
        let v = bessel_i_ratio(0.0, 50.0);
        assert!(((v - two_term) / v).abs() < 3e-5);
        let three_term =
            two_term / (1.0 + 1.0 / 400.0) * (1.0 + 1.0 / 400.0 + 9.0 / (128.0 * 2500.0));
        assert!(((v - three_term) / v).abs() < 1e-6);
    }

    #[test]
    fn recurrence_in_order() {
        // I_{ν-1}(u) - I_{ν+1}(u) = (2ν/u) I_ν(u), i.e. in ratio form
        // R_{ν-1} - u² R_{ν+1} = 2ν R_ν.
        for &nu in &[0.5f64, 1.3, 2.0] {
            for &u in &[0.7, 5.0, 25.0, 50.0] {
                let lhs =
                    bessel_i_ratio_scaled(nu - 1.0, u) - u * u * bessel_i_ratio_scaled(nu + 1.0, u);
                let rhs = 2.0 * nu * bessel_i_ratio_scaled(nu, u);
                assert!(((lhs - rhs) / rhs).abs() < 1e-10, "nu={nu} u={u}");
            }
        }
    }
}
