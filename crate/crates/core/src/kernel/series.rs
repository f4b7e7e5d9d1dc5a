use crate::real::Real;
use crate::specfun::{hermite_1d_table, phi_factor, AlphaVector, EpsVector};

/// Truncated eigenfunction expansion `Σ_{m ∈ N_ε, |m| ≤ N} e^{-tλ_m} h_m(x) h_m(y)`
/// and its `∂_t`, `δ_j`, `δ_j^*` images, used as an independent reference for
/// the integral representations.
///
/// With `ε = None` every parity is summed, giving the full kernel.
#[derive(Debug, Clone)]
pub struct SeriesKernel<T> {
    alpha: AlphaVector<T>,
    eps: Option<EpsVector>,
    order: usize,
}

#[derive(Clone, Copy)]
enum Coord {
    Plain,
    Dt,
    Lower,
    Raise,
}

impl<T: Real> SeriesKernel<T> {
    pub fn new(alpha: &AlphaVector<T>, eps: Option<&EpsVector>, order: usize) -> Self {
        SeriesKernel {
            alpha: alpha.clone(),
            eps: eps.cloned(),
            order,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn admits(&self, i: usize, k: usize) -> bool {
        match &self.eps {
            Some(e) => k % 2 == e.get(i) as usize,
            None => true,
        }
    }

    /// Sum over `|m| ≤ N` of the product of per-coordinate terms, where
    /// coordinate `special` (if any) uses the modified term `kind`.
    /// Returns the value and a tail estimate from the last two shells.
    fn sum(&self, x: &[T], y: &[T], t: T, special: Option<(usize, Coord)>) -> (T, T) {
        let d = self.alpha.dim();
        let n = self.order;
        let mut conv = vec![T::zero(); n + 1];
        conv[0] = T::one();
        let mut rate = T::zero();
        for i in 0..d {
            let a = self.alpha.get(i);
            let hx = hermite_1d_table(n + 1, a, x[i]);
            let hy = hermite_1d_table(n + 1, a, y[i]);
            let base = T::two() * a + T::two();
            rate = rate + base;
            let kind = match special {
                Some((j, kind)) if j == i => kind,
                _ => Coord::Plain,
            };
            let term: Vec<T> = (0..=n)
                .map(|k| {
                    if !self.admits(i, k) {
                        return T::zero();
                    }
                    let lam = T::two() * T::from_usize_lossy(k) + base;
                    let e = (-t * lam).exp();
                    match kind {
                        Coord::Plain => e * hx[k] * hy[k],
                        Coord::Dt => e * hx[k] * hy[k],
                        Coord::Lower if k == 0 => T::zero(),
                        Coord::Lower => e * phi_factor(k, a) * hx[k - 1] * hy[k],
                        Coord::Raise => e * phi_factor(k + 1, a) * hx[k + 1] * hy[k],
                    }
                })
                .collect();
            let mut next = vec![T::zero(); n + 1];
            for (p, &cp) in conv.iter().enumerate() {
                if cp == T::zero() {
                    continue;
                }
                for (q, &tq) in term.iter().enumerate().take(n + 1 - p) {
                    next[p + q] = next[p + q] + cp * tq;
                }
            }
            conv = next;
        }
        let dt = matches!(special, Some((_, Coord::Dt)));
        let mut value = T::zero();
        for (s, &c) in conv.iter().enumerate() {
            let w = if dt {
                -(T::two() * T::from_usize_lossy(s) + rate)
            } else {
                T::one()
            };
            value = value + w * c;
        }
        let last = conv[n].abs() + if n > 0 { conv[n - 1].abs() } else { T::zero() };
        let q = (-T::two() * t).exp();
        let growth = T::from_usize_lossy(n + 2 * d + 2) * T::from_usize_lossy(d).max(T::one());
        let tail = last * growth * q / (T::one() - q);
        (value, tail)
    }

    /// Kernel value and tail estimate.
    pub fn heat(&self, x: &[T], y: &[T], t: T) -> (T, T) {
        self.sum(x, y, t, None)
    }

    pub fn dt(&self, x: &[T], y: &[T], t: T) -> T {
        self.sum(x, y, t, Some((0, Coord::Dt))).0
    }

    /// `δ_{j,x}` applied to the series through `δ_j h_m = Φ(m_j) h_{m-e_j}`.
    pub fn delta(&self, x: &[T], y: &[T], t: T, j: usize) -> T {
        self.sum(x, y, t, Some((j, Coord::Lower))).0
    }

    /// `δ_{j,x}^*` applied through `δ_j^* h_m = Φ(m_j+1) h_{m+e_j}`.
    pub fn delta_star(&self, x: &[T], y: &[T], t: T, j: usize) -> T {
        self.sum(x, y, t, Some((j, Coord::Raise))).0
    }
}
