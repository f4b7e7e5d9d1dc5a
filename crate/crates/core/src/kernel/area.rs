use serde::{Deserialize, Serialize};

use super::{check_coordinate, check_time, ComponentKernel, KernelEvalConfig};
use crate::error::{Error, Result};
use crate::measure::phi_alpha;
use crate::quadrature::ZetaTime;
use crate::real::Real;
use crate::specfun::{AlphaVector, EpsVector};

/// Derivative taken under the cone integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AreaKind {
    V,
    H(usize),
    HStar(usize),
}

impl AreaKind {
    /// `∂_t G`, `δ_j G` or `δ_j^* G` at `(w, y)`.
    pub(crate) fn derivative<T: Real>(
        &self,
        comp: &ComponentKernel<T>,
        w: &[T],
        y: &[T],
        zt: &ZetaTime<T>,
    ) -> T {
        match *self {
            AreaKind::V => comp.dt(w, y, zt),
            AreaKind::H(j) => comp.delta(w, y, zt, j),
            AreaKind::HStar(j) => comp.delta_star(w, y, zt, j),
        }
    }

    fn coordinate(&self) -> Option<usize> {
        match *self {
            AreaKind::V => None,
            AreaKind::H(j) | AreaKind::HStar(j) => Some(j),
        }
    }
}

/// `K_{z,t}(x, y) = D G_t^{α,ε}(x+z, y) √φ_α(x, z, t) χ_{x+z ∈ ℝ^d_+}` with `D`
/// one of `∂_t`, `δ_j`, `δ_j^*` acting in the first variable.
#[allow(clippy::too_many_arguments)]
pub fn area_kernel<T: Real>(
    kind: AreaKind,
    x: &[T],
    y: &[T],
    z: &[T],
    t: T,
    alpha: &AlphaVector<T>,
    eps: &EpsVector,
    cfg: &KernelEvalConfig,
) -> Result<T> {
    check_time(t)?;
    let d = alpha.dim();
    if x.len() != d || y.len() != d || z.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: x.len().max(y.len()).max(z.len()),
        });
    }
    if let Some(j) = kind.coordinate() {
        check_coordinate(j, d)?;
    }
    let w: Vec<T> = x.iter().zip(z).map(|(&a, &b)| a + b).collect();
    if w.iter().any(|&v| v < T::zero()) {
        return Ok(T::zero());
    }
    let comp = ComponentKernel::new(alpha, eps, cfg.pi_nodes)?;
    let zt = ZetaTime::from_t(t);
    Ok(kind.derivative(&comp, &w, y, &zt) * phi_alpha(x, z, t, alpha).sqrt())
}
