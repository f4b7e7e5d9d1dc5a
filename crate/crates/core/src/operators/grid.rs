use crate::error::{Error, Result};
use crate::kernel::{ComponentKernel, KernelEvalConfig};
use crate::quadrature::{gauss_legendre, left_singular, subordination_rule, Rule};
use crate::real::Real;
use crate::specfun::{AlphaVector, EpsVector};

/// Samples of a function on a tensor grid, interpolated by local Lagrange
/// polynomials of `order` points per axis and taken to vanish outside the grid box.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    axes: Vec<Vec<T>>,
    values: Vec<T>,
    order: usize,
}

impl<T: Real> GridFunction<T> {
    /// `values` are in row-major order with the last axis fastest.
    pub fn new(axes: Vec<Vec<T>>, values: Vec<T>, order: usize) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Data("grid needs at least one axis".into()));
        }
        for (i, ax) in axes.iter().enumerate() {
            if ax.len() < 2 || ax.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::Data(format!(
                    "axis {i} must be strictly increasing with >= 2 points"
                )));
            }
        }
        let n: usize = axes.iter().map(|a| a.len()).product();
        if values.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("grid values must be finite".into()));
        }
        if order < 2 {
            return Err(Error::Precondition(
                "interpolation order must be >= 2".into(),
            ));
        }
        Ok(GridFunction {
            axes,
            values,
            order,
        })
    }

    pub fn sample<F: Fn(&[T]) -> T>(axes: Vec<Vec<T>>, order: usize, f: F) -> Result<Self> {
        let mut values = Vec::new();
        let mut idx = vec![0usize; axes.len()];
        let n: usize = axes.iter().map(|a| a.len()).product();
        for _ in 0..n {
            let x: Vec<T> = idx.iter().enumerate().map(|(i, &k)| axes[i][k]).collect();
            values.push(f(&x));
            for i in (0..axes.len()).rev() {
                idx[i] += 1;
                if idx[i] < axes[i].len() {
                    break;
                }
                idx[i] = 0;
            }
        }
        Self::new(axes, values, order)
    }

    /// Uniform axis `lo, lo+h, …, hi`.
    pub fn uniform_axis(lo: T, hi: T, n: usize) -> Vec<T> {
        let h = (hi - lo) / T::from_usize_lossy(n - 1);
        (0..n).map(|k| lo + h * T::from_usize_lossy(k)).collect()
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<T>] {
        &self.axes
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.axes)
            .fold(0, |acc, (&k, ax)| acc * ax.len() + k)
    }

    pub fn value_at(&self, idx: &[usize]) -> T {
        self.values[self.flat(idx)]
    }

    /// Start of the `order`-point stencil around `x` on `axis`.
    fn stencil_start(&self, axis: usize, x: T) -> usize {
        let ax = &self.axes[axis];
        let n = ax.len();
        let p = self.order.min(n);
        let pos = ax.partition_point(|&v| v < x);
        let start = pos.saturating_sub(p / 2);
        start.min(n - p)
    }

    fn lagrange_weights(nodes: &[T], x: T) -> Vec<T> {
        (0..nodes.len())
            .map(|i| {
                nodes
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != i)
                    .fold(T::one(), |acc, (_, &xk)| acc * (x - xk) / (nodes[i] - xk))
            })
            .collect()
    }

    /// Interpolated value; zero outside the grid box.
    pub fn eval(&self, x: &[T]) -> T {
        let d = self.dim();
        let mut starts = Vec::with_capacity(d);
        let mut weights = Vec::with_capacity(d);
        for (i, &xi) in x.iter().enumerate().take(d) {
            let ax = &self.axes[i];
            if xi < ax[0] || xi > ax[ax.len() - 1] {
                return T::zero();
            }
            let s = self.stencil_start(i, xi);
            let p = self.order.min(ax.len());
            starts.push(s);
            weights.push(Self::lagrange_weights(&ax[s..s + p], xi));
        }
        let mut acc = T::zero();
        let mut off = vec![0usize; d];
        let total: usize = weights.iter().map(|w| w.len()).product();
        let mut idx = vec![0usize; d];
        for _ in 0..total {
            let mut w = T::one();
            for i in 0..d {
                idx[i] = starts[i] + off[i];
                w = w * weights[i][off[i]];
            }
            acc = acc + w * self.value_at(&idx);
            for i in (0..d).rev() {
                off[i] += 1;
                if off[i] < weights[i].len() {
                    break;
                }
                off[i] = 0;
            }
        }
        acc
    }

    /// `∂_j f` at a grid node from the Lagrange interpolant on a centred stencil.
    fn partial_at(&self, idx: &[usize], j: usize) -> Result<T> {
        let ax = &self.axes[j];
        let p = self.order.min(ax.len());
        let half = p / 2;
        let k = idx[j];
        if k < half || k + (p - half) > ax.len() {
            return Err(Error::Stencil(format!(
                "no centred {p}-point stencil at node {k} of axis {j}"
            )));
        }
        let s = k - half;
        let nodes = &ax[s..s + p];
        let x = ax[k];
        // derivative of the Lagrange basis at a node
        let mut acc = T::zero();
        let mut probe = idx.to_vec();
        for i in 0..p {
            let mut li = T::zero();
            for m in 0..p {
                if m == i {
                    continue;
                }
                let mut term = T::one() / (nodes[i] - nodes[m]);
                for (n, &xn) in nodes.iter().enumerate() {
                    if n != i && n != m {
                        term = term * (x - xn) / (nodes[i] - xn);
                    }
                }
                li = li + term;
            }
            probe[j] = s + i;
            acc = acc + li * self.value_at(&probe);
        }
        Ok(acc)
    }

    /// `T_j^α f` at a grid node. The reflection `σ_j x` must also be a grid node;
    /// at `x_j = 0` the difference quotient is replaced by its limit, giving
    /// `(2α_j + 2) ∂_j f`.
    pub fn dunkl_derivative_at(
        &self,
        idx: &[usize],
        j: usize,
        alpha: &AlphaVector<T>,
    ) -> Result<T> {
        alpha.check_dim(self.dim())?;
        if j >= self.dim() {
            return Err(Error::Precondition(format!("coordinate {j} out of range")));
        }
        let ax = &self.axes[j];
        let xj = ax[idx[j]];
        let aj = alpha.get(j);
        let d = self.partial_at(idx, j)?;
        if xj == T::zero() {
            return Ok((T::two() * aj + T::two()) * d);
        }
        let tol = T::c(1e-12) * xj.abs().max(T::one());
        let Some(mirror) = ax.iter().position(|&v| (v + xj).abs() <= tol) else {
            return Err(Error::Stencil(format!(
                "axis {j} has no node at the reflection of {xj}"
            )));
        };
        let mut r = idx.to_vec();
        r[j] = mirror;
        let diff = self.value_at(idx) - self.value_at(&r);
        Ok(d + (aj + T::half()) * diff / xj)
    }
}

/// Quadrature realisation of the heat and Poisson semigroups on grid functions.
#[derive(Debug, Clone)]
pub struct GridSemigroup<T> {
    alpha: AlphaVector<T>,
    components: Vec<(EpsVector, ComponentKernel<T>)>,
    /// Per-axis rules on `[0, L_i]` with the weight `y^{2α_i+1}` included.
    rules: Vec<Rule<T>>,
    subordination: Rule<T>,
}

/// Heat times below which `T_s f ≈ f` is used inside the subordination integral.
const MIN_HEAT_TIME: f64 = 1e-3;

impl<T: Real> GridSemigroup<T> {
    /// `extent[i]` bounds `|y_i|`; panels of width `panel` carry `order` nodes.
    pub fn new(
        alpha: &AlphaVector<T>,
        extent: &[T],
        panel: T,
        order: usize,
        cfg: &KernelEvalConfig,
    ) -> Result<Self> {
        alpha.check_dim(extent.len())?;
        if !(panel > T::zero()) || order == 0 {
            return Err(Error::Precondition(
                "panel width and order must be positive".into(),
            ));
        }
        let components = EpsVector::all(alpha.dim())
            .into_iter()
            .map(|e| ComponentKernel::new(alpha, &e, cfg.pi_nodes).map(|k| (e, k)))
            .collect::<Result<Vec<_>>>()?;
        let rules = extent
            .iter()
            .zip(alpha.entries())
            .map(|(&len, &a)| {
                let gamma = T::two() * a + T::one();
                let n = (len / panel).ceil().to_usize().unwrap_or(1).max(1);
                let h = len / T::from_usize_lossy(n);
                let mut r = left_singular(order, T::zero(), h, gamma);
                let gl = gauss_legendre::<T>(order);
                for k in 1..n {
                    let mut p =
                        gl.mapped(h * T::from_usize_lossy(k), h * T::from_usize_lossy(k + 1));
                    for (w, &x) in p.weights.iter_mut().zip(&p.nodes) {
                        *w = *w * x.powf(gamma);
                    }
                    r.append(p);
                }
                r
            })
            .collect();
        let subordination = subordination_rule(T::c(0.125), T::c(-12.0), T::c(3.5));
        Ok(GridSemigroup {
            alpha: alpha.clone(),
            components,
            rules,
            subordination,
        })
    }

    fn component(&self, eps: &EpsVector) -> &ComponentKernel<T> {
        &self
            .components
            .iter()
            .find(|(e, _)| e == eps)
            .expect("all components present")
            .1
    }

    fn orthant_nodes(&self) -> Vec<(Vec<T>, T)> {
        let mut out = vec![(Vec::new(), T::one())];
        for r in &self.rules {
            let mut next = Vec::with_capacity(out.len() * r.len());
            for (p, w) in &out {
                for (&y, &wy) in r.nodes.iter().zip(&r.weights) {
                    let mut q = p.clone();
                    q.push(y);
                    next.push((q, *w * wy));
                }
            }
            out = next;
        }
        out
    }

    /// `T_t^{α,ε,+} f(x) = ∫_{ℝ^d_+} G_t^{α,ε}(x, y) f(y) dw_α^+(y)` when
    /// `restricted`; otherwise `T_t^{α,ε} f(x)` (or `T_t^α f(x)` with `eps = None`)
    /// over `ℝ^d`, assembled from orthant integrals through the parity of the components.
    pub fn heat(
        &self,
        f: &GridFunction<T>,
        t: T,
        eps: Option<&EpsVector>,
        restricted: bool,
        x: &[T],
    ) -> Result<T> {
        self.alpha.check_dim(x.len())?;
        if f.dim() != x.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                got: f.dim(),
            });
        }
        if !(t > T::zero()) {
            return Err(Error::Domain(format!("time must be positive, got {t}")));
        }
        let nodes = self.orthant_nodes();
        if restricted {
            let e =
                eps.ok_or_else(|| Error::Precondition("restricted semigroup needs eps".into()))?;
            if x.iter().any(|&v| v < T::zero()) {
                return Err(Error::Domain(
                    "restricted semigroup is evaluated on the orthant".into(),
                ));
            }
            let k = self.component(e);
            return Ok(nodes
                .iter()
                .map(|(y, w)| *w * k.bessel(x, y, t) * f.eval(y))
                .fold(T::zero(), |a, b| a + b));
        }
        let comps: Vec<EpsVector> = match eps {
            Some(e) => vec![e.clone()],
            None => EpsVector::all(x.len()),
        };
        let ax: Vec<T> = x.iter().map(|v| v.abs()).collect();
        let signs = EpsVector::all(x.len());
        let mut total = T::zero();
        for e in &comps {
            let k = self.component(e);
            let sx = parity_sign(x, e);
            let mut acc = T::zero();
            for (y, w) in &nodes {
                // Σ_η η^ε f(ηy)
                let mut sym = T::zero();
                for eta in &signs {
                    let ey: Vec<T> = y
                        .iter()
                        .enumerate()
                        .map(|(i, &v)| if eta.get(i) == 1 { -v } else { v })
                        .collect();
                    let s = (0..x.len())
                        .filter(|&i| eta.get(i) == 1 && e.get(i) == 1)
                        .count();
                    let v = f.eval(&ey);
                    sym = if s % 2 == 0 { sym + v } else { sym - v };
                }
                acc = acc + *w * k.bessel(&ax, y, t) * sym;
            }
            total = total + sx * acc;
        }
        Ok(total)
    }

    /// `P_t f(x)` through subordination of [`GridSemigroup::heat`].
    pub fn poisson(
        &self,
        f: &GridFunction<T>,
        t: T,
        eps: Option<&EpsVector>,
        restricted: bool,
        x: &[T],
    ) -> Result<T> {
        if !(t > T::zero()) {
            return Err(Error::Domain(format!("time must be positive, got {t}")));
        }
        let mut acc = T::zero();
        let mut identity_mass = T::zero();
        for (&u, &w) in self
            .subordination
            .nodes
            .iter()
            .zip(&self.subordination.weights)
        {
            let s = t * t / (T::c(4.0) * u);
            if s < T::c(MIN_HEAT_TIME) {
                identity_mass = identity_mass + w;
                continue;
            }
            acc = acc + w * self.heat(f, s, eps, restricted, x)?;
        }
        if identity_mass > T::zero() {
            let v = if restricted {
                f.eval(x)
            } else {
                match eps {
                    None => f.eval(x),
                    Some(e) => eps_part(f, e, x),
                }
            };
            acc = acc + identity_mass * v;
        }
        Ok(acc)
    }
}

fn parity_sign<T: Real>(x: &[T], e: &EpsVector) -> T {
    let neg = (0..x.len())
        .filter(|&i| e.get(i) == 1 && x[i] < T::zero())
        .count();
    if neg % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// `f_ε(x) = 2^{-d} Σ_η η^ε f(ηx)`.
fn eps_part<T: Real>(f: &GridFunction<T>, e: &EpsVector, x: &[T]) -> T {
    let mut acc = T::zero();
    for eta in EpsVector::all(x.len()) {
        let ex: Vec<T> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| if eta.get(i) == 1 { -v } else { v })
            .collect();
        let s = (0..x.len())
            .filter(|&i| eta.get(i) == 1 && e.get(i) == 1)
            .count();
        let v = f.eval(&ex);
        acc = if s % 2 == 0 { acc + v } else { acc - v };
    }
    acc * T::c(0.5).powi(x.len() as i32)
}
