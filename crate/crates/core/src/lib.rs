//! Numerics for the Dunkl harmonic oscillator on `ℝ^d` with reflection group
//! `ℤ_2^d`: generalized Hermite expansions, heat and Poisson semigroups, their
//! kernels, square functions, and numerical audits of kernel estimates.
//!
//! Numerical routines are generic over [`Real`]; the aliases at the crate root
//! fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod czcheck;
pub mod error;
pub mod kernel;
pub mod measure;
pub mod operators;
pub mod quadrature;
pub mod real;
pub mod report;
pub mod specfun;
pub mod squarefn;
pub mod suites;
pub mod symmetry;

pub use error::{Error, Result};
pub use real::Real;
pub use specfun::{EpsVector, MultiIndex};

pub type AlphaVector = specfun::AlphaVector<f64>;
pub type SpectralFunction = operators::SpectralFunction<f64>;
pub type GridFunction = operators::GridFunction<f64>;
pub type HeatKernel = kernel::HeatKernel<f64>;
pub type ComponentKernel = kernel::ComponentKernel<f64>;
pub type SeriesKernel = kernel::SeriesKernel<f64>;
pub type WeightedMeasure = measure::WeightedMeasure<f64>;
pub type SquareFnValue = squarefn::SquareFnValue<f64>;
