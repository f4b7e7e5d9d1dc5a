//! Verification suites: each runs a family of numerical checks for a
//! serializable configuration and returns a [`VerificationReport`].
//!
//! The CLI subcommands and the acceptance tests drive the same entry points.

mod spectral;
mod square;
mod weights;

#[cfg(test)]
mod tests;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::SpectralFunction;
use crate::report::VerificationReport;
use crate::specfun::{AlphaVector, EpsVector, MultiIndex};

pub use crate::czcheck::{audit_suite as cz_audit, CzSuiteConfig};
pub use spectral::{
    kernel_xcheck, ladder, ortho, semigroup, KernelXcheckConfig, LadderConfig, OrthoConfig,
    SemigroupConfig,
};
pub use square::{
    comparability, gv_identity, lp_stability, reduce, ComparabilityConfig, GvIdentityConfig,
    LpStabilityConfig, ReduceConfig,
};
pub use weights::{ap, ApConfig};

/// Largest dimension the suites accept.
pub const MAX_SUITE_DIM: usize = 2;

/// Tensor Gauss grid `[0, extent]^d` (or its reflections) for `L^p` norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridLayout {
    pub extent: f64,
    pub panels: usize,
    pub order: usize,
}

impl GridLayout {
    fn orthant(&self, alpha: &AlphaVector<f64>) -> Result<crate::squarefn::LpGrid<f64>> {
        crate::squarefn::LpGrid::orthant(alpha, self.extent, self.panels, self.order)
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::Precondition("no dimensions selected".into()));
    }
    if let Some(&d) = dims.iter().find(|&&d| d == 0 || d > MAX_SUITE_DIM) {
        return Err(Error::Precondition(format!(
            "suites run for 1 <= d <= {MAX_SUITE_DIM}, got d = {d}"
        )));
    }
    Ok(())
}

/// Multiplicity vectors in dimension `d` built from `values`: every tuple
/// when `product` is set, otherwise the uniform vectors only.
fn alpha_vectors(d: usize, values: &[f64], product: bool) -> Result<Vec<AlphaVector<f64>>> {
    if values.is_empty() {
        return Err(Error::Precondition("no multiplicities selected".into()));
    }
    if !product {
        return values.iter().map(|&a| AlphaVector::uniform(d, a)).collect();
    }
    let mut tuples: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..d {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                values.iter().map(move |&a| {
                    let mut n = t.clone();
                    n.push(a);
                    n
                })
            })
            .collect();
    }
    tuples.into_iter().map(AlphaVector::new).collect()
}

fn eps_vectors(d: usize, sel: &Option<Vec<EpsVector>>) -> Result<Vec<EpsVector>> {
    match sel {
        None => Ok(EpsVector::all(d)),
        Some(v) => {
            if let Some(e) = v.iter().find(|e| e.dim() != d) {
                return Err(Error::Dimension {
                    expected: d,
                    got: e.dim(),
                });
            }
            Ok(v.clone())
        }
    }
}

/// Deterministic generator for the `k`-th draw of a suite.
fn rng(seed: u64, k: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k))
}

/// Random expansion (supported in `N_ε` when `e` is given) with at most `modes` terms.
fn random_in(
    al: &AlphaVector<f64>,
    e: Option<&EpsVector>,
    modes: usize,
    max_degree: usize,
    r: &mut ChaCha8Rng,
) -> Result<SpectralFunction<f64>> {
    let pool = MultiIndex::all_up_to(al.dim(), max_degree)
        .iter()
        .filter(|m| e.is_none_or(|e| e.contains(m)))
        .count();
    SpectralFunction::random(al, e, modes.min(pool), max_degree, r)
}

fn label(d: usize, alpha: &AlphaVector<f64>) -> String {
    format!("d={d} alpha={:?}", alpha.entries())
}

/// Runs `run` once on a single-threaded pool and once on the global pool and
/// requires bit-identical JSON output.
pub fn determinism<F>(name: &str, run: F) -> Result<VerificationReport>
where
    F: Fn() -> Result<VerificationReport> + Sync,
{
    let first = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?
        .install(&run)?;
    let single = first.to_json()?;
    let parallel = run()?.to_json()?;
    let again = run()?.to_json()?;
    let config = serde_json::json!({ "suite": name, "config_hash": first.config_hash });
    let mut report = VerificationReport::new("determinism", &config)?;
    report.push(crate::report::Check::new(
        format!("{name}: single-threaded vs parallel"),
        single == parallel,
    ));
    report.push(crate::report::Check::new(
        format!("{name}: repeated run"),
        parallel == again,
    ));
    Ok(report)
}
