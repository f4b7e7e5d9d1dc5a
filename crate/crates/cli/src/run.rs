//! Suite configurations built from settings.

use anyhow::{bail, Result};
use dunkl_core::kernel::KernelFamily;
use dunkl_core::report::VerificationReport;
use dunkl_core::suites::*;
use dunkl_core::EpsVector;

use crate::settings::Settings;

pub type Runner = Box<dyn Fn() -> dunkl_core::Result<VerificationReport> + Sync>;

pub const SUITES: &[&str] = &[
    "ortho",
    "ladder",
    "semigroup",
    "kernel-xcheck",
    "gv-identity",
    "comparability",
    "reduce",
    "lp-stability",
    "ap",
    "cz-audit",
];

/// `all`, or comma-separated bit strings such as `01,10`.
pub fn parse_eps_list(s: &Settings) -> Result<Option<Option<Vec<EpsVector>>>> {
    match s.raw("eps") {
        None => Ok(None),
        Some("all") => Ok(Some(None)),
        Some(v) => Ok(Some(Some(
            v.split(',')
                .map(|b| parse_eps(b.trim()))
                .collect::<Result<_>>()?,
        ))),
    }
}

pub fn parse_eps(bits: &str) -> Result<EpsVector> {
    let entries = bits
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => bail!("eps must be a string of 0/1 digits, got '{bits}'"),
        })
        .collect::<Result<Vec<u8>>>()?;
    Ok(EpsVector::new(entries)?)
}

fn runner<C: Sync + 'static>(
    cfg: C,
    f: fn(&C) -> dunkl_core::Result<VerificationReport>,
) -> Runner {
    Box::new(move || f(&cfg))
}

pub fn build(name: &str, s: &Settings) -> Result<Runner> {
    Ok(match name {
        "ortho" => {
            let mut c = OrthoConfig::default();
            s.set_list("d", &mut c.dims)?;
            s.set_list("alpha", &mut c.alphas)?;
            s.set("max-degree", &mut c.max_degree)?;
            s.set("tol", &mut c.tolerance)?;
            runner(c, ortho)
        }
        "ladder" => {
            let mut c = LadderConfig::default();
            s.set_list("d", &mut c.dims)?;
            s.set_list("alpha", &mut c.alphas)?;
            s.set("max-degree", &mut c.max_degree)?;
            s.set("tol", &mut c.tolerance)?;
            s.set("seed", &mut c.seed)?;
            s.set("functions", &mut c.random_functions)?;
            s.set("modes", &mut c.modes)?;
            runner(c, ladder)
        }
        "semigroup" => {
            let mut c = SemigroupConfig::default();
            s.set_list("d", &mut c.dims)?;
            s.set_list("alpha", &mut c.alphas)?;
            s.set("max-degree", &mut c.max_degree)?;
            s.set("tol", &mut c.spectral_tolerance)?;
            s.set("seed", &mut c.seed)?;
            s.set("functions", &mut c.random_functions)?;
            s.set("modes", &mut c.modes)?;
            runner(c, semigroup)
        }
        "kernel-xcheck" => {
            let mut c = KernelXcheckConfig::default();
            s.set_list("d", &mut c.dims)?;
            s.set_list("alpha", &mut c.alphas)?;
            s.set("series-order", &mut c.series_order)?;
            s.set("tol", &mut c.tolerance)?;
            runner(c, kernel_xcheck)
        }
        "gv-identity" => {
            let mut c = GvIdentityConfig::default();
            s.set_list("d", &mut c.dims)?;
            s.set_list("alpha", &mut c.alphas)?;
            if let Some(e) = parse_eps_list(s)? {
                c.eps = e;
            }
            s.set("functions", &mut c.functions)?;
            s.set("modes", &mut c.modes)?;
            s.set("max-degree", &mut c.max_degree)?;
            s.set("seed", &mut c.seed)?;
            s.set("tol", &mut c.tolerance)?;
            runner(c, gv_identity)
        }
        "comparability" => {
            let mut c = ComparabilityConfig::default();
            s.set_list("d", &mut c.dims)?;
            s.set_list("alpha", &mut c.alphas)?;
            if let Some(e) = parse_eps_list(s)? {
                c.eps = e;
            }
            s.set("functions", &mut c.functions)?;
            s.set("modes", &mut c.modes)?;
            s.set("max-degree", &mut c.max_degree)?;
            s.set("seed", &mut c.seed)?;
            runner(c, comparability)
        }
        "reduce" => {
            let mut c = ReduceConfig::default();
            s.set_list("d", &mut c.dims)?;
            s.set_list("alpha", &mut c.alphas)?;
            s.set("modes", &mut c.modes)?;
            s.set("max-degree", &mut c.max_degree)?;
            s.set("seed", &mut c.seed)?;
            s.set("beta", &mut c.cone.beta)?;
            runner(c, reduce)
        }
        "lp-stability" => {
            let mut c = LpStabilityConfig::default();
            s.set_list("alpha", &mut c.alphas)?;
            s.set("functions", &mut c.functions)?;
            s.set("modes", &mut c.modes)?;
            s.set("max-degree", &mut c.max_degree)?;
            s.set("seed", &mut c.seed)?;
            s.set_list("p", &mut c.exponents)?;
            s.set_list("gamma", &mut c.weight_powers)?;
            s.set("tol", &mut c.relative_tolerance)?;
            runner(c, lp_stability)
        }
        "ap" => {
            let mut c = ApConfig::default();
            s.set_list("d", &mut c.dims)?;
            s.set_list("alpha", &mut c.alphas)?;
            s.set_list("p", &mut c.exponents)?;
            s.set_list("gamma", &mut c.weight_powers)?;
            runner(c, ap)
        }
        "cz-audit" => {
            let mut c = CzSuiteConfig::default();
            s.set("d", &mut c.d)?;
            s.set_list("alpha", &mut c.alphas)?;
            if let Some(e) = parse_eps_list(s)? {
                c.eps = e;
            }
            if let Some(f) = s.list::<KernelFamily>("family")? {
                c.families = Some(f);
            }
            if let Some(delta) = s.get::<f64>("delta")? {
                c.delta = Some(delta);
            }
            if let Some(levels) = s.get::<usize>("levels")? {
                let g = &mut c.audit.grid;
                let steps = levels.max(1) as i32 - 1;
                g.levels = levels;
                g.min_exp = g.base_min - steps;
                g.max_exp = g.max_exp.min(g.base_max + steps);
            }
            s.set("beta", &mut c.audit.cone.beta)?;
            runner(c, cz_audit)
        }
        other => bail!(
            "unknown suite '{other}' (expected one of {})",
            SUITES.join(", ")
        ),
    })
}
