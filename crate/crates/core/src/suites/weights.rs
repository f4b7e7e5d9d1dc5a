use serde::{Deserialize, Serialize};

use super::{alpha_vectors, check_dims, label};
use crate::error::Result;
use crate::measure::{ap_constant, dyadic_ball_family, BallSpec};
use crate::report::{Check, VerificationReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ApConfig {
    pub dims: Vec<usize>,
    pub alphas: Vec<f64>,
    pub exponents: Vec<f64>,
    /// Radial power weights `U(x) = |x|^γ`.
    pub weight_powers: Vec<f64>,
    pub center_exps: (i32, i32),
    pub center_step: usize,
    pub radius_exps: (i32, i32),
}

impl Default for ApConfig {
    fn default() -> Self {
        ApConfig {
            dims: vec![1, 2],
            alphas: vec![-0.5, 0.0, 1.3],
            exponents: vec![1.0, 1.5, 2.0, 4.0],
            weight_powers: vec![0.0, 0.5, -0.5, 1.0],
            center_exps: (-4, 3),
            center_step: 1,
            radius_exps: (-10, 4),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct ApRow {
    gamma: f64,
    p: f64,
    constant: f64,
}

/// Empirical `A_p` constants of radial power weights over a dyadic ball family.
///
/// The constants are reported; the checks cover only `U ≡ 1` (constant 1) and
/// the lower bound `≥ 1` implied by Hölder's inequality.
pub fn ap(cfg: &ApConfig) -> Result<VerificationReport> {
    check_dims(&cfg.dims)?;
    let mut report = VerificationReport::new("ap", cfg)?;
    report.warn(
        "A_p constants are suprema over a finite ball family: empirical, not a membership proof",
    );
    for &d in &cfg.dims {
        let step = if d == 1 {
            cfg.center_step
        } else {
            cfg.center_step.max(2)
        };
        let balls: Vec<BallSpec<f64>> = dyadic_ball_family(
            d,
            cfg.center_exps.0..=cfg.center_exps.1,
            step,
            cfg.radius_exps.0..=cfg.radius_exps.1,
        );
        for al in alpha_vectors(d, &cfg.alphas, false)? {
            let name = label(d, &al);
            let mut rows = Vec::new();
            for &gamma in &cfg.weight_powers {
                for &p in &cfg.exponents {
                    let u = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().powf(0.5 * gamma);
                    rows.push(ApRow {
                        gamma,
                        p,
                        constant: ap_constant(u, p, &al, &balls)?,
                    });
                }
            }
            let mut unit = 0.0f64;
            for &p in &cfg.exponents {
                unit = unit.max((ap_constant(|_: &[f64]| 1.0, p, &al, &balls)? - 1.0).abs());
            }
            report.push(Check::at_most(format!("A_p(U=1) = 1 {name}"), unit, 1e-12));
            let min = rows
                .iter()
                .map(|r| r.constant)
                .fold(f64::INFINITY, f64::min);
            let mut check = Check::new(
                format!("A_p constants >= 1 {name}"),
                min >= 1.0 - 1e-12 && rows.iter().all(|r| r.constant.is_finite()),
            );
            check.value = Some(min);
            check.threshold = Some(1.0);
            report
                .push(check.with_detail(
                    &serde_json::json!({ "balls": balls.len(), "constants": rows }),
                )?);
        }
    }
    Ok(report)
}
