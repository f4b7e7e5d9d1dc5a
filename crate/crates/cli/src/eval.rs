//! `squarefn eval`: a square function of a finite Hermite expansion along the
//! diagonal `x = s (1, ..., 1)`.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use dunkl_core::operators::SpectralFunction;
use dunkl_core::report::{config_hash, SCHEMA_VERSION};
use dunkl_core::squarefn::{
    evaluate, Semigroup, Setting, SquareFnConfig, SquareFnKind, SquareInput, SquareOp,
};
use dunkl_core::{AlphaVector, MultiIndex};
use rayon::prelude::*;
use serde_json::json;

use crate::output::line_plot;
use crate::run::parse_eps;
use crate::settings::Settings;

/// `m=c` terms separated by `;`, with `m` a comma-separated multi-index; `c` defaults to 1.
fn parse_terms(s: &str, d: usize) -> Result<Vec<(MultiIndex, f64)>> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let (m, c) = t.split_once('=').unwrap_or((t, "1"));
            let idx = m
                .split(',')
                .map(|k| {
                    k.trim()
                        .parse::<usize>()
                        .map_err(|e| anyhow!("term '{t}': {e}"))
                })
                .collect::<Result<Vec<_>>>()?;
            if idx.len() != d {
                bail!("term '{t}' has {} indices, expected {d}", idx.len());
            }
            let c = c
                .trim()
                .parse::<f64>()
                .map_err(|e| anyhow!("term '{t}': {e}"))?;
            Ok((MultiIndex::new(idx), c))
        })
        .collect()
}

struct Row {
    s: f64,
    value: f64,
    error: f64,
    warning: Option<String>,
}

pub struct Plan {
    alpha: AlphaVector,
    kind: SquareFnKind,
    terms: Vec<(MultiIndex, f64)>,
    cfg: SquareFnConfig,
    from: f64,
    to: f64,
    n: usize,
}

impl Plan {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let d = s.get::<usize>("d")?.unwrap_or(1);
        let alphas = s.list::<f64>("alpha")?.unwrap_or_else(|| vec![0.0]);
        let alpha = match alphas.as_slice() {
            [a] => AlphaVector::uniform(d, *a)?,
            _ => AlphaVector::new(alphas.clone())?,
        };
        if alpha.dim() != d {
            bail!("alpha has {} entries, expected 1 or d = {d}", alpha.dim());
        }
        let op: SquareOp = s.get("kind")?.unwrap_or(SquareOp::GV);
        let semigroup: Semigroup = s.get("semigroup")?.unwrap_or(Semigroup::Heat);
        let setting = match s.raw("eps") {
            None | Some("full") => Setting::FullSpace,
            Some(bits) => Setting::EpsPlus(parse_eps(bits)?),
        };
        let kind = SquareFnKind::new(op, semigroup, setting)?;
        let terms_text = s
            .raw("terms")
            .map(str::to_string)
            .unwrap_or_else(|| vec!["0"; d].join(","));
        let terms = parse_terms(&terms_text, d)?;
        SpectralFunction::from_terms(&alpha, &terms)?;
        let mut cfg = SquareFnConfig::default();
        s.set("beta", &mut cfg.cone.beta)?;
        cfg.validate()?;
        let from = s.get::<f64>("from")?.unwrap_or(0.1);
        let to = s.get::<f64>("to")?.unwrap_or(3.0);
        let n = s.get::<usize>("points")?.unwrap_or(30);
        if n < 2 || !(from.is_finite() && to.is_finite() && from < to) {
            bail!("need points >= 2 and from < to");
        }
        Ok(Plan {
            alpha,
            kind,
            terms,
            cfg,
            from,
            to,
            n,
        })
    }

    /// Evaluates and writes `values.csv`, `values.svg` and `eval.json`; returns the config hash.
    pub fn run(&self, out: &Path) -> Result<String> {
        let Plan {
            alpha,
            kind,
            terms,
            cfg,
            from,
            to,
            n,
        } = self;
        let (d, from, to, n) = (alpha.dim(), *from, *to, *n);
        let f = SpectralFunction::from_terms(alpha, terms)?;
        let config = json!({
            "d": d,
            "alpha": alpha.entries(),
            "kind": kind,
            "terms": terms.iter().map(|(m, c)| json!({ "m": m.entries(), "c": c })).collect::<Vec<_>>(),
            "from": from,
            "to": to,
            "points": n,
            "quadrature": cfg,
        });
        let hash = config_hash(&config)?;

        let ss: Vec<f64> = (0..n)
            .map(|i| from + (to - from) * i as f64 / (n - 1) as f64)
            .collect();
        let rows = ss
            .par_iter()
            .map(|&t| {
                let x = vec![t; d];
                let v = evaluate(kind, SquareInput::Spectral(&f), None, &x, cfg)?;
                Ok(Row {
                    s: t,
                    value: v.value,
                    error: v.error,
                    warning: v.warning,
                })
            })
            .collect::<dunkl_core::Result<Vec<Row>>>()?;

        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        let mut w = csv::Writer::from_path(out.join("values.csv")).context("writing values.csv")?;
        w.write_record(["s", "x", "kind", "value", "error", "warning", "config_hash"])?;
        for r in &rows {
            let x = vec![r.s.to_string(); d].join(" ");
            w.write_record([
                r.s.to_string(),
                x,
                kind.to_string(),
                format!("{:e}", r.value),
                format!("{:e}", r.error),
                r.warning.clone().unwrap_or_default(),
                hash.clone(),
            ])?;
            println!(
                "s={:.6} value={:.12e} error={:.3e}{}",
                r.s,
                r.value,
                r.error,
                r.warning
                    .as_deref()
                    .map(|w| format!(" warning: {w}"))
                    .unwrap_or_default()
            );
        }
        w.flush()?;

        let title = format!("{kind} alpha={:?}", alpha.entries());
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.s, r.value)).collect();
        fs::write(
            out.join("values.svg"),
            line_plot(&title, "s  (x = s(1,...,1))", &pts, &hash),
        )
        .context("writing values.svg")?;
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "command": "squarefn eval",
            "config_hash": hash,
            "config": config,
            "values": rows.iter().map(|r| json!({ "s": r.s, "value": r.value, "error": r.error, "warning": r.warning })).collect::<Vec<_>>(),
        });
        fs::write(
            out.join("eval.json"),
            serde_json::to_string_pretty(&doc)? + "\n",
        )
        .context("writing eval.json")?;
        Ok(hash)
    }
}
