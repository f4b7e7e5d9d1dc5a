//! Report, CSV and SVG writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use dunkl_core::report::VerificationReport;
use serde_json::Value;

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn write_report(dir: &Path, report: &VerificationReport) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("report.json"), report.to_json()? + "\n").context("writing report.json")?;
    let mut w = csv::Writer::from_path(dir.join("checks.csv")).context("writing checks.csv")?;
    w.write_record([
        "suite",
        "check",
        "pass",
        "value",
        "threshold",
        "config_hash",
    ])?;
    for c in &report.checks {
        w.write_record([
            report.suite.as_str(),
            &c.name,
            if c.pass { "true" } else { "false" },
            &opt(c.value),
            &opt(c.threshold),
            &report.config_hash,
        ])?;
    }
    w.flush()?;
    if report.suite == "cz-audit" {
        write_levels(dir, report)?;
    }
    Ok(())
}

/// Per-level constants of every audit in a cz-audit report.
fn write_levels(dir: &Path, report: &VerificationReport) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join("levels.csv")).context("writing levels.csv")?;
    w.write_record([
        "family",
        "space",
        "alpha",
        "eps",
        "audit",
        "delta",
        "k",
        "c_k",
        "c_k_cube",
        "ratio",
        "pass",
        "config_hash",
    ])?;
    for c in &report.checks {
        let d = &c.detail;
        let Some(levels) = d["levels"].as_array() else {
            continue;
        };
        let alpha = d["alpha"]
            .as_array()
            .map(|a| a.iter().map(Value::to_string).collect::<Vec<_>>().join(" "));
        let eps = d["eps"]
            .as_array()
            .map(|a| a.iter().map(Value::to_string).collect::<String>());
        let text = |v: &Value| match v {
            Value::String(s) => s.clone(),
            Value::Null => String::new(),
            other => other.to_string(),
        };
        for l in levels {
            w.write_record([
                text(&d["family"]),
                text(&d["space"]),
                alpha.clone().unwrap_or_default(),
                eps.clone().unwrap_or_default(),
                text(&d["kind"]),
                text(&d["delta"]),
                text(&l["k"]),
                text(&l["c"]),
                text(&l["c_cube"]),
                text(&l["ratio"]),
                text(&l["pass"]),
                report.config_hash.clone(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn print_summary(report: &VerificationReport) {
    for c in &report.checks {
        let mut line = format!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
        if let Some(v) = c.value {
            let _ = write!(line, " value={v:.6e}");
        }
        if let Some(t) = c.threshold {
            let _ = write!(line, " threshold={t:.6e}");
        }
        if let (Some(lo), Some(hi)) = (
            c.detail["min_ratio"].as_f64(),
            c.detail["max_ratio"].as_f64(),
        ) {
            let _ = write!(line, " ratio=[{lo:.6}, {hi:.6}]");
        }
        println!("{line}");
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    let failed = report.failures().count();
    println!(
        "{} {}: {} of {} checks passed (config {})",
        if report.pass { "PASS" } else { "FAIL" },
        report.suite,
        report.checks.len() - failed,
        report.checks.len(),
        &report.config_hash[..12]
    );
}

/// JSON listing of the failed checks.
pub fn failure_detail(report: &VerificationReport) -> Result<String> {
    let failed: Vec<_> = report.failures().collect();
    Ok(serde_json::to_string_pretty(&serde_json::json!({
        "suite": report.suite,
        "config_hash": report.config_hash,
        "failures": failed,
    }))?)
}

/// Line plot of `(s, value)` pairs as a standalone SVG document.
pub fn line_plot(title: &str, x_label: &str, points: &[(f64, f64)], config_hash: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 56.0;
    let finite: Vec<_> = points
        .iter()
        .copied()
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (x0, x1) = bounds(finite.iter().map(|p| p.0));
    let (y0, y1) = bounds(finite.iter().map(|p| p.1).chain([0.0]));
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let path: Vec<String> = finite
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    let _ = writeln!(s, "<desc>config_hash {config_hash}</desc>");
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{M},{} V{} H{}" fill="none" stroke="black" stroke-width="1"/>"#,
        M,
        H - M,
        W - M
    );
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        path.join(" ")
    );
    for &(x, y) in &finite {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="steelblue"/>"#,
            sx(x),
            sy(y)
        );
    }
    let text = |s: &mut String, x: f64, y: f64, anchor: &str, body: String| {
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{}</text>"#,
            escape(&body)
        );
    };
    text(&mut s, W / 2.0, 24.0, "middle", title.to_string());
    text(&mut s, W / 2.0, H - 16.0, "middle", x_label.to_string());
    text(&mut s, M, H - M + 14.0, "middle", format!("{x0:.3}"));
    text(&mut s, W - M, H - M + 14.0, "middle", format!("{x1:.3}"));
    text(&mut s, M - 4.0, H - M, "end", format!("{y0:.3e}"));
    text(&mut s, M - 4.0, M, "end", format!("{y1:.3e}"));
    text(
        &mut s,
        W - 4.0,
        H - 4.0,
        "end",
        format!("config {}", &config_hash[..12.min(config_hash.len())]),
    );
    s.push_str("</svg>\n");
    s
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_well_formed_for_degenerate_data() {
        let svg = line_plot(
            "a < b",
            "s",
            &[(1.0, 2.0), (1.0, 2.0), (f64::NAN, 1.0)],
            "abc",
        );
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a &lt; b") && svg.contains("config_hash abc"));
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
