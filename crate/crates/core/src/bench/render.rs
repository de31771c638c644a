use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::report::{ConvergenceRow, Report};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Markdown,
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Validation(format!(
                "unknown format `{other}` (expected markdown, csv or json)"
            ))),
        }
    }
}

pub const CSV_HEADER: [&str; 13] = [
    "problem",
    "mesh",
    "a",
    "q",
    "gamma0",
    "eps",
    "N",
    "n",
    "step",
    "error",
    "order",
    "iterations",
    "seconds",
];

/// Six significant digits; scientific notation when `|v| < 1e-3`.
pub fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    if v.abs() < 1e-3 {
        return sci;
    }
    // Exponent after rounding to six digits, so 9.999996 -> 10.0000.
    let exp: i32 = sci
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    let decimals = (5 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn csv_record(r: &ConvergenceRow) -> [String; 13] {
    [
        r.problem.to_string(),
        r.mesh.to_string(),
        format_float(r.a),
        format_float(r.q),
        format_float(r.gamma0),
        format_float(r.eps),
        r.coarse.to_string(),
        r.n.to_string(),
        r.step.to_string(),
        opt(r.error),
        opt(r.order),
        r.iterations.to_string(),
        format_float(r.seconds),
    ]
}

pub fn to_csv(report: &Report) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Validation(format!("csv output failed: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in &report.rows {
        w.write_record(csv_record(r)).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Validation(format!("csv output failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn to_json(report: &Report) -> Result<String> {
    serde_json::to_string_pretty(report)
        .map_err(|e| Error::Validation(format!("json output failed: {e}")))
}

/// Paper-style layout: one block per mesh and eps, errors and orders per
/// step across the `N` columns.
pub fn to_markdown(report: &Report) -> String {
    let mut out = String::new();
    let cfg = &report.config;
    for spec in &cfg.meshes {
        for &eps in &cfg.eps {
            let group: Vec<&ConvergenceRow> = report
                .rows
                .iter()
                .filter(|r| {
                    r.mesh == spec.family
                        && r.a == spec.a
                        && r.q == spec.q
                        && r.gamma0 == spec.gamma0
                })
                .filter(|r| r.eps == eps)
                .collect();
            let step1: Vec<&&ConvergenceRow> = group.iter().filter(|r| r.step == 1).collect();
            if step1.is_empty() {
                continue;
            }
            let _ = writeln!(
                out,
                "### {} {} mesh (a={}, q={}, gamma0={}), eps={:e}\n",
                cfg.problem,
                spec.family,
                format_float(spec.a),
                format_float(spec.q),
                format_float(spec.gamma0),
                eps
            );
            let header: Vec<String> = step1.iter().map(|r| r.coarse.to_string()).collect();
            let _ = writeln!(out, "| | N | {} |", header.join(" | "));
            let _ = writeln!(out, "|---|---|{}", "---|".repeat(header.len()));
            let max_step = group.iter().map(|r| r.step).max().unwrap_or(1);
            for step in 1..=max_step {
                let rows: Vec<&&ConvergenceRow> = group.iter().filter(|r| r.step == step).collect();
                if step > 1 {
                    let sizes: Vec<String> = rows.iter().map(|r| r.n.to_string()).collect();
                    let _ = writeln!(out, "| | n | {} |", sizes.join(" | "));
                }
                let errs: Vec<String> = rows
                    .iter()
                    .map(|r| {
                        r.error
                            .map(|e| format!("{e:.3e}"))
                            .unwrap_or("failed".into())
                    })
                    .collect();
                let ords: Vec<String> = rows
                    .iter()
                    .map(|r| r.order.map(|o| format!("{o:.4}")).unwrap_or_default())
                    .collect();
                let _ = writeln!(out, "| Step {step} | E | {} |", errs.join(" | "));
                let _ = writeln!(out, "| | O | {} |", ords.join(" | "));
            }
            let _ = writeln!(out);
        }
    }
    for f in &report.failures {
        let _ = writeln!(
            out,
            "failed: {} eps={:e} N={}: {}",
            f.mesh, f.eps, f.coarse, f.message
        );
    }
    out
}

pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Markdown => Ok(to_markdown(report)),
        Format::Csv => to_csv(report),
        Format::Json => to_json(report),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(format_float(0.0746), "0.0746000");
        assert_eq!(format_float(5.3e-3), "0.00530000");
        assert_eq!(format_float(8.491e-4), "8.49100e-4");
        assert_eq!(format_float(2.0739), "2.07390");
        assert_eq!(format_float(0.4), "0.400000");
        assert_eq!(format_float(9.9999996), "10.0000");
        assert_eq!(format_float(123456.7), "123457");
        assert_eq!(format_float(1e-3), "0.00100000");
        assert_eq!(format_float(-2.5e-7), "-2.50000e-7");
        for v in [0.0746, 8.491e-4, 1.2345678e-9, 3.5] {
            let back: f64 = format_float(v).parse().unwrap();
            assert!((back - v).abs() <= 5e-6 * v.abs());
        }
    }
}
