use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::metrics::nodal_error;
use super::render::format_float;
use crate::mesh::{Mesh, MeshSpec};
use crate::problem::AnyProblem;
use crate::quasi::{self, NewtonConfig};
use crate::twogrid::{self, TwoGridPlan};
use crate::{Error, Result};

/// Direct nonlinear solve on the `n = N^2` mesh against Algorithm 1 reaching
/// the same mesh. Times are medians over the repeats, in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    #[serde(rename = "N")]
    pub coarse: usize,
    pub n: usize,
    pub direct_seconds: f64,
    pub coarse_seconds: f64,
    pub fine_seconds: f64,
    pub two_grid_seconds: f64,
    /// `direct_seconds / two_grid_seconds`.
    pub ratio: f64,
    /// Coefficients of variation of the repeated measurements.
    pub direct_cv: f64,
    pub two_grid_cv: f64,
    pub direct_error: Option<f64>,
    pub two_grid_error: Option<f64>,
    pub direct_iterations: usize,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn cv(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if mean <= 0.0 || v.len() < 2 {
        return 0.0;
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    var.sqrt() / mean
}

/// Runs serially so the two measurements do not compete for cores.
pub fn timing_comparison(
    problem: &AnyProblem<f64>,
    mesh: MeshSpec<f64>,
    coarse: &[usize],
    repeats: usize,
) -> Result<Vec<TimingRow>> {
    if coarse.is_empty() || repeats == 0 {
        return Err(Error::Validation(
            "timing needs at least one N and one repeat".into(),
        ));
    }
    let eps = problem.eps();
    let cfg = NewtonConfig::default();
    let exact = problem.exact().cloned();
    let mut rows = Vec::with_capacity(coarse.len());
    for &nc in coarse {
        let plan = TwoGridPlan::squared(mesh, nc);
        plan.validate()?;
        let n = plan.fine;
        let (mut direct, mut coarse_t, mut fine_t, mut total) = (vec![], vec![], vec![], vec![]);
        let mut last = None;
        for _ in 0..repeats {
            let start = Instant::now();
            let fine_mesh = Mesh::build(&mesh.with_eps(eps).with_n(n))?;
            let out = quasi::solve(&fine_mesh, problem, &cfg)?;
            direct.push(start.elapsed().as_secs_f64());

            let start = Instant::now();
            let tg = twogrid::algorithm1(problem, &plan, &cfg)?;
            total.push(start.elapsed().as_secs_f64());
            coarse_t.push(tg.coarse_seconds);
            fine_t.push(tg.levels.iter().map(|l| l.seconds).sum());
            last = Some((fine_mesh, out, tg));
        }
        let (fine_mesh, out, tg) = last.expect("at least one repeat");
        let (tg_mesh, tg_y) = tg.finest();
        let direct_error = exact
            .as_ref()
            .map(|u| nodal_error(&fine_mesh, &out.y, Some(&**u)))
            .transpose()?;
        let two_grid_error = exact
            .as_ref()
            .map(|u| nodal_error(tg_mesh, tg_y, Some(&**u)))
            .transpose()?;
        let (dcv, tcv) = (cv(&direct), cv(&total));
        let direct_seconds = median(&mut direct);
        let two_grid_seconds = median(&mut total);
        rows.push(TimingRow {
            coarse: nc,
            n,
            direct_seconds,
            coarse_seconds: median(&mut coarse_t),
            fine_seconds: median(&mut fine_t),
            two_grid_seconds,
            ratio: direct_seconds / two_grid_seconds.max(f64::MIN_POSITIVE),
            direct_cv: dcv,
            two_grid_cv: tcv,
            direct_error,
            two_grid_error,
            direct_iterations: out.iterations,
        });
    }
    Ok(rows)
}

pub fn timing_markdown(rows: &[TimingRow]) -> String {
    let mut out = String::from(
        "| N | n | direct (s) | coarse (s) | fine (s) | two-grid (s) | ratio | direct E | two-grid E |\n|---|---|---|---|---|---|---|---|---|\n",
    );
    let e = |v: Option<f64>| v.map(|x| format!("{x:.3e}")).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "| {} | {} | {:.4} | {:.4} | {:.4} | {:.4} | {:.2} | {} | {} |",
            r.coarse,
            r.n,
            r.direct_seconds,
            r.coarse_seconds,
            r.fine_seconds,
            r.two_grid_seconds,
            r.ratio,
            e(r.direct_error),
            e(r.two_grid_error)
        );
    }
    out
}

pub fn timing_csv(rows: &[TimingRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record([
        "N",
        "n",
        "direct_seconds",
        "coarse_seconds",
        "fine_seconds",
        "two_grid_seconds",
        "ratio",
        "direct_cv",
        "two_grid_cv",
        "direct_error",
        "two_grid_error",
        "direct_iterations",
    ]);
    let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
    for r in rows {
        let _ = w.write_record([
            r.coarse.to_string(),
            r.n.to_string(),
            format_float(r.direct_seconds),
            format_float(r.coarse_seconds),
            format_float(r.fine_seconds),
            format_float(r.two_grid_seconds),
            format_float(r.ratio),
            format_float(r.direct_cv),
            format_float(r.two_grid_cv),
            opt(r.direct_error),
            opt(r.two_grid_error),
            r.direct_iterations.to_string(),
        ]);
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).expect("csv output is utf-8")
}
