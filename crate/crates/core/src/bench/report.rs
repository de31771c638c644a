use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{convergence_order, interpolant_error, nodal_error};
use crate::mesh::{Mesh, MeshFamily, MeshSpec};
use crate::problem::{AnyProblem, FluxForm, ProblemId};
use crate::quasi::{self, NewtonConfig};
use crate::twogrid::{self, TwoGridPlan};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Nonlinear solve on the `N`-mesh only.
    Direct,
    /// Algorithm 1 with `n = round(N^r)`.
    Tg1,
    /// Algorithm 2 cascade.
    Tg2,
    /// Algorithm 1 with `r` from [`twogrid::choose_r`].
    Tg1Ropt,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "direct" => Ok(Algorithm::Direct),
            "tg1" => Ok(Algorithm::Tg1),
            "tg2" => Ok(Algorithm::Tg2),
            "tg1_ropt" | "tg1-ropt" => Ok(Algorithm::Tg1Ropt),
            other => Err(Error::Validation(format!(
                "unknown algorithm `{other}` (expected direct, tg1, tg2 or tg1_ropt)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Nodal,
    Interpolant,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nodal" => Ok(Metric::Nodal),
            "interpolant" => Ok(Metric::Interpolant),
            other => Err(Error::Validation(format!(
                "unknown metric `{other}` (expected nodal or interpolant)"
            ))),
        }
    }
}

/// A convergence sweep over `meshes x eps x coarse`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub problem: ProblemId,
    /// Family and parameters of each mesh; `eps` and `n` are filled per cell.
    pub meshes: Vec<MeshSpec<f64>>,
    pub eps: Vec<f64>,
    pub coarse: Vec<usize>,
    pub algorithm: Algorithm,
    /// Exponent for `tg1`.
    pub r: f64,
    /// Fine levels for `tg2`.
    pub levels: usize,
    pub metric: Metric,
    /// Overrides the problem's flux discretization (diffusion problems only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flux: Option<FluxForm>,
    pub tol: f64,
    pub max_iter: usize,
}

impl ReportConfig {
    pub fn new(
        problem: ProblemId,
        mesh: MeshSpec<f64>,
        eps: Vec<f64>,
        coarse: Vec<usize>,
        algorithm: Algorithm,
    ) -> Self {
        let newton = NewtonConfig::<f64>::default();
        ReportConfig {
            problem,
            meshes: vec![mesh],
            eps,
            coarse,
            algorithm,
            r: 2.0,
            levels: 2,
            metric: Metric::Nodal,
            flux: None,
            tol: newton.tol,
            max_iter: newton.max_iter,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.meshes.is_empty() || self.eps.is_empty() || self.coarse.is_empty() {
            return Err(Error::Validation(
                "mesh, eps and N lists must be nonempty".into(),
            ));
        }
        if let Some(&e) = self.eps.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
            return Err(Error::Validation(format!(
                "eps must lie in (0, 1], got {e}"
            )));
        }
        let min_n = if self.algorithm == Algorithm::Tg1Ropt {
            4
        } else {
            2
        };
        if let Some(&n) = self.coarse.iter().find(|&&n| n < min_n) {
            return Err(Error::Validation(format!(
                "N must be at least {min_n}, got {n}"
            )));
        }
        if self.algorithm == Algorithm::Tg1 && !(self.r > 1.0) {
            return Err(Error::Validation(format!(
                "r must exceed 1, got {}",
                self.r
            )));
        }
        if self.algorithm == Algorithm::Tg2 && self.levels == 0 {
            return Err(Error::Validation(
                "tg2 needs at least one fine level".into(),
            ));
        }
        for spec in &self.meshes {
            for &eps in &self.eps {
                spec.with_eps(eps).with_n(self.coarse[0]).validate()?;
            }
        }
        self.newton().validate()
    }

    fn newton(&self) -> NewtonConfig<f64> {
        NewtonConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            ..Default::default()
        }
    }

    fn plan(&self, mesh: MeshSpec<f64>, coarse: usize) -> Result<Option<TwoGridPlan<f64>>> {
        Ok(match self.algorithm {
            Algorithm::Direct => None,
            Algorithm::Tg1 => Some(TwoGridPlan::with_exponent(mesh, coarse, self.r)),
            Algorithm::Tg2 => Some(TwoGridPlan::cascade(mesh, coarse, self.levels)),
            Algorithm::Tg1Ropt => {
                let (_, fine) = twogrid::choose_r(coarse)?;
                Some(TwoGridPlan {
                    fine,
                    ..TwoGridPlan::squared(mesh, coarse)
                })
            }
        })
    }
}

/// One `(mesh, eps, N, step)` record; `step = 1` is the coarse nonlinear solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub problem: ProblemId,
    pub mesh: MeshFamily,
    pub a: f64,
    pub q: f64,
    pub gamma0: f64,
    pub eps: f64,
    #[serde(rename = "N")]
    pub coarse: usize,
    pub n: usize,
    pub step: usize,
    /// `None` when the cell failed.
    pub error: Option<f64>,
    pub order: Option<f64>,
    pub iterations: usize,
    pub seconds: f64,
}

/// A cell that could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub mesh: MeshFamily,
    pub eps: f64,
    #[serde(rename = "N")]
    pub coarse: usize,
    pub message: String,
    pub no_convergence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ReportConfig,
    pub rows: Vec<ConvergenceRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<CellFailure>,
}

impl Report {
    pub fn has_failures(&self) -> bool {
        !self.failures.is_empty()
    }

    /// Errors of one step for a given mesh index and eps, ordered by `N`.
    pub fn errors(&self, mesh: usize, eps: f64, step: usize) -> Vec<Option<f64>> {
        let spec = &self.config.meshes[mesh];
        self.rows
            .iter()
            .filter(|r| same_mesh(r, spec) && r.eps == eps && r.step == step)
            .map(|r| r.error)
            .collect()
    }

    /// Orders of one step, ordered by `N`; the last entry is always `None`.
    pub fn orders(&self, mesh: usize, eps: f64, step: usize) -> Vec<Option<f64>> {
        let spec = &self.config.meshes[mesh];
        self.rows
            .iter()
            .filter(|r| same_mesh(r, spec) && r.eps == eps && r.step == step)
            .map(|r| r.order)
            .collect()
    }
}

fn same_mesh(row: &ConvergenceRow, spec: &MeshSpec<f64>) -> bool {
    row.mesh == spec.family && row.a == spec.a && row.q == spec.q && row.gamma0 == spec.gamma0
}

struct StepResult {
    n: usize,
    error: f64,
    iterations: usize,
    seconds: f64,
}

fn step_error(
    metric: Metric,
    mesh: &Mesh<f64>,
    y: &[f64],
    exact: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    match metric {
        Metric::Nodal => nodal_error(mesh, y, Some(exact)),
        Metric::Interpolant => interpolant_error(mesh, y, Some(exact), 10 * mesh.n()),
    }
}

fn build_problem(cfg: &ReportConfig, eps: f64) -> Result<AnyProblem<f64>> {
    let problem = cfg.problem.build(eps)?;
    Ok(match (problem, cfg.flux) {
        (AnyProblem::Diffusion(p), Some(flux)) => AnyProblem::Diffusion(p.with_flux(flux)?),
        (p, _) => p,
    })
}

fn run_cell(
    cfg: &ReportConfig,
    spec: MeshSpec<f64>,
    eps: f64,
    coarse: usize,
) -> Result<Vec<StepResult>> {
    let problem = build_problem(cfg, eps)?;
    let exact = problem.exact().cloned().ok_or(Error::MissingExact)?;
    let newton = cfg.newton();
    match cfg.plan(spec, coarse)? {
        None => {
            let mesh = Mesh::build(&spec.with_eps(eps).with_n(coarse))?;
            let out = quasi::solve(&mesh, &problem, &newton)?;
            Ok(vec![StepResult {
                n: coarse,
                error: step_error(cfg.metric, &mesh, &out.y, &*exact)?,
                iterations: out.iterations,
                seconds: out.wall_time,
            }])
        }
        Some(plan) => {
            let res = twogrid::run(&problem, &plan, &newton)?;
            let mut steps = vec![StepResult {
                n: coarse,
                error: step_error(cfg.metric, &res.coarse_mesh, &res.coarse.y, &*exact)?,
                iterations: res.coarse.iterations,
                seconds: res.coarse_seconds,
            }];
            for level in &res.levels {
                steps.push(StepResult {
                    n: level.mesh.n(),
                    error: step_error(cfg.metric, &level.mesh, &level.outcome.y, &*exact)?,
                    iterations: level.outcome.iterations,
                    seconds: level.seconds,
                });
            }
            Ok(steps)
        }
    }
}

/// Runs every cell of the sweep in parallel. A failing cell yields a row
/// with no error value plus an entry in [`Report::failures`]; the sweep
/// continues. Rows are sorted by mesh, eps (descending), step and `N`.
pub fn run_report(cfg: &ReportConfig) -> Result<Report> {
    cfg.validate()?;
    let mut coarse = cfg.coarse.clone();
    coarse.sort_unstable();
    coarse.dedup();
    let mut cells = Vec::new();
    for m in 0..cfg.meshes.len() {
        for &e in &cfg.eps {
            cells.extend(coarse.iter().map(|&n| (m, e, n)));
        }
    }
    let results: Vec<_> = cells
        .par_iter()
        .map(|&(m, eps, n)| (m, eps, n, run_cell(cfg, cfg.meshes[m], eps, n)))
        .collect();

    let steps = match cfg.algorithm {
        Algorithm::Direct => 1,
        Algorithm::Tg1 | Algorithm::Tg1Ropt => 2,
        Algorithm::Tg2 => 1 + cfg.levels,
    };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (m, eps, n, result) in results {
        let spec = cfg.meshes[m];
        let row = |step: usize, fine: usize| ConvergenceRow {
            problem: cfg.problem,
            mesh: spec.family,
            a: spec.a,
            q: spec.q,
            gamma0: spec.gamma0,
            eps,
            coarse: n,
            n: fine,
            step,
            error: None,
            order: None,
            iterations: 0,
            seconds: 0.0,
        };
        match result {
            Ok(list) => {
                for (k, s) in list.into_iter().enumerate() {
                    rows.push(ConvergenceRow {
                        error: Some(s.error),
                        iterations: s.iterations,
                        seconds: s.seconds,
                        ..row(k + 1, s.n)
                    });
                }
            }
            Err(e) => {
                failures.push(CellFailure {
                    mesh: spec.family,
                    eps,
                    coarse: n,
                    message: e.to_string(),
                    no_convergence: matches!(e, Error::NoConvergence { .. }),
                });
                let sizes = match cfg.plan(spec, n) {
                    Ok(Some(plan)) => plan.fine_sizes(),
                    _ => Vec::new(),
                };
                rows.push(row(1, n));
                for step in 2..=steps {
                    rows.push(row(step, sizes.get(step - 2).copied().unwrap_or(0)));
                }
            }
        }
    }
    let eps_rank: BTreeMap<u64, usize> = cfg
        .eps
        .iter()
        .enumerate()
        .map(|(i, e)| (e.to_bits(), i))
        .collect();
    let key = |r: &ConvergenceRow| {
        (
            mesh_index(cfg, r),
            eps_rank[&r.eps.to_bits()],
            r.step,
            r.coarse,
        )
    };
    rows.sort_by_key(key);
    fill_orders(&mut rows, key);
    Ok(Report {
        config: cfg.clone(),
        rows,
        failures,
    })
}

fn mesh_index(cfg: &ReportConfig, row: &ConvergenceRow) -> usize {
    cfg.meshes
        .iter()
        .position(|s| same_mesh(row, s))
        .unwrap_or(usize::MAX)
}

/// Orders between consecutive `N` within each `(mesh, eps, step)` group.
fn fill_orders<K: Eq>(
    rows: &mut [ConvergenceRow],
    key: impl Fn(&ConvergenceRow) -> (usize, usize, usize, K),
) {
    for i in 0..rows.len() {
        let next = i + 1;
        if next >= rows.len() {
            break;
        }
        let (a, b) = (key(&rows[i]), key(&rows[next]));
        if (a.0, a.1, a.2) != (b.0, b.1, b.2) {
            continue;
        }
        // Orders assume N doubles; other ratios are rescaled.
        let ratio = rows[next].coarse as f64 / rows[i].coarse as f64;
        rows[i].order = match (rows[i].error, rows[next].error) {
            (Some(e0), Some(e1)) => convergence_order(e0, e1)
                .ok()
                .map(|o| o * std::f64::consts::LN_2 / ratio.ln()),
            _ => None,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(algorithm: Algorithm) -> ReportConfig {
        ReportConfig::new(
            ProblemId::Ex1,
            MeshSpec::vulanovic(1e-2, 0, 1.0, 0.4),
            vec![1e-1, 1e-2],
            vec![16, 8],
            algorithm,
        )
    }

    #[test]
    fn rows_sorted_with_orders_on_all_but_finest() {
        let report = run_report(&small(Algorithm::Tg1)).unwrap();
        assert_eq!(report.rows.len(), 2 * 2 * 2);
        let first = &report.rows[0];
        assert_eq!(
            (first.eps, first.step, first.coarse, first.n),
            (1e-1, 1, 8, 8)
        );
        assert!(first.order.is_some());
        assert!(report.rows[1].order.is_none());
        assert_eq!(report.rows[2].n, 64);
        assert_eq!(report.orders(0, 1e-2, 2).len(), 2);
    }

    #[test]
    fn deterministic_errors() {
        let a = run_report(&small(Algorithm::Tg2)).unwrap();
        let b = run_report(&small(Algorithm::Tg2)).unwrap();
        let errs = |r: &Report| {
            r.rows
                .iter()
                .map(|r| r.error.unwrap().to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(errs(&a), errs(&b));
    }

    #[test]
    fn empty_lists_rejected() {
        let mut cfg = small(Algorithm::Direct);
        cfg.coarse.clear();
        assert!(matches!(run_report(&cfg), Err(Error::Validation(_))));
    }

    #[test]
    fn failed_cell_is_recorded() {
        let mut cfg = small(Algorithm::Direct);
        cfg.max_iter = 1;
        let report = run_report(&cfg).unwrap();
        assert!(report.has_failures());
        assert!(report.failures.iter().all(|f| f.no_convergence));
        assert!(report
            .rows
            .iter()
            .all(|r| r.error.is_none() && r.order.is_none()));
    }

    #[test]
    fn interpolant_metric_dominates_nodal() {
        let nodal = run_report(&small(Algorithm::Direct)).unwrap();
        let mut cfg = small(Algorithm::Direct);
        cfg.metric = Metric::Interpolant;
        let interp = run_report(&cfg).unwrap();
        for (a, b) in nodal.rows.iter().zip(&interp.rows) {
            assert!(b.error.unwrap() >= a.error.unwrap());
        }
    }
}
