//! Two-grid algorithms.
//!
//! Algorithm 1 solves the nonlinear scheme on a coarse mesh with `N`
//! intervals, interpolates the result linearly onto a fine mesh with `n > N`
//! intervals and performs a single Newton step there. Algorithm 2 repeats the
//! fine step on meshes with `N^(2^m)` intervals, each time linearizing about
//! the interpolant of the previous level.

use std::time::Instant;

use crate::mesh::{Mesh, MeshSpec};
use crate::quasi::{self, NewtonConfig, NonlinearScheme, SolveOutcome};
use crate::{Error, Real, Result};

/// Largest fine mesh a plan may request.
pub const MAX_INTERVALS: usize = 1 << 20;

/// Piecewise linear interpolant through `(nodes[i], values[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear<T> {
    nodes: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> PiecewiseLinear<T> {
    pub fn new(nodes: Vec<T>, values: Vec<T>) -> Result<Self> {
        if nodes.len() != values.len() || nodes.len() < 2 {
            return Err(Error::Validation(format!(
                "interpolant needs matching node/value arrays of length >= 2 (got {} and {})",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Validation(
                "interpolation nodes must increase strictly".into(),
            ));
        }
        Ok(PiecewiseLinear { nodes, values })
    }

    pub fn from_mesh(mesh: &Mesh<T>, values: &[T]) -> Result<Self> {
        Self::new(mesh.nodes().to_vec(), values.to_vec())
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    fn check_domain(&self, x: T) -> Result<()> {
        let last = self.nodes.len() - 1;
        if x >= self.nodes[0] && x <= self.nodes[last] {
            Ok(())
        } else {
            Err(Error::OutOfDomain { x: x.as_f64() })
        }
    }

    /// Value on the interval `[nodes[k], nodes[k + 1]]`, clamped to the
    /// range of the two end values.
    #[inline]
    fn on_interval(&self, k: usize, x: T) -> T {
        let (x0, x1) = (self.nodes[k], self.nodes[k + 1]);
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let t = (x - x0) / (x1 - x0);
        let v = (T::one() - t) * y0 + t * y1;
        v.max(y0.min(y1)).min(y0.max(y1))
    }

    /// Index `k` of the interval containing `x` (binary search).
    fn locate(&self, x: T) -> usize {
        let last = self.nodes.len() - 1;
        let k = self.nodes.partition_point(|&node| node <= x);
        k.saturating_sub(1).min(last - 1)
    }

    pub fn eval(&self, x: T) -> Result<T> {
        self.check_domain(x)?;
        Ok(self.on_interval(self.locate(x), x))
    }

    /// Evaluates at every query. Sorted queries are handled by a single merge
    /// walk over the nodes, unsorted ones by binary search.
    pub fn eval_many(&self, queries: &[T]) -> Result<Vec<T>> {
        if let Some(&x) = queries.iter().find(|&&x| self.check_domain(x).is_err()) {
            return Err(Error::OutOfDomain { x: x.as_f64() });
        }
        let sorted = queries.windows(2).all(|w| w[0] <= w[1]);
        if !sorted {
            return Ok(queries
                .iter()
                .map(|&x| self.on_interval(self.locate(x), x))
                .collect());
        }
        let last = self.nodes.len() - 1;
        let mut k = 0;
        Ok(queries
            .iter()
            .map(|&x| {
                while k + 1 < last && self.nodes[k + 1] <= x {
                    k += 1;
                }
                self.on_interval(k, x)
            })
            .collect())
    }
}

/// Evaluates the piecewise linear interpolant of `coarse_values` (given at all
/// nodes of `coarse_mesh`) at `queries`.
pub fn interpolate<T: Real>(
    coarse_mesh: &Mesh<T>,
    coarse_values: &[T],
    queries: &[T],
) -> Result<Vec<T>> {
    PiecewiseLinear::from_mesh(coarse_mesh, coarse_values)?.eval_many(queries)
}

/// Mesh sizes for a two-grid run. Both grids use the same family and
/// parameters; each computes its own transition point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoGridPlan<T> {
    /// Family and parameters; `n` is ignored.
    pub mesh: MeshSpec<T>,
    pub coarse: usize,
    /// Fine interval count of the first level.
    pub fine: usize,
    /// Number of fine levels; level `m >= 2` uses `coarse^(2^m)` intervals.
    pub levels: usize,
}

impl<T: Real> TwoGridPlan<T> {
    /// `n = N^2`, one fine level.
    pub fn squared(mesh: MeshSpec<T>, coarse: usize) -> Self {
        TwoGridPlan {
            mesh,
            coarse,
            fine: coarse.saturating_mul(coarse),
            levels: 1,
        }
    }

    /// `n = round(N^r)`, one fine level.
    pub fn with_exponent(mesh: MeshSpec<T>, coarse: usize, r: f64) -> Self {
        let fine = (coarse as f64).powf(r).round() as usize;
        TwoGridPlan {
            mesh,
            coarse,
            fine,
            levels: 1,
        }
    }

    /// Cascade with `levels` fine levels of `N^(2^m)` intervals.
    pub fn cascade(mesh: MeshSpec<T>, coarse: usize, levels: usize) -> Self {
        TwoGridPlan {
            levels,
            ..Self::squared(mesh, coarse)
        }
    }

    /// Interval counts of the fine levels, in order.
    pub fn fine_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.fine];
        for m in 2..=self.levels {
            let exponent = 1u32.checked_shl(m as u32).unwrap_or(u32::MAX);
            sizes.push(self.coarse.checked_pow(exponent).unwrap_or(usize::MAX));
        }
        sizes
    }

    pub fn validate(&self) -> Result<()> {
        if self.coarse < 2 {
            return Err(Error::Validation(format!(
                "coarse mesh needs >= 2 intervals, got {}",
                self.coarse
            )));
        }
        if self.levels == 0 {
            return Err(Error::Validation(
                "a two-grid plan needs at least one fine level".into(),
            ));
        }
        let mut prev = self.coarse;
        for n in self.fine_sizes() {
            if n <= prev {
                return Err(Error::Validation(format!(
                    "fine mesh sizes must increase: {n} does not exceed {prev}"
                )));
            }
            if n > MAX_INTERVALS {
                return Err(Error::MemoryBudget {
                    n,
                    limit: MAX_INTERVALS,
                });
            }
            prev = n;
        }
        Ok(())
    }
}

/// One fine level of a two-grid run.
#[derive(Debug, Clone)]
pub struct FineLevel<T> {
    pub mesh: Mesh<T>,
    pub outcome: SolveOutcome<T>,
    /// Seconds for mesh construction, interpolation and the linear solve.
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct TwoGridResult<T> {
    pub coarse_mesh: Mesh<T>,
    pub coarse: SolveOutcome<T>,
    /// Seconds for building the coarse mesh and solving on it.
    pub coarse_seconds: f64,
    pub levels: Vec<FineLevel<T>>,
}

impl<T: Real> TwoGridResult<T> {
    /// Finest mesh and solution.
    pub fn finest(&self) -> (&Mesh<T>, &[T]) {
        match self.levels.last() {
            Some(level) => (&level.mesh, &level.outcome.y),
            None => (&self.coarse_mesh, &self.coarse.y),
        }
    }

    /// Interpolant of the finest solution over `[0, 1]`.
    pub fn interpolant(&self) -> Result<PiecewiseLinear<T>> {
        let (mesh, y) = self.finest();
        PiecewiseLinear::from_mesh(mesh, y)
    }

    /// Total wall time of all steps.
    pub fn total_seconds(&self) -> f64 {
        self.coarse_seconds + self.levels.iter().map(|l| l.seconds).sum::<f64>()
    }

    /// Nodal max errors of every step (coarse first) against `exact`.
    pub fn step_errors(&self, exact: impl Fn(T) -> T) -> Vec<T> {
        let nodal = |mesh: &Mesh<T>, y: &[T]| {
            mesh.nodes()
                .iter()
                .zip(y)
                .fold(T::zero(), |acc, (&x, &v)| acc.max((exact(x) - v).abs()))
        };
        let mut errors = vec![nodal(&self.coarse_mesh, &self.coarse.y)];
        errors.extend(self.levels.iter().map(|l| nodal(&l.mesh, &l.outcome.y)));
        errors
    }
}

/// One linear fine-grid step about the interpolant of `(prev_mesh, prev_y)`.
fn fine_step<T: Real, P: NonlinearScheme<T> + ?Sized>(
    problem: &P,
    spec: &MeshSpec<T>,
    prev_mesh: &Mesh<T>,
    prev_y: &[T],
    cfg: &NewtonConfig<T>,
) -> Result<FineLevel<T>> {
    let start = Instant::now();
    let mesh = Mesh::build(spec)?;
    let w = interpolate(prev_mesh, prev_y, mesh.nodes())?;
    let outcome = quasi::newton_step(&mesh, problem, &w, cfg.linearization)?;
    Ok(FineLevel {
        mesh,
        outcome,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn coarse_step<T: Real, P: NonlinearScheme<T> + ?Sized>(
    problem: &P,
    plan: &TwoGridPlan<T>,
    cfg: &NewtonConfig<T>,
) -> Result<(Mesh<T>, SolveOutcome<T>, f64)> {
    let start = Instant::now();
    let spec = plan.mesh.with_eps(problem.eps()).with_n(plan.coarse);
    let mesh = Mesh::build(&spec)?;
    let outcome = quasi::solve(&mesh, problem, cfg)?;
    Ok((mesh, outcome, start.elapsed().as_secs_f64()))
}

/// Runs every level of `plan`: a nonlinear coarse solve, then one
/// linearized solve per fine level.
pub fn run<T: Real, P: NonlinearScheme<T> + ?Sized>(
    problem: &P,
    plan: &TwoGridPlan<T>,
    cfg: &NewtonConfig<T>,
) -> Result<TwoGridResult<T>> {
    plan.validate()?;
    let (coarse_mesh, coarse, coarse_seconds) = coarse_step(problem, plan, cfg)?;
    let mut levels: Vec<FineLevel<T>> = Vec::with_capacity(plan.levels);
    for n in plan.fine_sizes() {
        let spec = plan.mesh.with_eps(problem.eps()).with_n(n);
        let level = {
            let (prev_mesh, prev_y) = match levels.last() {
                Some(l) => (&l.mesh, l.outcome.y.as_slice()),
                None => (&coarse_mesh, coarse.y.as_slice()),
            };
            fine_step(problem, &spec, prev_mesh, prev_y, cfg)?
        };
        levels.push(level);
    }
    Ok(TwoGridResult {
        coarse_mesh,
        coarse,
        coarse_seconds,
        levels,
    })
}

/// Algorithm 1: coarse nonlinear solve and a single fine linear step.
pub fn algorithm1<T: Real, P: NonlinearScheme<T> + ?Sized>(
    problem: &P,
    plan: &TwoGridPlan<T>,
    cfg: &NewtonConfig<T>,
) -> Result<TwoGridResult<T>> {
    run(problem, &TwoGridPlan { levels: 1, ..*plan }, cfg)
}

/// Algorithm 2: cascade of `plan.levels` fine steps with `N^(2^m)` intervals.
pub fn algorithm2<T: Real, P: NonlinearScheme<T> + ?Sized>(
    problem: &P,
    plan: &TwoGridPlan<T>,
    cfg: &NewtonConfig<T>,
) -> Result<TwoGridResult<T>> {
    let plan = TwoGridPlan {
        fine: plan.coarse.saturating_mul(plan.coarse),
        ..*plan
    };
    run(problem, &plan, cfg)
}

/// Exponent `r` with `N^r / r = N^2 / ln N`, and `n = round(N^r)`.
///
/// The search is confined to `(1, 2]`; for `N < e^2` the equation has no
/// root there and `r = 2` is returned.
pub fn choose_r(coarse: usize) -> Result<(f64, usize)> {
    if coarse < 4 {
        return Err(Error::Validation(format!(
            "choose_r needs N >= 4, got {coarse}"
        )));
    }
    let nf = coarse as f64;
    let target = nf * nf / nf.ln();
    // N^r / r is increasing for r > 1 / ln N, which covers (1, 2] when N >= 4.
    let g = |r: f64| nf.powf(r) / r - target;
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    if g(hi) <= 0.0 {
        return Ok((2.0, coarse * coarse));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    Ok((r, nf.powf(r).round() as usize))
}
