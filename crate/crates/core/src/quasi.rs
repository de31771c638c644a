//! Discrete quasilinearization (Newton's method) for the nonlinear schemes.
//!
//! Each sweep solves the linear three-point problem
//!
//! ```text
//!     -eps^2 y^{m+1}_{xbar xhat} + f_u(x, y^m) y^{m+1} = f_u(x, y^m) y^m - f(x, y^m)
//! ```
//!
//! which is carried out in correction form `J(y^m) (y^{m+1} - y^m) = -F(y^m)`;
//! both forms have the same exact solution, the correction form keeps the
//! right-hand side at the size of the current residual.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::linsolve::{fill_operator, thomas_solve, TridiagonalSystem};
use crate::mesh::Mesh;
use crate::problem::{AnyProblem, FluxForm, Fn1, QuasilinearDiffusionProblem, SemilinearProblem};
use crate::{Error, Real, Result};

/// How the diffusion factor of a quasilinear problem enters the linear step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linearization {
    /// Full Newton, including the derivative of the diffusion factor.
    #[default]
    Newton,
    /// Diffusion factor frozen at the previous iterate.
    Picard,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess<T> {
    Zero,
    /// Nodewise root of the reduced equation `f(x, u) = 0`.
    Reduced,
    /// Values at all nodes `x_0 ..= x_n`; boundary entries are overwritten.
    Given(Vec<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonConfig<T> {
    /// Stop when the max-norm of the update drops to this value.
    pub tol: T,
    pub max_iter: usize,
    pub initial: InitialGuess<T>,
    pub linearization: Linearization,
}

impl<T: Real> Default for NewtonConfig<T> {
    fn default() -> Self {
        NewtonConfig {
            tol: T::lit(1e-13),
            max_iter: 50,
            initial: InitialGuess::Reduced,
            linearization: Linearization::Newton,
        }
    }
}

impl<T: Real> NewtonConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero()) {
            return Err(Error::Validation(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Validation("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome<T> {
    /// Values at `x_0 ..= x_n`.
    pub y: Vec<T>,
    pub iterations: usize,
    /// Max-norm of the last correction.
    pub final_update: T,
    pub converged: bool,
    /// Seconds.
    pub wall_time: f64,
    /// Max-norm of every correction, in order.
    pub updates: Vec<T>,
    /// Max-norm of the discrete residual at the returned solution.
    pub residual: T,
}

/// A nonlinear three-point scheme `F(y) = 0` on the interior nodes.
pub trait NonlinearScheme<T: Real>: Sync {
    fn eps(&self) -> T;

    /// Dirichlet values `(y_0, y_n)`.
    fn boundary(&self) -> (T, T);

    fn exact(&self) -> Option<&Fn1<T>>;

    /// `F_1 .. F_{n-1}` at the full vector `y_0 ..= y_n`.
    fn residual(&self, mesh: &Mesh<T>, y: &[T]) -> Result<Vec<T>>;

    /// Tridiagonal linearization at `y` with right-hand side `-F(y)`.
    fn linearize(
        &self,
        mesh: &Mesh<T>,
        y: &[T],
        mode: Linearization,
    ) -> Result<TridiagonalSystem<T>>;

    /// Nodewise root of the zero-order (reduced) equation.
    fn reduced_guess(&self, mesh: &Mesh<T>) -> Result<Vec<T>>;
}

/// `-eps^2 y_{xbar xhat}` at the interior nodes.
fn diffusion_term<T: Real>(mesh: &Mesh<T>, eps: T, y: &[T]) -> Vec<T> {
    let e2 = eps * eps;
    (1..mesh.n())
        .map(|i| {
            let right = (y[i + 1] - y[i]) / mesh.h(i + 1);
            let left = (y[i] - y[i - 1]) / mesh.h(i);
            -e2 * (right - left) / mesh.hbar(i)
        })
        .collect()
}

/// Scalar Newton for `g(u) = 0` with `g' > 0`, started at zero. Steps that do
/// not reduce `|g|` (or leave its domain) are halved.
fn scalar_root<T: Real>(g: impl Fn(T) -> T, dg: impl Fn(T) -> T) -> Result<T> {
    let mut u = T::zero();
    let mut value = g(u);
    let mut step = T::infinity();
    for it in 0..100 {
        let slope = dg(u);
        if !(slope > T::zero()) {
            return Err(Error::NonpositiveJacobian {
                index: it,
                value: slope.as_f64(),
            });
        }
        step = value / slope;
        let mut next = u - step;
        let mut next_value = g(next);
        for _ in 0..60 {
            if next_value.is_finite() && next_value.abs() <= value.abs() {
                break;
            }
            step = step * T::lit(0.5);
            next = u - step;
            next_value = g(next);
        }
        u = next;
        value = next_value;
        if step.abs() <= T::lit(64.0) * T::epsilon() * (T::one() + u.abs()) || value == T::zero() {
            return Ok(u);
        }
    }
    Err(Error::NoConvergence {
        iterations: 100,
        last_update: step.abs().as_f64(),
    })
}

impl<T: Real> NonlinearScheme<T> for SemilinearProblem<T> {
    fn eps(&self) -> T {
        self.eps
    }

    fn boundary(&self) -> (T, T) {
        (self.bc_left, self.bc_right)
    }

    fn exact(&self) -> Option<&Fn1<T>> {
        self.exact.as_ref()
    }

    fn residual(&self, mesh: &Mesh<T>, y: &[T]) -> Result<Vec<T>> {
        check_len(mesh, y)?;
        let x = mesh.nodes();
        let mut r = diffusion_term(mesh, self.eps, y);
        for (k, v) in r.iter_mut().enumerate() {
            *v = *v + (self.f)(x[k + 1], y[k + 1]);
        }
        Ok(r)
    }

    fn linearize(
        &self,
        mesh: &Mesh<T>,
        y: &[T],
        _mode: Linearization,
    ) -> Result<TridiagonalSystem<T>> {
        let residual = self.residual(mesh, y)?;
        let x = mesh.nodes();
        let mut sys = fill_operator(mesh, self.eps);
        for k in 0..sys.len() {
            let fu = (self.f_u)(x[k + 1], y[k + 1]);
            if !(fu > T::zero()) {
                return Err(Error::NonpositiveJacobian {
                    index: k + 1,
                    value: fu.as_f64(),
                });
            }
            sys.diag[k] = sys.diag[k] + fu;
            sys.rhs[k] = -residual[k];
        }
        Ok(sys)
    }

    fn reduced_guess(&self, mesh: &Mesh<T>) -> Result<Vec<T>> {
        mesh.nodes()
            .iter()
            .map(|&x| scalar_root(|u| (self.f)(x, u), |u| (self.f_u)(x, u)))
            .collect()
    }
}

/// One interval's flux `phi_{j+1/2}` and its partial derivatives with respect
/// to the left and right node values.
struct IntervalFlux<T> {
    value: T,
    d_left: T,
    d_right: T,
}

impl<T: Real> QuasilinearDiffusionProblem<T> {
    fn positive_diffusion(&self, u: T, index: usize) -> Result<T> {
        let d = (self.d)(u);
        if !(d > T::zero() && d.is_finite()) {
            return Err(Error::SingularDiffusion { index });
        }
        Ok(d)
    }

    /// Flux over `[x_j, x_{j+1}]` with values `a = y_j`, `b = y_{j+1}`.
    fn interval_flux(
        &self,
        a: T,
        b: T,
        h: T,
        j: usize,
        mode: Linearization,
    ) -> Result<IntervalFlux<T>> {
        let half = T::lit(0.5);
        let jump = b - a;
        match (self.flux, self.kirchhoff.as_ref()) {
            (FluxForm::Kirchhoff, Some(k)) => {
                let (da, db) = (
                    self.positive_diffusion(a, j)?,
                    self.positive_diffusion(b, j + 1)?,
                );
                let value = ((k)(b) - (k)(a)) / h;
                if !value.is_finite() {
                    return Err(Error::SingularDiffusion { index: j });
                }
                let (dl, dr) = match mode {
                    Linearization::Newton => (-da / h, db / h),
                    Linearization::Picard => {
                        let s = if jump.abs() > T::tiny() {
                            value * h / jump
                        } else {
                            half * (da + db)
                        };
                        (-s / h, s / h)
                    }
                };
                Ok(IntervalFlux {
                    value,
                    d_left: dl,
                    d_right: dr,
                })
            }
            _ => {
                let mid = half * (a + b);
                let d = self.positive_diffusion(mid, j)?;
                let value = d * jump / h;
                let chain = match mode {
                    Linearization::Newton => half * (self.d_u)(mid) * jump / h,
                    Linearization::Picard => T::zero(),
                };
                Ok(IntervalFlux {
                    value,
                    d_left: -d / h + chain,
                    d_right: d / h + chain,
                })
            }
        }
    }

    fn fluxes(&self, mesh: &Mesh<T>, y: &[T], mode: Linearization) -> Result<Vec<IntervalFlux<T>>> {
        (0..mesh.n())
            .map(|j| self.interval_flux(y[j], y[j + 1], mesh.h(j + 1), j, mode))
            .collect()
    }
}

impl<T: Real> NonlinearScheme<T> for QuasilinearDiffusionProblem<T> {
    fn eps(&self) -> T {
        self.eps
    }

    fn boundary(&self) -> (T, T) {
        (self.bc_left, self.bc_right)
    }

    fn exact(&self) -> Option<&Fn1<T>> {
        self.exact.as_ref()
    }

    /// `F_i = -eps^2 (phi_{i+1/2} - phi_{i-1/2}) / hbar_i + r(x_i, y_i)`; the
    /// flux is `d((y_i + y_{i+1}) / 2) (y_{i+1} - y_i) / h_{i+1}` or, in
    /// Kirchhoff form, `(K(y_{i+1}) - K(y_i)) / h_{i+1}` with `K' = d`.
    fn residual(&self, mesh: &Mesh<T>, y: &[T]) -> Result<Vec<T>> {
        check_len(mesh, y)?;
        let x = mesh.nodes();
        let e2 = self.eps * self.eps;
        let flux = self.fluxes(mesh, y, Linearization::Picard)?;
        Ok((1..mesh.n())
            .map(|i| {
                -e2 * (flux[i].value - flux[i - 1].value) / mesh.hbar(i) + (self.r)(x[i], y[i])
            })
            .collect())
    }

    fn linearize(
        &self,
        mesh: &Mesh<T>,
        y: &[T],
        mode: Linearization,
    ) -> Result<TridiagonalSystem<T>> {
        check_len(mesh, y)?;
        let x = mesh.nodes();
        let e2 = self.eps * self.eps;
        let n = mesh.n();
        let m = n - 1;
        let flux = self.fluxes(mesh, y, mode)?;
        let mut sys = TridiagonalSystem::zeros(m);
        for i in 1..n {
            let k = i - 1;
            let scale = e2 / mesh.hbar(i);
            let (left, right) = (&flux[i - 1], &flux[i]);
            if k > 0 {
                sys.sub[k] = scale * left.d_left;
            }
            if i < m {
                sys.sup[k] = -scale * right.d_right;
            }
            sys.diag[k] = -scale * (right.d_left - left.d_right) + (self.r_u)(x[i], y[i]);
            sys.rhs[k] = -(-e2 * (right.value - left.value) / mesh.hbar(i) + (self.r)(x[i], y[i]));
        }
        Ok(sys)
    }

    fn reduced_guess(&self, mesh: &Mesh<T>) -> Result<Vec<T>> {
        mesh.nodes()
            .iter()
            .map(|&x| scalar_root(|u| (self.r)(x, u), |u| (self.r_u)(x, u)))
            .collect()
    }
}

impl<T: Real> NonlinearScheme<T> for AnyProblem<T> {
    fn eps(&self) -> T {
        AnyProblem::eps(self)
    }

    fn boundary(&self) -> (T, T) {
        match self {
            AnyProblem::Semilinear(p) => p.boundary(),
            AnyProblem::Diffusion(p) => p.boundary(),
        }
    }

    fn exact(&self) -> Option<&Fn1<T>> {
        AnyProblem::exact(self)
    }

    fn residual(&self, mesh: &Mesh<T>, y: &[T]) -> Result<Vec<T>> {
        match self {
            AnyProblem::Semilinear(p) => p.residual(mesh, y),
            AnyProblem::Diffusion(p) => p.residual(mesh, y),
        }
    }

    fn linearize(
        &self,
        mesh: &Mesh<T>,
        y: &[T],
        mode: Linearization,
    ) -> Result<TridiagonalSystem<T>> {
        match self {
            AnyProblem::Semilinear(p) => p.linearize(mesh, y, mode),
            AnyProblem::Diffusion(p) => p.linearize(mesh, y, mode),
        }
    }

    fn reduced_guess(&self, mesh: &Mesh<T>) -> Result<Vec<T>> {
        match self {
            AnyProblem::Semilinear(p) => p.reduced_guess(mesh),
            AnyProblem::Diffusion(p) => p.reduced_guess(mesh),
        }
    }
}

fn check_len<T: Real>(mesh: &Mesh<T>, y: &[T]) -> Result<()> {
    if y.len() != mesh.n() + 1 {
        return Err(Error::Validation(format!(
            "mesh function has {} values, mesh has {} nodes",
            y.len(),
            mesh.n() + 1
        )));
    }
    Ok(())
}

fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// Newton iteration for any scheme. Fails with [`Error::NoConvergence`] when
/// `max_iter` sweeps do not bring the update below `tol`.
pub fn solve<T: Real, P: NonlinearScheme<T> + ?Sized>(
    mesh: &Mesh<T>,
    problem: &P,
    cfg: &NewtonConfig<T>,
) -> Result<SolveOutcome<T>> {
    cfg.validate()?;
    let start = Instant::now();
    let (left, right) = problem.boundary();
    let mut y = match &cfg.initial {
        InitialGuess::Zero => vec![T::zero(); mesh.n() + 1],
        InitialGuess::Reduced => problem.reduced_guess(mesh)?,
        InitialGuess::Given(v) => {
            check_len(mesh, v)?;
            v.clone()
        }
    };
    y[0] = left;
    y[mesh.n()] = right;

    let mut updates = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.max_iter {
        let sys = problem.linearize(mesh, &y, cfg.linearization)?;
        let delta = thomas_solve(&sys)?;
        for (v, d) in y[1..].iter_mut().zip(&delta) {
            *v = *v + *d;
        }
        let update = max_abs(&delta);
        updates.push(update);
        if !update.is_finite() {
            break;
        }
        if update <= cfg.tol {
            converged = true;
            break;
        }
    }
    let final_update = updates.last().copied().unwrap_or(T::zero());
    if !converged {
        return Err(Error::NoConvergence {
            iterations: updates.len(),
            last_update: final_update.as_f64(),
        });
    }
    let residual = max_abs(&problem.residual(mesh, &y)?);
    Ok(SolveOutcome {
        y,
        iterations: updates.len(),
        final_update,
        converged,
        wall_time: start.elapsed().as_secs_f64(),
        updates,
        residual,
    })
}

/// One Newton step about `w` (values at all nodes). The outcome reports a
/// single iteration whose update is the size of the correction.
pub fn newton_step<T: Real, P: NonlinearScheme<T> + ?Sized>(
    mesh: &Mesh<T>,
    problem: &P,
    w: &[T],
    mode: Linearization,
) -> Result<SolveOutcome<T>> {
    let start = Instant::now();
    check_len(mesh, w)?;
    let (left, right) = problem.boundary();
    let mut y = w.to_vec();
    y[0] = left;
    y[mesh.n()] = right;
    let sys = problem.linearize(mesh, &y, mode)?;
    let delta = thomas_solve(&sys)?;
    for (v, d) in y[1..].iter_mut().zip(&delta) {
        *v = *v + *d;
    }
    let update = max_abs(&delta);
    let residual = max_abs(&problem.residual(mesh, &y)?);
    Ok(SolveOutcome {
        y,
        iterations: 1,
        final_update: update,
        converged: true,
        wall_time: start.elapsed().as_secs_f64(),
        updates: vec![update],
        residual,
    })
}

/// Solves the semilinear scheme `-eps^2 y_{xbar xhat} + f(x, y) = 0`.
pub fn solve_semilinear<T: Real>(
    mesh: &Mesh<T>,
    p: &SemilinearProblem<T>,
    cfg: &NewtonConfig<T>,
) -> Result<SolveOutcome<T>> {
    solve(mesh, p, cfg)
}

/// Solves the conservative scheme of a quasilinear diffusion problem.
pub fn solve_quasilinear_diffusion<T: Real>(
    mesh: &Mesh<T>,
    p: &QuasilinearDiffusionProblem<T>,
    cfg: &NewtonConfig<T>,
) -> Result<SolveOutcome<T>> {
    solve(mesh, p, cfg)
}

/// Largest gap between the analytic Jacobian and central differences of
/// `F`, each entry measured relative to the largest analytic entry of its row.
pub fn analytic_vs_fd_jacobian<T: Real, P: NonlinearScheme<T> + ?Sized>(
    mesh: &Mesh<T>,
    problem: &P,
    y: &[T],
) -> Result<T> {
    let jac = problem.linearize(mesh, y, Linearization::Newton)?;
    let m = jac.len();
    let mut gap = T::zero();
    let mut probe = y.to_vec();
    let row_scale: Vec<T> = (0..m)
        .map(|k| {
            jac.sub[k]
                .abs()
                .max(jac.diag[k].abs())
                .max(jac.sup[k].abs())
                .max(T::tiny())
        })
        .collect();
    for j in 1..mesh.n() {
        let step = T::lit(1e-6) * (T::one() + y[j].abs());
        probe[j] = y[j] + step;
        let plus = problem.residual(mesh, &probe)?;
        probe[j] = y[j] - step;
        let minus = problem.residual(mesh, &probe)?;
        probe[j] = y[j];
        let col = j - 1;
        for row in col.saturating_sub(1)..(col + 2).min(m) {
            let fd = (plus[row] - minus[row]) / (step + step);
            let analytic = match row as isize - col as isize {
                -1 => jac.sup[row],
                0 => jac.diag[row],
                _ => jac.sub[row],
            };
            gap = gap.max((analytic - fd).abs() / row_scale[row]);
        }
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::linsolve::solve_linear;
    use crate::mesh::MeshSpec;
    use crate::problem::{example1, example2, log_transform};

    #[test]
    fn linear_problem_converges_in_one_sweep() {
        let mesh = Mesh::build(&MeshSpec::shishkin(1e-2, 32)).unwrap();
        let p = SemilinearProblem {
            eps: 1e-2,
            f: Arc::new(|_, u| u),
            f_u: Arc::new(|_, _| 1.0),
            bc_left: 0.0,
            bc_right: 0.0,
            exact: None,
            c0_squared: 1.0,
        };
        let out = solve_semilinear(&mesh, &p, &NewtonConfig::default()).unwrap();
        assert!(out.y.iter().all(|&v| v == 0.0));
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn example1_converges_quickly_with_small_residual() {
        let eps = 1e-2;
        let mesh = Mesh::build(&MeshSpec::bakhvalov(eps, 64, 4.0, 0.4)).unwrap();
        let p = example1(eps).unwrap();
        let out = solve_semilinear(&mesh, &p, &NewtonConfig::default()).unwrap();
        assert!(out.converged && out.iterations <= 8, "{}", out.iterations);
        assert!(out.residual <= 1e-9);
        assert_eq!(out.y[0], 0.0);
        assert_eq!(out.y[64], 0.0);
    }

    #[test]
    fn zero_and_reduced_starts_reach_same_solution() {
        let eps = 0.1;
        let mesh = Mesh::build(&MeshSpec::<f64>::uniform(32)).unwrap();
        let p = example1(eps).unwrap();
        let a = solve_semilinear(&mesh, &p, &NewtonConfig::default()).unwrap();
        let cfg = NewtonConfig {
            initial: InitialGuess::Zero,
            ..Default::default()
        };
        let b = solve_semilinear(&mesh, &p, &cfg).unwrap();
        let diff =
            a.y.iter()
                .zip(&b.y)
                .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        assert!(diff < 1e-12);
    }

    #[test]
    fn iteration_cap_reports_no_convergence() {
        let mesh = Mesh::build(&MeshSpec::<f64>::uniform(16)).unwrap();
        let p = example1(0.1).unwrap();
        let cfg = NewtonConfig {
            max_iter: 1,
            ..Default::default()
        };
        assert!(matches!(
            solve_semilinear(&mesh, &p, &cfg),
            Err(Error::NoConvergence { iterations: 1, .. })
        ));
    }

    #[test]
    fn nonpositive_jacobian_detected() {
        let mesh = Mesh::build(&MeshSpec::<f64>::uniform(8)).unwrap();
        let p = SemilinearProblem {
            eps: 0.1,
            f: Arc::new(|_, u| -u),
            f_u: Arc::new(|_, _| -1.0),
            bc_left: 0.0,
            bc_right: 0.0,
            exact: None,
            c0_squared: 1.0,
        };
        assert!(matches!(
            solve_semilinear(&mesh, &p, &NewtonConfig::default()),
            Err(Error::NonpositiveJacobian { .. })
        ));
    }

    #[test]
    fn constant_diffusion_matches_linear_solver() {
        let eps = 0.05;
        let mesh = Mesh::build(&MeshSpec::vulanovic(eps, 32, 2.0, 0.4)).unwrap();
        let g = |x: f64| (3.0 * x).sin() + 2.0;
        let p = QuasilinearDiffusionProblem {
            eps,
            d: Arc::new(|_| 1.0),
            d_u: Arc::new(|_| 0.0),
            kirchhoff: Some(Arc::new(|u| u)),
            flux: FluxForm::Midpoint,
            r: Arc::new(move |x, u| u - g(x)),
            r_u: Arc::new(|_, _| 1.0),
            bc_left: 0.5,
            bc_right: 1.5,
            exact: None,
        };
        let semi = SemilinearProblem {
            eps,
            f: Arc::new(move |x, u| u - g(x)),
            f_u: Arc::new(|_, _| 1.0),
            bc_left: 0.5,
            bc_right: 1.5,
            exact: None,
            c0_squared: 1.0,
        };
        let y: Vec<f64> = mesh.nodes().iter().map(|x| 0.3 + x * x).collect();
        let a = p.linearize(&mesh, &y, Linearization::Newton).unwrap();
        let b = semi.linearize(&mesh, &y, Linearization::Newton).unwrap();
        for k in 0..a.len() {
            for (u, v) in [
                (a.sub[k], b.sub[k]),
                (a.diag[k], b.diag[k]),
                (a.sup[k], b.sup[k]),
            ] {
                assert!((u - v).abs() <= 1e-12 * v.abs().max(1.0));
            }
        }
        let out = solve_quasilinear_diffusion(&mesh, &p, &NewtonConfig::default()).unwrap();
        let direct = solve_linear(&mesh, eps, |_| 1.0, g, 0.5, 1.5).unwrap();
        for (u, v) in out.y.iter().zip(&direct) {
            assert!((u - v).abs() < 1e-12);
        }
        assert!(analytic_vs_fd_jacobian(&mesh, &p, &y).unwrap() <= 1e-8);
    }

    #[test]
    fn picard_mode_converges_to_newton_solution() {
        let eps = 0.1f64;
        let mesh = Mesh::build(&MeshSpec::bakhvalov(eps, 32, 2.0, 0.4)).unwrap();
        let p = example2(eps).unwrap();
        let newton = solve_quasilinear_diffusion(&mesh, &p, &NewtonConfig::default()).unwrap();
        let cfg = NewtonConfig {
            linearization: Linearization::Picard,
            max_iter: 200,
            ..Default::default()
        };
        let picard = solve_quasilinear_diffusion(&mesh, &p, &cfg).unwrap();
        assert!(picard.iterations > newton.iterations);
        let diff = newton
            .y
            .iter()
            .zip(&picard.y)
            .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        assert!(diff < 1e-11);
    }

    #[test]
    fn kirchhoff_flux_matches_log_transformed_scheme() {
        // For d = 1/(1+u) the Kirchhoff flux is exactly the three-point scheme
        // in v = ln(1+u).
        let eps = 1e-2f64;
        let mesh = Mesh::build(&MeshSpec::vulanovic(eps, 64, 2.0, 0.4)).unwrap();
        let p = example2(eps).unwrap();
        assert_eq!(p.flux, FluxForm::Kirchhoff);
        let y = solve_quasilinear_diffusion(&mesh, &p, &NewtonConfig::default()).unwrap();
        let v =
            solve_semilinear(&mesh, &log_transform(&p).unwrap(), &NewtonConfig::default()).unwrap();
        for (u, w) in y.y.iter().zip(&v.y) {
            assert!((u - w.exp_m1()).abs() < 1e-12);
        }
        let probe: Vec<f64> = mesh.nodes().iter().map(|x| 0.2 + (5.0 * x).sin()).collect();
        assert!(analytic_vs_fd_jacobian(&mesh, &p, &probe).unwrap() <= 1e-6);
        let cfg = NewtonConfig {
            linearization: Linearization::Picard,
            max_iter: 300,
            ..Default::default()
        };
        let picard = solve_quasilinear_diffusion(&mesh, &p, &cfg).unwrap();
        let diff = picard
            .y
            .iter()
            .zip(&y.y)
            .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        assert!(diff < 1e-11);
    }

    #[test]
    fn kirchhoff_flux_requires_antiderivative() {
        let mut p = example2(0.1f64).unwrap();
        p.kirchhoff = None;
        assert!(matches!(
            p.with_flux(FluxForm::Kirchhoff),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn singular_diffusion_detected() {
        let mesh = Mesh::build(&MeshSpec::<f64>::uniform(8)).unwrap();
        let p = example2(0.1).unwrap();
        let mut y = vec![0.0; 9];
        y[3] = -3.0;
        assert!(matches!(
            p.residual(&mesh, &y),
            Err(Error::SingularDiffusion { .. })
        ));
    }
}
