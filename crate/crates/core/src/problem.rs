//! Continuous boundary value problems and the two test examples.
//!
//! Source terms of the examples are manufactured from their closed-form
//! solutions, so every derivative below is analytic.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// `x -> value`.
pub type Fn1<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
/// `(x, u) -> value`.
pub type Fn2<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// `-eps^2 u'' + f(x, u) = 0`, `u(0) = bc_left`, `u(1) = bc_right`.
#[derive(Clone)]
pub struct SemilinearProblem<T> {
    pub eps: T,
    pub f: Fn2<T>,
    pub f_u: Fn2<T>,
    pub bc_left: T,
    pub bc_right: T,
    pub exact: Option<Fn1<T>>,
    /// Known lower bound of `f_u`, only used by [`SemilinearProblem::check_stability`].
    pub c0_squared: T,
}

impl<T: Real> SemilinearProblem<T> {
    /// Samples `f_u` on a lattice over `[0, 1] x [u_min, u_max]` and returns the
    /// smallest value found, or an error if it falls below `c0_squared`.
    pub fn check_stability(&self, u_min: T, u_max: T, samples: usize) -> Result<T> {
        let samples = samples.max(2);
        let denom = T::from_usize_lossy(samples - 1);
        let mut min = T::infinity();
        for i in 0..samples {
            let x = T::from_usize_lossy(i) / denom;
            for j in 0..samples {
                let u = u_min + (u_max - u_min) * T::from_usize_lossy(j) / denom;
                let v = (self.f_u)(x, u);
                if !(v >= self.c0_squared) {
                    return Err(Error::NonpositiveJacobian {
                        index: i,
                        value: v.as_f64(),
                    });
                }
                min = min.min(v);
            }
        }
        Ok(min)
    }

    /// Residual `-eps^2 u'' + f(x, u)` of a smooth function with known
    /// second derivative.
    pub fn ode_residual(&self, x: T, u: T, u_xx: T) -> T {
        -self.eps * self.eps * u_xx + (self.f)(x, u)
    }
}

impl<T: Real> fmt::Debug for SemilinearProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemilinearProblem")
            .field("eps", &self.eps)
            .field("bc_left", &self.bc_left)
            .field("bc_right", &self.bc_right)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

/// Discretization of the flux `d(u) u'` between two nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FluxForm {
    /// `d((y_i + y_{i+1}) / 2) (y_{i+1} - y_i) / h`.
    #[default]
    Midpoint,
    /// `(K(y_{i+1}) - K(y_i)) / h` with `K' = d`; needs `kirchhoff`.
    Kirchhoff,
}

impl std::str::FromStr for FluxForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "midpoint" => Ok(FluxForm::Midpoint),
            "kirchhoff" => Ok(FluxForm::Kirchhoff),
            other => Err(Error::Validation(format!(
                "unknown flux form `{other}` (expected midpoint or kirchhoff)"
            ))),
        }
    }
}

/// `-eps^2 (d(u) u')' + r(x, u) = 0`, Dirichlet data on both ends.
#[derive(Clone)]
pub struct QuasilinearDiffusionProblem<T> {
    pub eps: T,
    pub d: Fn1<T>,
    pub d_u: Fn1<T>,
    /// Antiderivative `K` of `d`, if known in closed form.
    pub kirchhoff: Option<Fn1<T>>,
    pub flux: FluxForm,
    pub r: Fn2<T>,
    pub r_u: Fn2<T>,
    pub bc_left: T,
    pub bc_right: T,
    pub exact: Option<Fn1<T>>,
}

impl<T: Real> fmt::Debug for QuasilinearDiffusionProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuasilinearDiffusionProblem")
            .field("eps", &self.eps)
            .field("flux", &self.flux)
            .field("bc_left", &self.bc_left)
            .field("bc_right", &self.bc_right)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl<T: Real> QuasilinearDiffusionProblem<T> {
    pub fn with_flux(mut self, flux: FluxForm) -> Result<Self> {
        if flux == FluxForm::Kirchhoff && self.kirchhoff.is_none() {
            return Err(Error::Validation(
                "Kirchhoff flux needs the antiderivative of d".into(),
            ));
        }
        self.flux = flux;
        Ok(self)
    }
}

/// Either problem class, so drivers can hold a registry entry by value.
#[derive(Clone)]
pub enum AnyProblem<T> {
    Semilinear(SemilinearProblem<T>),
    Diffusion(QuasilinearDiffusionProblem<T>),
}

impl<T: Real> fmt::Debug for AnyProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnyProblem::Semilinear(p) => p.fmt(f),
            AnyProblem::Diffusion(p) => p.fmt(f),
        }
    }
}

impl<T: Real> AnyProblem<T> {
    pub fn eps(&self) -> T {
        match self {
            AnyProblem::Semilinear(p) => p.eps,
            AnyProblem::Diffusion(p) => p.eps,
        }
    }

    pub fn exact(&self) -> Option<&Fn1<T>> {
        match self {
            AnyProblem::Semilinear(p) => p.exact.as_ref(),
            AnyProblem::Diffusion(p) => p.exact.as_ref(),
        }
    }
}

/// Built-in problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemId {
    Ex1,
    Ex2,
}

impl ProblemId {
    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Ex1 => "ex1",
            ProblemId::Ex2 => "ex2",
        }
    }

    pub fn build<T: Real>(self, eps: T) -> Result<AnyProblem<T>> {
        match self {
            ProblemId::Ex1 => example1(eps).map(AnyProblem::Semilinear),
            ProblemId::Ex2 => example2(eps).map(AnyProblem::Diffusion),
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ex1" => Ok(ProblemId::Ex1),
            "ex2" => Ok(ProblemId::Ex2),
            other => Err(Error::Validation(format!(
                "unknown problem `{other}` (expected ex1 or ex2)"
            ))),
        }
    }
}

fn check_eps<T: Real>(eps: T) -> Result<()> {
    if eps > T::zero() && eps <= T::one() {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "eps must lie in (0, 1], got {eps}"
        )))
    }
}

/// Layer function of the first example,
/// `E(x) = (exp(-x/eps) + exp(-(1-x)/eps)) / (1 + exp(-1/eps))`; it satisfies
/// `eps^2 E'' = E`.
fn example1_layer<T: Real>(eps: T, x: T) -> T {
    ((-x / eps).exp() + (-(T::one() - x) / eps).exp()) / (T::one() + (-T::one() / eps).exp())
}

/// `-eps^2 u'' + (u - 1)/(2 - u) + g(x) = 0`, `u(0) = u(1) = 0`, with exact
/// solution `u = 1 - E(x)`.
///
/// Substituting the solution gives `g = eps^2 u'' - (u - 1)/(2 - u) = -E^2 / (1 + E)`.
pub fn example1<T: Real>(eps: T) -> Result<SemilinearProblem<T>> {
    check_eps(eps)?;
    let two = T::lit(2.0);
    Ok(SemilinearProblem {
        eps,
        f: Arc::new(move |x, u| {
            let e = example1_layer(eps, x);
            (u - T::one()) / (two - u) - e * e / (T::one() + e)
        }),
        f_u: Arc::new(move |_, u| {
            let d = two - u;
            T::one() / (d * d)
        }),
        bc_left: T::zero(),
        bc_right: T::zero(),
        exact: Some(Arc::new(move |x| T::one() - example1_layer(eps, x))),
        c0_squared: T::lit(0.25),
    })
}

/// Exact solution of the first example and its second derivative.
pub fn example1_exact<T: Real>(eps: T, x: T) -> (T, T) {
    let e = example1_layer(eps, x);
    (T::one() - e, -e / (eps * eps))
}

/// Closed-form solution of the second example and its first two derivatives:
/// `u = exp(-x/eps) + exp(x) - 1`.
pub fn example2_exact<T: Real>(eps: T, x: T) -> (T, T, T) {
    let layer = (-x / eps).exp();
    let ex = x.exp();
    (
        layer + ex - T::one(),
        -layer / eps + ex,
        layer / (eps * eps) + ex,
    )
}

/// Source `f = u - eps^2 (u' / (u + 1))'` of the second example.
fn example2_source<T: Real>(eps: T, x: T) -> T {
    let (u, du, d2u) = example2_exact(eps, x);
    let w = u + T::one();
    let flux_derivative = (d2u * w - du * du) / (w * w);
    u - eps * eps * flux_derivative
}

/// `-eps^2 (u' / (u + 1))' + u = f(x)`, `u(0) = 1`, `u(1) = exp(-1/eps) + e - 1`.
///
/// Defaults to [`FluxForm::Kirchhoff`]; use `with_flux` for the other
/// discretizations of the flux.
pub fn example2<T: Real>(eps: T) -> Result<QuasilinearDiffusionProblem<T>> {
    check_eps(eps)?;
    Ok(QuasilinearDiffusionProblem {
        eps,
        d: Arc::new(|u| T::one() / (T::one() + u)),
        d_u: Arc::new(|u| {
            let w = T::one() + u;
            -T::one() / (w * w)
        }),
        kirchhoff: Some(Arc::new(|u: T| u.ln_1p())),
        flux: FluxForm::Kirchhoff,
        r: Arc::new(move |x, u| u - example2_source(eps, x)),
        r_u: Arc::new(|_, _| T::one()),
        bc_left: T::one(),
        bc_right: (-T::one() / eps).exp() + T::E() - T::one(),
        exact: Some(Arc::new(move |x| example2_exact(eps, x).0)),
    })
}

/// Rewrites a problem with diffusion factor `d(u) = 1 / (1 + u)` in the
/// variable `v = ln(1 + u)`: since `u' / (1 + u) = v'`, the equation becomes
/// `-eps^2 v'' + r(x, exp(v) - 1) = 0`.
///
/// Only meaningful when the problem's `d` is `1 / (1 + u)`; the diffusion
/// callbacks are not consulted.
pub fn log_transform<T: Real>(p: &QuasilinearDiffusionProblem<T>) -> Result<SemilinearProblem<T>> {
    for (side, bc) in [("left", p.bc_left), ("right", p.bc_right)] {
        if !(bc > -T::one()) {
            return Err(Error::Domain(format!(
                "{side} boundary value {bc} <= -1 has no logarithm"
            )));
        }
    }
    let r = p.r.clone();
    let r_u = p.r_u.clone();
    let exact = p
        .exact
        .clone()
        .map(|u| -> Fn1<T> { Arc::new(move |x| (T::one() + u(x)).ln()) });
    Ok(SemilinearProblem {
        eps: p.eps,
        f: Arc::new(move |x, v| r(x, v.exp() - T::one())),
        f_u: Arc::new(move |x, v| {
            let ev = v.exp();
            r_u(x, ev - T::one()) * ev
        }),
        bc_left: (T::one() + p.bc_left).ln(),
        bc_right: (T::one() + p.bc_right).ln(),
        exact,
        c0_squared: T::zero(),
    })
}
