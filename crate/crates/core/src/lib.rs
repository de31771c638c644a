//! Solvers for singularly perturbed semilinear reaction-diffusion problems
//!
//! ```text
//!     -eps^2 u'' + f(x, u) = 0,  x in (0, 1),   u(0) = u_l,  u(1) = u_r,
//! ```
//!
//! on layer-adapted meshes (Shishkin, Bakhvalov, Vulanovic), using the
//! classical three-point scheme, discrete quasilinearization (Newton) and
//! two-grid algorithms that do the nonlinear work on a coarse mesh only.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`). The crate root
//! exposes `f64` aliases for the common types; the generic versions live in
//! their modules.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
mod error;
pub mod linsolve;
pub mod mesh;
pub mod problem;
pub mod quasi;
mod real;
pub mod twogrid;

pub use error::{Error, Result};
pub use mesh::{LayerSides, MeshFamily};
pub use problem::{FluxForm, ProblemId};
pub use quasi::{InitialGuess, Linearization, NonlinearScheme};
pub use real::Real;

pub type MeshSpec = mesh::MeshSpec<f64>;
pub type Mesh = mesh::Mesh<f64>;
pub type SemilinearProblem = problem::SemilinearProblem<f64>;
pub type QuasilinearDiffusionProblem = problem::QuasilinearDiffusionProblem<f64>;
pub type AnyProblem = problem::AnyProblem<f64>;
pub type TridiagonalSystem = linsolve::TridiagonalSystem<f64>;
pub type NewtonConfig = quasi::NewtonConfig<f64>;
pub type SolveOutcome = quasi::SolveOutcome<f64>;
pub type TwoGridPlan = twogrid::TwoGridPlan<f64>;
pub type TwoGridResult = twogrid::TwoGridResult<f64>;
pub type PiecewiseLinear = twogrid::PiecewiseLinear<f64>;
