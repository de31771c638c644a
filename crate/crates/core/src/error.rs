use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    /// Condition `a * eps < q` violated for a graded mesh.
    #[error("degenerate mesh parameters: a*eps = {a_eps} >= q = {q}")]
    DegenerateMesh { a_eps: f64, q: f64 },

    #[error("transition point equation has no sign change on [0, q)")]
    NoRoot,

    #[error("reaction coefficient {value} <= 0 at interior node {index}")]
    NonpositiveCoefficient { index: usize, value: f64 },

    #[error("pivot {value:e} at row {row} is numerically zero")]
    ZeroPivot { row: usize, value: f64 },

    #[error("no convergence after {iterations} iterations (last update {last_update:e})")]
    NoConvergence { iterations: usize, last_update: f64 },

    #[error("df/du = {value} <= 0 at node {index}")]
    NonpositiveJacobian { index: usize, value: f64 },

    #[error("diffusion coefficient is not positive near node {index}")]
    SingularDiffusion { index: usize },

    #[error("query point {x} lies outside the mesh interval")]
    OutOfDomain { x: f64 },

    #[error("problem has no closed-form solution")]
    MissingExact,

    #[error("convergence order undefined for zero error")]
    DegenerateError,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid with {n} intervals exceeds the limit of {limit}")]
    MemoryBudget { n: usize, limit: usize },
}
