//! Three-point scheme for linear reaction-diffusion problems
//!
//! ```text
//!     -eps^2 y_{xbar xhat, i} + b_i y_i = g_i,   i = 1 .. n-1,
//!     y_{xbar xhat, i} = ((y_{i+1} - y_i) / h_{i+1} - (y_i - y_{i-1}) / h_i) / hbar_i,
//! ```
//!
//! with Dirichlet data folded into the first and last rows.

use crate::mesh::Mesh;
use crate::{Error, Real, Result};

/// Interior unknowns `y_1 .. y_{n-1}`. Row `k` holds unknown `y_{k+1}`;
/// `sub[0]` and `sup[len - 1]` are always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem<T> {
    pub sub: Vec<T>,
    pub diag: Vec<T>,
    pub sup: Vec<T>,
    pub rhs: Vec<T>,
}

impl<T: Real> TridiagonalSystem<T> {
    pub fn zeros(len: usize) -> Self {
        TridiagonalSystem {
            sub: vec![T::zero(); len],
            diag: vec![T::zero(); len],
            sup: vec![T::zero(); len],
            rhs: vec![T::zero(); len],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Matrix-vector product `A y`.
    pub fn apply(&self, y: &[T]) -> Vec<T> {
        let m = self.len();
        (0..m)
            .map(|k| {
                let mut v = self.diag[k] * y[k];
                if k > 0 {
                    v = v + self.sub[k] * y[k - 1];
                }
                if k + 1 < m {
                    v = v + self.sup[k] * y[k + 1];
                }
                v
            })
            .collect()
    }

    /// `max_k |(A y - rhs)_k|`.
    pub fn residual_norm(&self, y: &[T]) -> T {
        self.apply(y)
            .iter()
            .zip(&self.rhs)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs()))
    }

    /// Row-wise M-matrix sign pattern: positive diagonal, nonpositive
    /// off-diagonals and a diagonal excess of at least `margin[k]`.
    pub fn is_m_matrix_with_margin(&self, margin: impl Fn(usize) -> T) -> bool {
        (0..self.len()).all(|k| {
            self.diag[k] > T::zero()
                && self.sub[k] <= T::zero()
                && self.sup[k] <= T::zero()
                && self.diag[k] + self.sub[k] + self.sup[k] >= margin(k)
        })
    }
}

/// Assembles the scheme from nodal coefficient values `b[k] = b(x_{k+1})`
/// and `g[k] = g(x_{k+1})`.
pub fn assemble_nodal<T: Real>(
    mesh: &Mesh<T>,
    eps: T,
    b: &[T],
    g: &[T],
    bc_left: T,
    bc_right: T,
) -> Result<TridiagonalSystem<T>> {
    let m = mesh.n() - 1;
    if b.len() != m || g.len() != m {
        return Err(Error::Validation(format!(
            "coefficient arrays must have {m} interior values (got {} and {})",
            b.len(),
            g.len()
        )));
    }
    let mut sys = fill_operator(mesh, eps);
    for k in 0..m {
        if !(b[k] > T::zero()) {
            return Err(Error::NonpositiveCoefficient {
                index: k + 1,
                value: b[k].as_f64(),
            });
        }
        sys.diag[k] = sys.diag[k] + b[k];
        sys.rhs[k] = g[k];
    }
    fold_boundary(&mut sys, mesh, eps, bc_left, bc_right);
    Ok(sys)
}

/// Assembles the scheme for coefficient callbacks `b(x)` and `g(x)`.
pub fn assemble<T: Real>(
    mesh: &Mesh<T>,
    eps: T,
    b: impl Fn(T) -> T,
    g: impl Fn(T) -> T,
    bc_left: T,
    bc_right: T,
) -> Result<TridiagonalSystem<T>> {
    let interior = &mesh.nodes()[1..mesh.n()];
    let bv: Vec<T> = interior.iter().map(|&x| b(x)).collect();
    let gv: Vec<T> = interior.iter().map(|&x| g(x)).collect();
    assemble_nodal(mesh, eps, &bv, &gv, bc_left, bc_right)
}

/// The `-eps^2 y_{xbar xhat}` part alone, with zero right-hand side.
pub(crate) fn fill_operator<T: Real>(mesh: &Mesh<T>, eps: T) -> TridiagonalSystem<T> {
    let m = mesh.n() - 1;
    let e2 = eps * eps;
    let mut sys = TridiagonalSystem::zeros(m);
    for i in 1..=m {
        let k = i - 1;
        let scale = e2 / mesh.hbar(i);
        let left = scale / mesh.h(i);
        let right = scale / mesh.h(i + 1);
        if k > 0 {
            sys.sub[k] = -left;
        }
        if i < m {
            sys.sup[k] = -right;
        }
        sys.diag[k] = left + right;
    }
    sys
}

/// Moves the known boundary values to the right-hand side.
pub(crate) fn fold_boundary<T: Real>(
    sys: &mut TridiagonalSystem<T>,
    mesh: &Mesh<T>,
    eps: T,
    bc_left: T,
    bc_right: T,
) {
    let n = mesh.n();
    let e2 = eps * eps;
    let first = e2 / (mesh.hbar(1) * mesh.h(1));
    let last = e2 / (mesh.hbar(n - 1) * mesh.h(n));
    sys.rhs[0] = sys.rhs[0] + first * bc_left;
    let m = sys.len();
    sys.rhs[m - 1] = sys.rhs[m - 1] + last * bc_right;
}

/// Thomas algorithm (forward elimination, back substitution, no pivoting).
pub fn thomas_solve<T: Real>(sys: &TridiagonalSystem<T>) -> Result<Vec<T>> {
    let m = sys.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    if sys.sub.len() != m || sys.sup.len() != m || sys.rhs.len() != m {
        return Err(Error::Validation(
            "tridiagonal arrays differ in length".into(),
        ));
    }
    let tiny = T::tiny();
    let mut c = vec![T::zero(); m];
    let mut d = vec![T::zero(); m];
    let mut pivot = sys.diag[0];
    if !(pivot.abs() >= tiny) {
        return Err(Error::ZeroPivot {
            row: 0,
            value: pivot.as_f64(),
        });
    }
    c[0] = sys.sup[0] / pivot;
    d[0] = sys.rhs[0] / pivot;
    for k in 1..m {
        pivot = sys.diag[k] - sys.sub[k] * c[k - 1];
        if !(pivot.abs() >= tiny) {
            return Err(Error::ZeroPivot {
                row: k,
                value: pivot.as_f64(),
            });
        }
        c[k] = sys.sup[k] / pivot;
        d[k] = (sys.rhs[k] - sys.sub[k] * d[k - 1]) / pivot;
    }
    for k in (0..m - 1).rev() {
        d[k] = d[k] - c[k] * d[k + 1];
    }
    Ok(d)
}

/// Solves the linear problem and returns the full vector `y_0 ..= y_n`.
pub fn solve_linear<T: Real>(
    mesh: &Mesh<T>,
    eps: T,
    b: impl Fn(T) -> T,
    g: impl Fn(T) -> T,
    bc_left: T,
    bc_right: T,
) -> Result<Vec<T>> {
    let sys = assemble(mesh, eps, b, g, bc_left, bc_right)?;
    let interior = thomas_solve(&sys)?;
    Ok(with_boundary(bc_left, interior, bc_right))
}

pub(crate) fn with_boundary<T: Real>(left: T, interior: Vec<T>, right: T) -> Vec<T> {
    let mut y = Vec::with_capacity(interior.len() + 2);
    y.push(left);
    y.extend(interior);
    y.push(right);
    y
}
