use crate::mesh::Mesh;
use crate::twogrid::PiecewiseLinear;
use crate::{Error, Real, Result};

/// Discrete maximum norm of `exact(x_i) - y_i` over all nodes.
pub fn nodal_error<T: Real>(mesh: &Mesh<T>, y: &[T], exact: Option<&dyn Fn(T) -> T>) -> Result<T> {
    let exact = exact.ok_or(Error::MissingExact)?;
    if y.len() != mesh.n() + 1 {
        return Err(Error::Validation(
            "solution length does not match mesh".into(),
        ));
    }
    Ok(mesh
        .nodes()
        .iter()
        .zip(y)
        .fold(T::zero(), |acc, (&x, &v)| acc.max((exact(x) - v).abs())))
}

/// Max of `|exact(s) - I(s)|` over `samples` uniformly spaced points plus all
/// mesh nodes, where `I` is the piecewise linear interpolant of `y`.
/// At least `10 n` samples are used.
pub fn interpolant_error<T: Real>(
    mesh: &Mesh<T>,
    y: &[T],
    exact: Option<&dyn Fn(T) -> T>,
    samples: usize,
) -> Result<T> {
    let exact = exact.ok_or(Error::MissingExact)?;
    let interp = PiecewiseLinear::from_mesh(mesh, y)?;
    let samples = samples.max(10 * mesh.n());
    let denom = T::from_usize_lossy(samples);
    let mut points: Vec<T> = (0..=samples)
        .map(|k| T::from_usize_lossy(k) / denom)
        .collect();
    points.extend_from_slice(mesh.nodes());
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite sample points"));
    let values = interp.eval_many(&points)?;
    Ok(points
        .iter()
        .zip(&values)
        .fold(T::zero(), |acc, (&s, &v)| acc.max((exact(s) - v).abs())))
}

/// `(ln E_N - ln E_2N) / ln 2`.
pub fn convergence_order<T: Real>(coarse_error: T, fine_error: T) -> Result<T> {
    if !(coarse_error > T::zero() && fine_error > T::zero()) {
        return Err(Error::DegenerateError);
    }
    Ok((coarse_error.ln() - fine_error.ln()) / T::LN_2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::MeshSpec;

    #[test]
    fn exact_data_has_zero_error() {
        let mesh = Mesh::build(&MeshSpec::shishkin(1e-2, 16)).unwrap();
        let f = |x: f64| x.sin();
        let y: Vec<f64> = mesh.nodes().iter().map(|&x| f(x)).collect();
        assert_eq!(nodal_error(&mesh, &y, Some(&f)).unwrap(), 0.0);
    }

    #[test]
    fn single_node_perturbation() {
        let mesh = Mesh::build(&MeshSpec::<f64>::uniform(8)).unwrap();
        let f = |x: f64| x * x;
        let mut y: Vec<f64> = mesh.nodes().iter().map(|&x| f(x)).collect();
        y[3] += 1e-3;
        assert!((nodal_error(&mesh, &y, Some(&f)).unwrap() - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn missing_exact() {
        let mesh = Mesh::build(&MeshSpec::<f64>::uniform(8)).unwrap();
        assert_eq!(
            nodal_error(&mesh, &[0.0; 9], None),
            Err(Error::MissingExact)
        );
        assert_eq!(
            interpolant_error(&mesh, &[0.0; 9], None, 10),
            Err(Error::MissingExact)
        );
    }

    #[test]
    fn linear_exact_has_zero_interpolant_error() {
        let mesh = Mesh::build(&MeshSpec::vulanovic(1e-3, 16, 1.0, 0.4)).unwrap();
        let f = |x: f64| 3.0 - 2.0 * x;
        let y: Vec<f64> = mesh.nodes().iter().map(|&x| f(x)).collect();
        assert!(interpolant_error(&mesh, &y, Some(&f), 0).unwrap() <= 1e-14);
    }

    #[test]
    fn interpolant_error_dominates_nodal_error() {
        let mesh = Mesh::build(&MeshSpec::bakhvalov(1e-2, 16, 2.0, 0.4)).unwrap();
        let f = |x: f64| (-x / 1e-2).exp();
        let y: Vec<f64> = mesh.nodes().iter().map(|&x| f(x) + 1e-4 * x).collect();
        let nodal = nodal_error(&mesh, &y, Some(&f)).unwrap();
        assert!(interpolant_error(&mesh, &y, Some(&f), 100).unwrap() >= nodal);
    }

    #[test]
    fn orders() {
        assert!((convergence_order(3.230e-2f64, 7.5e-3).unwrap() - 2.1066).abs() < 1e-3);
        assert_eq!(convergence_order(1.0f64, 0.25).unwrap(), 2.0);
        assert!((convergence_order(4.470e-4f64, 8.554e-5).unwrap() - 2.3855).abs() < 1e-3);
        assert_eq!(convergence_order(0.0f64, 1.0), Err(Error::DegenerateError));
    }
}
