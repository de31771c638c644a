//! Layer-adapted meshes built from mesh-generating functions.
//!
//! A mesh with `n` intervals has nodes `x_i = lambda(i / n)`, where `lambda` is a
//! monotone map of `[0, 1]` onto itself. Away from the layers every family is
//! linear; inside a layer it is
//!
//! * Shishkin: `4 alpha t` on `[0, 1/4]`, `alpha = min(1/4, 2 eps ln(n) / gamma0)`;
//! * Bakhvalov: `a eps ln(q / (q - t))` on `[0, alpha]`;
//! * Vulanovic: `a eps t / (q - t)` on `[0, alpha]`.
//!
//! For the graded families `alpha` is the point where the outer straight line,
//! drawn through `(0.5, 0.5)` (or `(1, 1)` for a one-sided mesh), touches the
//! layer function.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFamily {
    Uniform,
    Shishkin,
    Bakhvalov,
    Vulanovic,
}

impl MeshFamily {
    pub fn name(self) -> &'static str {
        match self {
            MeshFamily::Uniform => "uniform",
            MeshFamily::Shishkin => "shishkin",
            MeshFamily::Bakhvalov => "bakhvalov",
            MeshFamily::Vulanovic => "vulanovic",
        }
    }

    /// Short label used in tables (`S`, `B`, `V`, `U`).
    pub fn letter(self) -> char {
        match self {
            MeshFamily::Uniform => 'U',
            MeshFamily::Shishkin => 'S',
            MeshFamily::Bakhvalov => 'B',
            MeshFamily::Vulanovic => 'V',
        }
    }
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MeshFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" | "u" => Ok(MeshFamily::Uniform),
            "shishkin" | "s" => Ok(MeshFamily::Shishkin),
            "bakhvalov" | "b" => Ok(MeshFamily::Bakhvalov),
            "vulanovic" | "v" => Ok(MeshFamily::Vulanovic),
            other => Err(Error::Validation(format!("unknown mesh family `{other}`"))),
        }
    }
}

/// Which boundaries get a refined layer region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerSides {
    #[default]
    Both,
    /// Layer at `x = 0` only; the outer line runs up to `(1, 1)`.
    LeftOnly,
}

impl std::str::FromStr for LayerSides {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "both" => Ok(LayerSides::Both),
            "left_only" | "left-only" | "left" => Ok(LayerSides::LeftOnly),
            other => Err(Error::Validation(format!("unknown layer sides `{other}`"))),
        }
    }
}

/// Parameters of a mesh. `a` and `q` are used by the graded families,
/// `gamma0` by Shishkin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec<T> {
    pub family: MeshFamily,
    pub eps: T,
    pub n: usize,
    pub a: T,
    pub q: T,
    pub gamma0: T,
    pub layer_sides: LayerSides,
}

impl<T: Real> MeshSpec<T> {
    pub fn new(family: MeshFamily, eps: T, n: usize) -> Self {
        MeshSpec {
            family,
            eps,
            n,
            a: T::one(),
            q: T::lit(0.4),
            gamma0: T::one(),
            layer_sides: LayerSides::Both,
        }
    }

    pub fn uniform(n: usize) -> Self {
        Self::new(MeshFamily::Uniform, T::one(), n)
    }

    pub fn shishkin(eps: T, n: usize) -> Self {
        Self::new(MeshFamily::Shishkin, eps, n)
    }

    pub fn bakhvalov(eps: T, n: usize, a: T, q: T) -> Self {
        Self::new(MeshFamily::Bakhvalov, eps, n).with_aq(a, q)
    }

    pub fn vulanovic(eps: T, n: usize, a: T, q: T) -> Self {
        Self::new(MeshFamily::Vulanovic, eps, n).with_aq(a, q)
    }

    pub fn with_aq(mut self, a: T, q: T) -> Self {
        self.a = a;
        self.q = q;
        self
    }

    pub fn with_gamma0(mut self, gamma0: T) -> Self {
        self.gamma0 = gamma0;
        self
    }

    pub fn with_layer_sides(mut self, sides: LayerSides) -> Self {
        self.layer_sides = sides;
        self
    }

    pub fn with_eps(mut self, eps: T) -> Self {
        self.eps = eps;
        self
    }

    /// Same family and parameters with a different interval count.
    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Validation(format!(
                "mesh needs n >= 2 intervals, got {}",
                self.n
            )));
        }
        if !(self.eps > T::zero() && self.eps <= T::one()) {
            return Err(Error::Validation(format!(
                "eps must lie in (0, 1], got {}",
                self.eps
            )));
        }
        match self.family {
            MeshFamily::Bakhvalov | MeshFamily::Vulanovic => {
                if !(self.q > T::zero() && self.q < T::lit(0.5)) {
                    return Err(Error::Validation(format!(
                        "q must lie in (0, 0.5), got {}",
                        self.q
                    )));
                }
                if !(self.a > T::zero()) {
                    return Err(Error::Validation(format!(
                        "a must be positive, got {}",
                        self.a
                    )));
                }
            }
            MeshFamily::Shishkin => {
                if !(self.gamma0 > T::zero()) {
                    return Err(Error::Validation(format!(
                        "gamma0 must be positive, got {}",
                        self.gamma0
                    )));
                }
            }
            MeshFamily::Uniform => {}
        }
        Ok(())
    }

    /// Resolves the transition parameter and returns the generating function.
    ///
    /// Degenerate graded parameters (`a eps >= q`, or a tangency at the origin)
    /// yield [`GeneratingFunction::Identity`] together with the reason.
    pub fn generating_function(&self) -> Result<(GeneratingFunction<T>, Option<Error>)> {
        self.validate()?;
        let sides = self.layer_sides;
        let anchor = match sides {
            LayerSides::Both => T::lit(0.5),
            LayerSides::LeftOnly => T::one(),
        };
        let a_eps = self.a * self.eps;
        let graded = |gap: Result<T>| -> Result<(GeneratingFunction<T>, Option<Error>)> {
            match gap {
                Ok(gap) if gap < self.q => Ok((
                    GeneratingFunction::Graded {
                        kind: self.family,
                        a_eps,
                        q: self.q,
                        alpha: self.q - gap,
                        gap,
                        sides,
                    },
                    None,
                )),
                Ok(_) => Ok((
                    GeneratingFunction::Identity,
                    Some(Error::DegenerateMesh {
                        a_eps: a_eps.as_f64(),
                        q: self.q.as_f64(),
                    }),
                )),
                Err(e @ Error::DegenerateMesh { .. }) => {
                    Ok((GeneratingFunction::Identity, Some(e)))
                }
                Err(e) => Err(e),
            }
        };
        match self.family {
            MeshFamily::Uniform => Ok((GeneratingFunction::Identity, None)),
            MeshFamily::Shishkin => {
                let alpha = shishkin_alpha(self.eps, self.gamma0, self.n);
                if alpha >= T::lit(0.25) {
                    Ok((GeneratingFunction::Identity, None))
                } else {
                    Ok((GeneratingFunction::Shishkin { alpha, sides }, None))
                }
            }
            MeshFamily::Bakhvalov => graded(bakhvalov_gap(a_eps, self.q, anchor)),
            MeshFamily::Vulanovic => graded(vulanovic_gap(a_eps, self.q, anchor)),
        }
    }
}

impl<T: Real> fmt::Display for MeshSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} n={} eps={}", self.family, self.n, self.eps)?;
        match self.family {
            MeshFamily::Bakhvalov | MeshFamily::Vulanovic => {
                write!(f, " a={} q={}", self.a, self.q)
            }
            MeshFamily::Shishkin => write!(f, " gamma0={}", self.gamma0),
            MeshFamily::Uniform => Ok(()),
        }
    }
}

/// Shishkin transition point `min(1/4, 2 eps ln(n) / gamma0)`.
pub fn shishkin_alpha<T: Real>(eps: T, gamma0: T, n: usize) -> T {
    let ln_n = T::from_usize_lossy(n).ln();
    (T::lit(2.0) * eps * ln_n / gamma0).min(T::lit(0.25))
}

/// Closed-form tangency point of the Vulanovic mesh.
pub fn vulanovic_alpha<T: Real>(eps: T, a: T, q: T) -> Result<T> {
    Ok(q - vulanovic_gap(a * eps, q, T::lit(0.5))?)
}

/// Tangency point of the Bakhvalov mesh, found by bisection.
///
/// Returns `0` when the tangent from `(0.5, 0.5)` touches at the origin
/// (`a eps == q`): the layer piece is then empty and the mesh is uniform.
pub fn bakhvalov_alpha<T: Real>(eps: T, a: T, q: T) -> Result<T> {
    Ok(q - bakhvalov_gap(a * eps, q, T::lit(0.5))?)
}

/// Tangency of `mu(t) = a_eps t / (q - t)` with a line through `(p, p)`,
/// returned as the gap `s = q - alpha`. Tangency reduces to
/// `(p + a_eps) s^2 - 2 a_eps q s - a_eps q (p - q) = 0`.
fn vulanovic_gap<T: Real>(a_eps: T, q: T, p: T) -> Result<T> {
    if a_eps >= q {
        return Err(Error::DegenerateMesh {
            a_eps: a_eps.as_f64(),
            q: q.as_f64(),
        });
    }
    let aq = a_eps * q;
    let disc = aq * (aq + (p + a_eps) * (p - q));
    let s = (aq + disc.sqrt()) / (p + a_eps);
    Ok(s.min(q))
}

/// Tangency equation of the Bakhvalov layer function with a line through `(p, p)`.
pub(crate) fn bakhvalov_tangency<T: Real>(a_eps: T, q: T, p: T, alpha: T) -> T {
    a_eps * (q / (q - alpha)).ln() + a_eps * (p - alpha) / (q - alpha) - p
}

/// Gap `s = q - alpha` of the Bakhvalov tangency point.
fn bakhvalov_gap<T: Real>(a_eps: T, q: T, p: T) -> Result<T> {
    if a_eps > q {
        return Err(Error::DegenerateMesh {
            a_eps: a_eps.as_f64(),
            q: q.as_f64(),
        });
    }
    if bakhvalov_tangency(a_eps, q, p, T::zero()) >= T::zero() {
        return Ok(q);
    }
    // Bisect on s = q - alpha, which can be far below q when a eps is small;
    // a relative stopping rule keeps its digits. The equation increases as s
    // decreases.
    let eq = |s: T| a_eps * (q / s).ln() + a_eps * (p - q + s) / s - p;
    let (mut lo, mut hi) = (T::min_positive_value().sqrt(), q);
    if eq(lo) <= T::zero() {
        return Err(Error::NoRoot);
    }
    for _ in 0..2000 {
        if hi - lo <= T::lit(4.0) * T::epsilon() * hi {
            break;
        }
        // Geometric midpoint while the bracket spans decades.
        let mid = if hi > T::lit(4.0) * lo {
            (lo * hi).sqrt()
        } else {
            T::lit(0.5) * (lo + hi)
        };
        if eq(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(T::lit(0.5) * (lo + hi))
}

/// Mesh-generating function `lambda: [0, 1] -> [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratingFunction<T> {
    Identity,
    Shishkin {
        alpha: T,
        sides: LayerSides,
    },
    /// Bakhvalov (`kind == Bakhvalov`) or Vulanovic layer function followed by
    /// its tangent line.
    Graded {
        kind: MeshFamily,
        a_eps: T,
        q: T,
        alpha: T,
        /// `q - alpha`, kept separately because it can be tiny.
        gap: T,
        sides: LayerSides,
    },
}

impl<T: Real> GeneratingFunction<T> {
    pub fn eval(&self, t: T) -> T {
        let half = T::lit(0.5);
        match self {
            GeneratingFunction::Identity => t,
            GeneratingFunction::Shishkin {
                sides: LayerSides::Both,
                ..
            }
            | GeneratingFunction::Graded {
                sides: LayerSides::Both,
                ..
            } => {
                if t > half {
                    T::one() - self.left(T::one() - t)
                } else {
                    self.left(t)
                }
            }
            _ => self.left(t),
        }
    }

    /// Transition parameter (`alpha`), zero for the identity.
    pub fn alpha(&self) -> T {
        match self {
            GeneratingFunction::Identity => T::zero(),
            GeneratingFunction::Shishkin { alpha, .. }
            | GeneratingFunction::Graded { alpha, .. } => *alpha,
        }
    }

    /// Breakpoint in `t` between the layer piece and the outer line.
    pub fn breakpoint(&self) -> Option<T> {
        match self {
            GeneratingFunction::Identity => None,
            GeneratingFunction::Shishkin { .. } => Some(T::lit(0.25)),
            GeneratingFunction::Graded { alpha, .. } => Some(*alpha),
        }
    }

    /// Left half (or the whole map, for one-sided meshes) without reflection.
    fn left(&self, t: T) -> T {
        match *self {
            GeneratingFunction::Identity => t,
            GeneratingFunction::Shishkin { alpha, sides } => {
                let quarter = T::lit(0.25);
                if t <= quarter {
                    T::lit(4.0) * alpha * t
                } else {
                    match sides {
                        LayerSides::Both => {
                            alpha + T::lit(2.0) * (T::one() - T::lit(2.0) * alpha) * (t - quarter)
                        }
                        LayerSides::LeftOnly => {
                            alpha + (T::one() - alpha) * (t - quarter) / T::lit(0.75)
                        }
                    }
                }
            }
            GeneratingFunction::Graded {
                kind,
                a_eps,
                q,
                alpha,
                gap,
                ..
            } => {
                if t <= alpha {
                    layer_value(kind, a_eps, q, q - t)
                } else {
                    layer_value(kind, a_eps, q, gap)
                        + layer_slope(kind, a_eps, q, gap) * (t - alpha)
                }
            }
        }
    }
}

/// Layer function at `t = q - s`.
fn layer_value<T: Real>(kind: MeshFamily, a_eps: T, q: T, s: T) -> T {
    match kind {
        MeshFamily::Bakhvalov => a_eps * (q / s).ln(),
        _ => a_eps * (q - s) / s,
    }
}

fn layer_slope<T: Real>(kind: MeshFamily, a_eps: T, q: T, s: T) -> T {
    match kind {
        MeshFamily::Bakhvalov => a_eps / s,
        _ => a_eps * q / (s * s),
    }
}

/// Sorted mesh nodes with precomputed steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    spec: MeshSpec<T>,
    generator: GeneratingFunction<T>,
    nodes: Vec<T>,
    steps: Vec<T>,
    half_steps: Vec<T>,
    fallback: Option<Error>,
}

impl<T: Real> Mesh<T> {
    /// Builds `x_i = lambda(i / n)`. Degenerate graded parameters fall back to
    /// the uniform mesh and are reported by [`Mesh::fallback`].
    pub fn build(spec: &MeshSpec<T>) -> Result<Self> {
        let (generator, fallback) = spec.generating_function()?;
        let n = spec.n;
        let nf = T::from_usize_lossy(n);
        let mut nodes = vec![T::zero(); n + 1];
        let symmetric = spec.layer_sides == LayerSides::Both;
        for (i, x) in nodes.iter_mut().enumerate().take(n).skip(1) {
            if symmetric && 2 * i >= n {
                continue;
            }
            *x = generator.eval(T::from_usize_lossy(i) / nf);
        }
        if symmetric {
            if n.is_multiple_of(2) {
                nodes[n / 2] = T::lit(0.5);
            }
            for i in (n / 2 + 1)..n {
                if 2 * i > n {
                    nodes[i] = T::one() - nodes[n - i];
                }
            }
        }
        nodes[n] = T::one();
        let mut mesh = Self::from_nodes(nodes)?;
        mesh.spec = *spec;
        mesh.generator = generator;
        mesh.fallback = fallback;
        Ok(mesh)
    }

    /// Wraps an arbitrary node array. Nodes must start at 0, end at 1 and
    /// increase strictly.
    pub fn from_nodes(nodes: Vec<T>) -> Result<Self> {
        let n = nodes.len().saturating_sub(1);
        if n < 2 {
            return Err(Error::Validation(
                "a mesh needs at least 2 intervals".into(),
            ));
        }
        if nodes[0] != T::zero() || nodes[n] != T::one() {
            return Err(Error::Validation(
                "mesh must start at 0 and end at 1".into(),
            ));
        }
        let steps: Vec<T> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        if let Some(i) = steps.iter().position(|h| !(*h > T::zero())) {
            return Err(Error::Validation(format!(
                "mesh nodes not strictly increasing at interval {}",
                i + 1
            )));
        }
        let half_steps = steps
            .windows(2)
            .map(|w| T::lit(0.5) * (w[0] + w[1]))
            .collect();
        Ok(Mesh {
            spec: MeshSpec::uniform(n),
            generator: GeneratingFunction::Identity,
            nodes,
            steps,
            half_steps,
            fallback: None,
        })
    }

    /// Number of intervals.
    pub fn n(&self) -> usize {
        self.steps.len()
    }

    pub fn spec(&self) -> &MeshSpec<T> {
        &self.spec
    }

    pub fn generator(&self) -> &GeneratingFunction<T> {
        &self.generator
    }

    /// `x_0 ..= x_n`.
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// `h_1 ..= h_n`, stored zero-based.
    pub fn steps(&self) -> &[T] {
        &self.steps
    }

    /// `hbar_1 ..= hbar_{n-1}`, stored zero-based.
    pub fn half_steps(&self) -> &[T] {
        &self.half_steps
    }

    /// `h_i = x_i - x_{i-1}` for `1 <= i <= n`.
    #[inline]
    pub fn h(&self, i: usize) -> T {
        self.steps[i - 1]
    }

    /// `hbar_i = (h_i + h_{i+1}) / 2` for `1 <= i <= n - 1`.
    #[inline]
    pub fn hbar(&self, i: usize) -> T {
        self.half_steps[i - 1]
    }

    /// Reason the requested family was replaced by the uniform mesh.
    pub fn fallback(&self) -> Option<&Error> {
        self.fallback.as_ref()
    }

    pub fn is_fallback(&self) -> bool {
        self.fallback.is_some()
    }

    /// Percentage of nodes (endpoints included) within `eps` of either end,
    /// relative to the interval count.
    pub fn layer_fraction(&self, eps: T) -> T {
        let one_minus = T::one() - eps;
        let count = self
            .nodes
            .iter()
            .filter(|&&x| x <= eps || x >= one_minus)
            .count();
        T::lit(100.0) * T::from_usize_lossy(count) / T::from_usize_lossy(self.n())
    }

    /// Plain-text node listing: one header line, then one node per line with
    /// 17 significant digits.
    pub fn write_listing<W: Write>(&self, mut out: W) -> io::Result<()> {
        let s = &self.spec;
        writeln!(
            out,
            "# {} {} {:e} {:e} {:e} {:e}",
            s.family,
            self.n(),
            s.eps.as_f64(),
            s.a.as_f64(),
            s.q.as_f64(),
            s.gamma0.as_f64()
        )?;
        for x in &self.nodes {
            writeln!(out, "{:.16e}", x.as_f64())?;
        }
        Ok(())
    }

    pub fn to_listing(&self) -> String {
        let mut buf = Vec::new();
        self.write_listing(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("listing is ASCII")
    }
}

/// Parses a node listing written by [`Mesh::write_listing`], skipping the
/// header and any other `#` lines.
pub fn parse_listing(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.parse::<f64>()
                .map_err(|e| Error::Validation(format!("bad node `{l}`: {e}")))
        })
        .collect()
}

/// Layer fraction of a freshly built mesh; see [`Mesh::layer_fraction`].
pub fn layer_fraction<T: Real>(mesh: &Mesh<T>, eps: T) -> T {
    mesh.layer_fraction(eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn shishkin_alpha_values() {
        assert_eq!(shishkin_alpha(0.25, 1.0, 8), 0.25);
        assert!(close(
            shishkin_alpha(1e-2, 1.0, 64),
            2.0 * 1e-2 * 64f64.ln(),
            1e-16
        ));
        assert!(close(shishkin_alpha(1e-2, 1.0, 64), 0.083_177_7, 1e-7));
        assert!(close(
            shishkin_alpha(2f64.powi(-8), 1.0, 8),
            0.016_245_7,
            1e-7
        ));
    }

    #[test]
    fn vulanovic_alpha_values() {
        assert!(close(
            vulanovic_alpha(1e-2, 1.0, 0.4).unwrap(),
            0.363_073_7,
            1e-7
        ));
        assert!(close(
            vulanovic_alpha(2f64.powi(-8), 1.0, 0.4).unwrap(),
            0.379_019,
            1e-6
        ));
        assert!(matches!(
            vulanovic_alpha(0.4, 1.0, 0.4),
            Err(Error::DegenerateMesh { .. })
        ));
    }

    #[test]
    fn bakhvalov_alpha_root_and_degenerate() {
        assert_eq!(bakhvalov_alpha(0.1, 4.0, 0.4).unwrap(), 0.0);
        let alpha = bakhvalov_alpha(1e-2f64, 4.0, 0.4).unwrap();
        assert!(alpha > 0.0 && alpha < 0.4);
        assert!(bakhvalov_tangency(4e-2f64, 0.4, 0.5, alpha).abs() < 1e-13);
        assert!(matches!(
            bakhvalov_alpha(0.2, 4.0, 0.4),
            Err(Error::DegenerateMesh { .. })
        ));
    }

    #[test]
    fn bakhvalov_alpha_tends_to_q() {
        let mut prev = 0.0;
        for k in 1..12 {
            let alpha = bakhvalov_alpha(10f64.powi(-k), 1.0, 0.4).unwrap();
            assert!(alpha > prev && alpha < 0.4);
            prev = alpha;
        }
        assert!(0.4 - prev < 1e-3);
    }

    #[test]
    fn uniform_nodes() {
        let mesh = Mesh::build(&MeshSpec::<f64>::uniform(4)).unwrap();
        assert_eq!(mesh.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn first_nodes_match_hand_values() {
        let eps = 2f64.powi(-8);
        let s = Mesh::build(&MeshSpec::shishkin(eps, 64)).unwrap();
        assert!(close(s.nodes()[1], 4.0 * 0.032_491_3 / 64.0, 1e-8));
        assert!(close(s.nodes()[1], 0.002_030_71, 1e-8));
        let v = Mesh::build(&MeshSpec::vulanovic(eps, 8, 1.0, 0.4)).unwrap();
        assert!(close(v.nodes()[1], eps * 0.125 / 0.275, 1e-15));
        assert!(close(v.nodes()[1], 0.001_775_57, 1e-8));
    }

    #[test]
    fn degenerate_parameters_fall_back_to_uniform() {
        let mesh = Mesh::build(&MeshSpec::bakhvalov(0.1, 8, 4.0, 0.4)).unwrap();
        assert!(mesh.is_fallback());
        let uniform = Mesh::build(&MeshSpec::<f64>::uniform(8)).unwrap();
        assert_eq!(mesh.nodes(), uniform.nodes());
        let mesh = Mesh::build(&MeshSpec::vulanovic(0.5, 8, 1.0, 0.4)).unwrap();
        assert!(mesh.is_fallback());
    }

    #[test]
    fn capped_shishkin_is_uniform() {
        let mesh = Mesh::build(&MeshSpec::shishkin(0.25, 8)).unwrap();
        let uniform = Mesh::build(&MeshSpec::<f64>::uniform(8)).unwrap();
        assert_eq!(mesh.nodes(), uniform.nodes());
        assert!(!mesh.is_fallback());
    }

    #[test]
    fn layer_fraction_counts_endpoints() {
        let eps = 2f64.powi(-8);
        let s8 = Mesh::build(&MeshSpec::shishkin(eps, 8)).unwrap();
        assert_eq!(s8.layer_fraction(eps), 25.0);
        let s64 = Mesh::build(&MeshSpec::shishkin(eps, 64)).unwrap();
        assert_eq!(s64.layer_fraction(eps), 6.25);
        let v8 = Mesh::build(&MeshSpec::vulanovic(eps, 8, 1.0, 0.4)).unwrap();
        assert_eq!(v8.layer_fraction(eps), 50.0);
        let u8 = Mesh::build(&MeshSpec::<f64>::uniform(8)).unwrap();
        assert_eq!(u8.layer_fraction(eps), 25.0);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(Mesh::build(&MeshSpec::<f64>::uniform(1)).is_err());
        assert!(Mesh::build(&MeshSpec::shishkin(0.0, 8)).is_err());
        assert!(Mesh::build(&MeshSpec::bakhvalov(0.01, 8, 1.0, 0.5)).is_err());
        assert!(Mesh::build(&MeshSpec::shishkin(0.01, 8).with_gamma0(0.0)).is_err());
        assert!(Mesh::from_nodes(vec![0.0, 0.6, 0.5, 1.0]).is_err());
    }

    #[test]
    fn one_sided_meshes_end_at_one() {
        for spec in [
            MeshSpec::shishkin(1e-3, 32),
            MeshSpec::bakhvalov(1e-3, 32, 2.0, 0.4),
            MeshSpec::vulanovic(1e-3, 32, 2.0, 0.4),
        ] {
            let spec = spec.with_layer_sides(LayerSides::LeftOnly);
            let mesh = Mesh::build(&spec).unwrap();
            let g = mesh.generator();
            assert!(close(g.eval(1.0), 1.0, 1e-10), "{spec}");
            assert!(mesh.nodes()[1] < 1e-3);
            assert!(mesh.nodes()[31] < 0.99);
        }
    }

    #[test]
    fn listing_round_trips() {
        let mesh = Mesh::build(&MeshSpec::bakhvalov(1e-2, 16, 4.0, 0.4)).unwrap();
        let text = mesh.to_listing();
        assert!(text.starts_with("# bakhvalov 16 "));
        assert_eq!(parse_listing(&text).unwrap(), mesh.nodes());
    }

    #[test]
    fn works_in_single_precision() {
        let mesh = Mesh::build(&MeshSpec::<f32>::bakhvalov(1e-2, 64, 4.0, 0.4)).unwrap();
        assert_eq!(mesh.n(), 64);
        assert!(mesh.nodes().windows(2).all(|w| w[0] < w[1]));
    }
}
