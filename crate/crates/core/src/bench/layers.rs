use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::render::format_float;
use crate::mesh::{Mesh, MeshFamily, MeshSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerCell {
    pub mesh: MeshFamily,
    pub a: f64,
    pub q: f64,
    pub gamma0: f64,
    /// 1 for the coarse sizes, 2 for the fine sizes.
    pub step: usize,
    pub n: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerTable {
    pub eps: f64,
    pub cells: Vec<LayerCell>,
}

impl LayerTable {
    pub fn get(&self, mesh: MeshFamily, step: usize, n: usize) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.mesh == mesh && c.step == step && c.n == n)
            .map(|c| c.percent)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let mut families: Vec<MeshFamily> = Vec::new();
        for c in &self.cells {
            if !families.contains(&c.mesh) {
                families.push(c.mesh);
            }
        }
        let _ = writeln!(
            out,
            "Points in [0, eps] and [1-eps, 1] (%), eps={:e}\n",
            self.eps
        );
        for family in families {
            for step in [1, 2] {
                let row: Vec<&LayerCell> = self
                    .cells
                    .iter()
                    .filter(|c| c.mesh == family && c.step == step)
                    .collect();
                if row.is_empty() {
                    continue;
                }
                let sizes: Vec<String> = row.iter().map(|c| c.n.to_string()).collect();
                let vals: Vec<String> = row.iter().map(|c| format!("{:.2}", c.percent)).collect();
                let label = if step == 1 { "N" } else { "n" };
                let name = match family {
                    MeshFamily::Shishkin => format!("{family} (gamma0={})", row[0].gamma0),
                    MeshFamily::Uniform => family.to_string(),
                    _ => format!("{family} (a={}, q={})", row[0].a, row[0].q),
                };
                let _ = writeln!(out, "| {name} | {label} | {} |", sizes.join(" | "));
                let _ = writeln!(out, "| | Step {step} | {} |", vals.join(" | "));
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record(["mesh", "step", "n", "eps", "a", "q", "gamma0", "percent"]);
        for c in &self.cells {
            let _ = w.write_record([
                c.mesh.to_string(),
                c.step.to_string(),
                c.n.to_string(),
                format_float(self.eps),
                format_float(c.a),
                format_float(c.q),
                format_float(c.gamma0),
                format_float(c.percent),
            ]);
        }
        String::from_utf8(w.into_inner().unwrap_or_default()).expect("csv output is utf-8")
    }
}

/// Share of mesh points inside the layers for every spec at the coarse sizes
/// (step 1) and fine sizes (step 2). The `eps` and `n` of the specs are
/// overridden.
pub fn layer_report(
    eps: f64,
    specs: &[MeshSpec<f64>],
    coarse: &[usize],
    fine: &[usize],
) -> Result<LayerTable> {
    if specs.is_empty() || (coarse.is_empty() && fine.is_empty()) {
        return Err(Error::Validation(
            "layer report needs families and sizes".into(),
        ));
    }
    let mut cells = Vec::new();
    for spec in specs {
        for (step, sizes) in [(1, coarse), (2, fine)] {
            for &n in sizes {
                let mesh = Mesh::build(&spec.with_eps(eps).with_n(n))?;
                cells.push(LayerCell {
                    mesh: spec.family,
                    a: spec.a,
                    q: spec.q,
                    gamma0: spec.gamma0,
                    step,
                    n,
                    percent: mesh.layer_fraction(eps),
                });
            }
        }
    }
    Ok(LayerTable { eps, cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_counts_endpoints_only() {
        let spec = MeshSpec::<f64>::new(MeshFamily::Uniform, 0.1, 0);
        let t = layer_report(2f64.powi(-8), &[spec], &[8], &[]).unwrap();
        assert_eq!(t.get(MeshFamily::Uniform, 1, 8), Some(25.0));
        assert!(t.to_markdown().contains("25.00"));
        assert!(t.to_csv().starts_with("mesh,step,n,"));
    }

    #[test]
    fn empty_request_rejected() {
        assert!(layer_report(0.1, &[], &[8], &[]).is_err());
    }
}
