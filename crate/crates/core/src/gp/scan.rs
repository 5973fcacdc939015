//! GP solutions at fixed `Na` for a list of particle numbers.

use serde::Serialize;

use super::{gp_minimize_on, tf, GpProblem, Mesh};
use crate::error::{require_nonnegative, Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub n: f64,
    pub a: f64,
    pub energy_per_particle: f64,
    pub chemical_potential: f64,
    pub residual: f64,
    pub converged: bool,
    /// `int |rho/N - rho_TF/N|`; absent when `Na = 0`.
    pub tf_l1: Option<f64>,
    /// `|phi|^2 / N` on the mesh nodes.
    #[serde(skip)]
    pub density: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanTable {
    pub na: f64,
    pub rows: Vec<ScanRow>,
    /// Node coordinates shared by every row.
    #[serde(skip)]
    pub points: Vec<Vec<f64>>,
}

impl ScanTable {
    /// Largest relative spread of `E/N` over the rows.
    pub fn energy_spread(&self) -> f64 {
        let e: Vec<f64> = self.rows.iter().map(|r| r.energy_per_particle).collect();
        let max = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = e.iter().cloned().fold(f64::INFINITY, f64::min);
        (max - min) / max.abs().max(f64::MIN_POSITIVE)
    }
}

/// Solve with `a = Na / N` for each `N` in `ns` (strictly increasing).
///
/// `template` supplies the trap, dimension, units and grid; its `n` and `a`
/// are replaced. Rows are computed with `template.exec`.
pub fn gp_limit_scan(template: &GpProblem, na: f64, ns: &[f64]) -> Result<ScanTable> {
    require_nonnegative("Na", na)?;
    if ns.is_empty() || ns.windows(2).any(|w| !(w[1] > w[0])) || ns.iter().any(|n| !(*n > 0.0)) {
        return Err(Error::invalid("N_list", "must be positive and strictly increasing"));
    }
    let problem = |n: f64| {
        let mut p = template.clone();
        p.n = n;
        p.a = na / n;
        p
    };
    // The grid depends on N only through Na, so one mesh serves every row.
    let mesh = problem(ns[0]).discretize()?;
    let rows = template.exec.map(ns, |&n| row(&problem(n), &mesh));
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ScanTable {
        na,
        rows,
        points: (0..mesh.len()).map(|i| mesh.point(i)).collect(),
    })
}

fn row(p: &GpProblem, mesh: &Mesh) -> Result<ScanRow> {
    let s = gp_minimize_on(p, mesh)?;
    let density: Vec<f64> = s.phi.iter().map(|x| x * x / p.n).collect();
    let tf_l1 = if p.a > 0.0 {
        let t = tf::tf_minimize_on(p, mesh)?;
        Some(mesh.integrate(|i| (density[i] - t.phi[i] * t.phi[i] / p.n).abs()))
    } else {
        None
    };
    Ok(ScanRow {
        n: p.n,
        a: p.a,
        energy_per_particle: s.energy_per_particle,
        chemical_potential: s.chemical_potential,
        residual: s.residual,
        converged: s.converged,
        tf_l1,
        density,
    })
}
