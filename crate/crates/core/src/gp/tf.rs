//! Thomas-Fermi limit: `rho = max(0, (mu_c - V) / 2g)` normalized to `N`.

use std::f64::consts::PI;

use serde::Serialize;

use super::{parts, CouplingMode, GpProblem, GpSolution, Mesh};
use crate::error::{Error, Result};
use crate::potentials::TrapKind;
use crate::scattering::Dimension;

/// Density on the mesh and the chemical potential for coupling `g`.
pub(crate) fn tf_density(problem: &GpProblem, mesh: &Mesh, g: f64) -> Result<(Vec<f64>, f64)> {
    if !(g > 0.0) {
        return Err(Error::Degenerate("Thomas-Fermi needs a positive coupling"));
    }
    let count = |mu_c: f64| mesh.integrate(|i| (mu_c - mesh.v[i]).max(0.0)) / (2.0 * g);
    let mut lo = mesh.v.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut step = 1.0_f64.max(lo.abs());
    let mut hi = lo + step;
    while count(hi) < problem.n {
        lo = hi;
        step *= 2.0;
        hi += step;
        if !hi.is_finite() {
            return Err(Error::Infeasible("no chemical potential reaches N".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count(mid) < problem.n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu_c = hi;
    let mut rho: Vec<f64> = mesh.v.iter().map(|v| (mu_c - v).max(0.0) / (2.0 * g)).collect();
    let s = problem.n / mesh.integrate(|i| rho[i]);
    rho.iter_mut().for_each(|r| *r *= s);
    Ok((rho, mu_c))
}

/// Analytic TF chemical potential and energy per particle for a harmonic trap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TfClosedForm {
    pub chemical_potential: f64,
    pub energy_per_particle: f64,
}

/// Closed form at coupling `g` for a harmonic trap `sum_i omega_i^2 x_i^2 / (4 mu)`.
pub fn tf_closed_form(problem: &GpProblem, g: f64) -> Result<TfClosedForm> {
    if !matches!(problem.trap.kind(), TrapKind::Harmonic { .. }) {
        return Err(Error::invalid("trap", "closed form needs a harmonic trap"));
    }
    if !(g > 0.0) {
        return Err(Error::Degenerate("Thomas-Fermi needs a positive coupling"));
    }
    let d = problem.dimension.value();
    let mu = problem.units.mu();
    let omega = problem.trap.frequencies(d).expect("harmonic");
    let sqrt_k: f64 = omega.iter().map(|w| w / (2.0 * mu.sqrt())).product();
    let n = problem.n;
    Ok(match problem.dimension {
        Dimension::Three => {
            let mu_c = (15.0 * g * n * sqrt_k / (4.0 * PI)).powf(0.4);
            TfClosedForm {
                chemical_potential: mu_c,
                energy_per_particle: 5.0 / 7.0 * mu_c,
            }
        }
        Dimension::Two => {
            let mu_c = 2.0 * (g * n * sqrt_k / PI).sqrt();
            TfClosedForm {
                chemical_potential: mu_c,
                energy_per_particle: 2.0 / 3.0 * mu_c,
            }
        }
    })
}

/// Minimize the functional without its gradient term.
pub fn tf_minimize(problem: &GpProblem) -> Result<GpSolution> {
    let mesh = problem.discretize()?;
    tf_minimize_on(problem, &mesh)
}

/// As [`tf_minimize`] on a prebuilt mesh.
pub fn tf_minimize_on(problem: &GpProblem, mesh: &Mesh) -> Result<GpSolution> {
    let mut p = problem.clone();
    p.mode = CouplingMode::ThomasFermi;
    if p.a == 0.0 {
        return Err(Error::Degenerate("Thomas-Fermi with a = 0 has no minimizer"));
    }
    let (rho, mu_c, g, history, iterations) = match p.dimension {
        Dimension::Three => {
            let g = 4.0 * PI * p.units.mu() * p.a;
            let (rho, mu_c) = tf_density(&p, mesh, g)?;
            (rho, mu_c, g, Vec::new(), 1)
        }
        Dimension::Two => {
            // Self-consistent rho_bar, starting from the uniform-disc guess.
            let mut g = {
                let (rho, _) = tf_density(&p, mesh, 1.0)?;
                let phi: Vec<f64> = rho.iter().map(|r| r.sqrt()).collect();
                super::gp_2d_coupling(&p, mesh, &phi)?
            };
            let mut history = vec![g];
            let mut k = 0;
            loop {
                k += 1;
                let (rho, mu_c) = tf_density(&p, mesh, g)?;
                let phi: Vec<f64> = rho.iter().map(|r| r.sqrt()).collect();
                let g_new = super::gp_2d_coupling(&p, mesh, &phi)?;
                history.push(g_new);
                if (g_new - g).abs() <= 1e-12 * g || k >= 500 {
                    break (rho, mu_c, g, history, k);
                }
                g = g_new;
            }
        }
    };
    let phi: Vec<f64> = rho.iter().map(|r| r.sqrt()).collect();
    let e = parts(&p, mesh, &phi, g);
    Ok(GpSolution {
        phi,
        energy_total: e.total,
        energy_kinetic: e.kinetic,
        energy_trap: e.trap,
        energy_interaction: e.interaction,
        energy_per_particle: e.total / p.n,
        chemical_potential: mu_c,
        coupling: g,
        rho_bar: e.rho_bar,
        iterations,
        residual: 0.0,
        virial: None,
        converged: true,
        coupling_history: history,
    })
}
