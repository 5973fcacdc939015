//! Gross-Pitaevskii and Thomas-Fermi ground states.
//!
//! The functional is
//! `E[phi] = int (mu |grad phi|^2 + V phi^2 + g phi^4)` with
//! `int phi^2 = N`. In 3D `g = 4 pi mu a`; in 2D the coupling is
//! `4 pi mu / |ln(rho_bar a^2)|` with `rho_bar = (1/N) int phi^4`, refreshed
//! between inner solves until it is self-consistent.
//!
//! Minimization is a backward-Euler gradient flow,
//! `(W + dt H[phi_k]) phi_{k+1} = W phi_k`, followed by `|.|` and
//! renormalization. Steps that raise the energy (or, within rounding of
//! the minimum, the residual) are rejected and `dt` is halved; accepted
//! steps grow `dt` by 1.5 up to `1e3 / mu_c`.

mod radial;
mod scan;
mod tensor;
mod tf;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{require_nonnegative, require_positive, Error, Result};
use crate::exec::Exec;
use crate::potentials::{TrapKind, TrapPotential, Walls};
use crate::scattering::Dimension;
use crate::units::{Convention, Units};

pub use radial::RadialGrid;
pub use scan::{gp_limit_scan, ScanRow, ScanTable};
pub use tensor::{Axis, TensorGrid};
pub use tf::{tf_closed_form, tf_minimize, tf_minimize_on, TfClosedForm};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    /// `g = 4 pi mu a` (3D).
    #[default]
    Fixed3d,
    /// `g = 4 pi mu / |ln(rho_bar a^2)|` (2D).
    Log2d,
    /// Gradient term dropped.
    ThomasFermi,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridGeometry {
    /// Radial for radial traps, tensor otherwise.
    #[default]
    Auto,
    Radial,
    Tensor,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub geometry: GridGeometry,
    /// Radial cells, or intervals per axis on tensor grids.
    pub points: Option<usize>,
    /// Radius (radial) or half-width (harmonic tensor grids).
    pub extent: Option<f64>,
}

/// Default residual tolerance and iteration cap.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;

#[derive(Clone, Debug)]
pub struct GpProblem {
    pub dimension: Dimension,
    pub trap: TrapPotential,
    pub n: f64,
    pub a: f64,
    pub units: Units,
    pub mode: CouplingMode,
    pub grid: GridSpec,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub exec: Exec,
}

impl GpProblem {
    pub fn new(dimension: Dimension, trap: TrapPotential, n: f64, a: f64) -> Result<Self> {
        let p = GpProblem {
            dimension,
            trap,
            n,
            a,
            units: Units::default(),
            mode: match dimension {
                Dimension::Three => CouplingMode::Fixed3d,
                Dimension::Two => CouplingMode::Log2d,
            },
            grid: GridSpec::default(),
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            exec: Exec::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.units.require(Convention::Dilute)?;
        require_positive("N", self.n)?;
        if self.a < 0.0 {
            return Err(Error::invalid("a", "negative coupling is not supported"));
        }
        require_nonnegative("a", self.a)?;
        if !self.trap.is_confining() {
            return Err(Error::invalid("trap", "must be confining"));
        }
        if self.mode == CouplingMode::Fixed3d && self.dimension != Dimension::Three {
            return Err(Error::invalid("mode", "fixed 3D coupling needs dimension 3"));
        }
        if self.mode == CouplingMode::Log2d && self.dimension != Dimension::Two {
            return Err(Error::invalid("mode", "log coupling needs dimension 2"));
        }
        if let TrapKind::Harmonic { omega } = self.trap.kind() {
            if omega.len() != 1 && omega.len() != self.dimension.value() {
                return Err(Error::invalid("trap", "one frequency or one per axis"));
            }
        }
        Ok(())
    }

    /// Interaction coefficient for `phi` (frozen coupling in 3D).
    pub fn coupling(&self, mesh: &Mesh, phi: &[f64]) -> Result<f64> {
        match (self.mode, self.dimension) {
            (CouplingMode::Log2d, _) | (CouplingMode::ThomasFermi, Dimension::Two) => gp_2d_coupling(self, mesh, phi),
            _ => Ok(4.0 * PI * self.units.mu() * self.a),
        }
    }

    /// Rough TF chemical potential, used only to size the grid.
    fn tf_scale(&self) -> Option<(f64, Vec<f64>)> {
        let d = self.dimension.value();
        let w = self.trap.frequencies(d)?;
        let mu = self.units.mu();
        let ks: Vec<f64> = w.iter().map(|o| o * o / (4.0 * mu)).collect();
        let lengths = self.trap.oscillator_lengths(d, &self.units)?;
        let g = match self.dimension {
            Dimension::Three => 4.0 * PI * mu * self.a,
            Dimension::Two => {
                let l2: f64 = lengths.iter().product();
                let rho = self.n / (PI * l2);
                let y = rho * self.a * self.a;
                if self.a > 0.0 && y < 1.0 {
                    4.0 * PI * mu / y.ln().abs()
                } else {
                    0.0
                }
            }
        };
        let sqrt_k: f64 = ks.iter().map(|k| k.sqrt()).product();
        let mu_c = match self.dimension {
            Dimension::Three => (15.0 * g * self.n * sqrt_k / (4.0 * PI)).powf(0.4),
            Dimension::Two => 2.0 * (g * self.n * sqrt_k / PI).sqrt(),
        };
        let radii = ks.iter().map(|k| (mu_c / k).sqrt()).collect();
        Some((mu_c, radii))
    }

    fn use_radial(&self) -> Result<bool> {
        match self.grid.geometry {
            GridGeometry::Radial => {
                if !self.trap.is_radial() {
                    return Err(Error::invalid("grid", "radial grid needs a radial trap"));
                }
                Ok(true)
            }
            GridGeometry::Tensor => {
                if matches!(self.trap.kind(), TrapKind::TabulatedRadial { .. }) {
                    return Err(Error::invalid("grid", "tabulated traps use the radial grid"));
                }
                Ok(false)
            }
            GridGeometry::Auto => Ok(self.trap.is_radial()),
        }
    }

    /// Build the discretization.
    pub fn discretize(&self) -> Result<Mesh> {
        self.validate()?;
        let d = self.dimension.value();
        let radial = self.use_radial()?;
        let lengths = self.trap.oscillator_lengths(d, &self.units);
        let tf = self.tf_scale();
        let harmonic_extent = |i: usize, tails: f64| -> f64 {
            let l = lengths.as_ref().map(|v| v[i]).unwrap_or(1.0);
            let rtf = tf.as_ref().map(|t| t.1[i]).unwrap_or(0.0);
            (tails * l).max(1.2 * rtf + 3.0 * l)
        };
        let mesh = if radial {
            let (radius, default_points) = match self.trap.kind() {
                TrapKind::TabulatedRadial { r, .. } => (*r.last().unwrap_or(&1.0), 800),
                _ => {
                    let radius = self.grid.extent.unwrap_or_else(|| harmonic_extent(0, 8.0));
                    let l = lengths.as_ref().map(|v| v[0]).unwrap_or(radius);
                    (radius, ((radius / (l / 40.0)).ceil() as usize).max(800))
                }
            };
            let cells = self.grid.points.unwrap_or(default_points);
            let grid = RadialGrid::new(d, radius, cells)?;
            let v = grid.r.iter().map(|&r| self.trap.radial_value(r, &self.units)).collect();
            Mesh {
                kind: MeshKind::Radial(grid),
                v,
            }
        } else {
            let axes: Vec<Axis> = match self.trap.kind() {
                TrapKind::Box { side, walls } => {
                    let m = self.grid.points.unwrap_or(if d == 3 { 32 } else { 128 });
                    (0..d)
                        .map(|_| match walls {
                            Walls::Dirichlet => Axis::dirichlet(0.0, *side, m),
                            Walls::Neumann => Axis::neumann(0.0, *side, m),
                        })
                        .collect()
                }
                TrapKind::Harmonic { .. } => {
                    let ls = lengths.as_ref().expect("harmonic traps have oscillator lengths");
                    let mut axes = Vec::with_capacity(d);
                    for (i, &l) in ls.iter().enumerate() {
                        let x = self.grid.extent.unwrap_or_else(|| harmonic_extent(i, 6.0));
                        // Intervals per axis; the default spacing is l / 4.5.
                        let m = self
                            .grid
                            .points
                            .unwrap_or_else(|| ((9.0 * x / l).ceil() as usize).max(if d == 3 { 24 } else { 64 }));
                        let h = 2.0 * x / m as f64;
                        if h > l / 4.0 {
                            return Err(Error::invalid(
                                "grid",
                                format!("spacing {h} does not resolve the oscillator length {l} on axis {i}"),
                            ));
                        }
                        axes.push(Axis::dirichlet(-x, x, m));
                    }
                    axes
                }
                TrapKind::TabulatedRadial { .. } => unreachable!("tabulated traps are radial"),
            };
            let grid = TensorGrid::new(axes, self.exec)?;
            let v = (0..grid.len())
                .map(|i| self.trap.value(&grid.point(i), &self.units))
                .collect();
            Mesh {
                kind: MeshKind::Tensor(grid),
                v,
            }
        };
        if let (MeshKind::Radial(_), Some(ls)) = (&mesh.kind, &lengths) {
            if mesh.max_spacing() > ls[0] / 4.0 {
                return Err(Error::invalid(
                    "grid",
                    format!("spacing {} does not resolve the oscillator length {}", mesh.max_spacing(), ls[0]),
                ));
            }
        }
        if mesh.v.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("trap", "potential is not finite on the grid"));
        }
        Ok(mesh)
    }
}

#[derive(Clone, Debug)]
pub enum MeshKind {
    Radial(RadialGrid),
    Tensor(TensorGrid),
}

/// A discretization with the trap sampled at its nodes.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub kind: MeshKind,
    pub v: Vec<f64>,
}

impl Mesh {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn weight(&self, i: usize) -> f64 {
        match &self.kind {
            MeshKind::Radial(g) => g.w[i],
            MeshKind::Tensor(g) => g.w,
        }
    }

    pub fn max_spacing(&self) -> f64 {
        match &self.kind {
            MeshKind::Radial(g) => g.h,
            MeshKind::Tensor(g) => g.axes.iter().map(|a| a.h).fold(0.0, f64::max),
        }
    }

    /// Node coordinates: `[r]` on radial grids, Cartesian otherwise.
    pub fn point(&self, i: usize) -> Vec<f64> {
        match &self.kind {
            MeshKind::Radial(g) => vec![g.r[i]],
            MeshKind::Tensor(g) => g.point(i),
        }
    }

    pub fn coordinate_names(&self) -> &'static [&'static str] {
        match &self.kind {
            MeshKind::Radial(_) => &["r"],
            MeshKind::Tensor(g) if g.dim() == 2 => &["x", "y"],
            MeshKind::Tensor(_) => &["x", "y", "z"],
        }
    }

    fn kinetic_apply(&self, x: &[f64], out: &mut [f64]) {
        match &self.kind {
            MeshKind::Radial(g) => g.kinetic_apply(x, out),
            MeshKind::Tensor(g) => g.kinetic_apply(x, out),
        }
    }

    fn kinetic_energy(&self, x: &[f64]) -> f64 {
        match &self.kind {
            MeshKind::Radial(g) => g.kinetic_energy(x),
            MeshKind::Tensor(g) => g.kinetic_energy(x),
        }
    }

    fn solve_shifted(&self, mu: f64, dt: f64, q: &[f64], b: &[f64], x: &mut [f64]) -> Result<()> {
        match &self.kind {
            MeshKind::Radial(g) => g.solve_shifted(mu, dt, q, b, x),
            MeshKind::Tensor(g) => g.solve_shifted(mu, dt, q, b, x),
        }
    }

    /// `sum_i w_i f(i)` in a fixed order.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        (0..self.len()).map(|i| self.weight(i) * f(i)).sum()
    }

    pub fn norm(&self, phi: &[f64]) -> f64 {
        self.integrate(|i| phi[i] * phi[i])
    }

    fn normalize(&self, phi: &mut [f64], n: f64) {
        let s = (n / self.norm(phi)).sqrt();
        phi.iter_mut().for_each(|p| *p = p.abs() * s);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyParts {
    pub kinetic: f64,
    pub trap: f64,
    pub interaction: f64,
    /// Kinetic + trap + interaction; without the kinetic part in TF mode.
    pub total: f64,
    pub coupling: f64,
    pub rho_bar: f64,
}

fn parts(problem: &GpProblem, mesh: &Mesh, phi: &[f64], g: f64) -> EnergyParts {
    let kinetic = problem.units.mu() * mesh.kinetic_energy(phi);
    let trap = mesh.integrate(|i| mesh.v[i] * phi[i] * phi[i]);
    let quartic = mesh.integrate(|i| phi[i].powi(4));
    let interaction = g * quartic;
    let total = match problem.mode {
        CouplingMode::ThomasFermi => trap + interaction,
        _ => kinetic + trap + interaction,
    };
    EnergyParts {
        kinetic,
        trap,
        interaction,
        total,
        coupling: g,
        rho_bar: quartic / problem.n,
    }
}

/// Energy components of `phi`, which must already carry norm `N`.
pub fn gp_energy(problem: &GpProblem, mesh: &Mesh, phi: &[f64]) -> Result<EnergyParts> {
    if phi.len() != mesh.len() || phi.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("phi", "must be finite and live on the problem grid"));
    }
    let norm = mesh.norm(phi);
    if (norm - problem.n).abs() > 1e-6 * problem.n {
        return Err(Error::Normalization { integral: norm });
    }
    let g = problem.coupling(mesh, phi)?;
    Ok(parts(problem, mesh, phi, g))
}

/// `4 pi mu / |ln(rho_bar a^2)|` with `rho_bar = (1/N) int phi^4`.
pub fn gp_2d_coupling(problem: &GpProblem, mesh: &Mesh, phi: &[f64]) -> Result<f64> {
    if problem.dimension != Dimension::Two {
        return Err(Error::invalid("dimension", "the log coupling is two-dimensional"));
    }
    require_positive("a", problem.a)?;
    let rho_bar = mesh.integrate(|i| phi[i].powi(4)) / problem.n;
    let y = rho_bar * problem.a * problem.a;
    if y >= 1.0 {
        return Err(Error::OutOfRange(format!("rho_bar a^2 = {y} must be below 1")));
    }
    Ok(4.0 * PI * problem.units.mu() / y.ln().abs())
}

#[derive(Clone, Debug, Serialize)]
pub struct GpSolution {
    #[serde(skip)]
    pub phi: Vec<f64>,
    pub energy_total: f64,
    pub energy_kinetic: f64,
    pub energy_trap: f64,
    pub energy_interaction: f64,
    pub energy_per_particle: f64,
    pub chemical_potential: f64,
    pub coupling: f64,
    pub rho_bar: f64,
    pub iterations: usize,
    /// `||H phi - mu_c W phi|| / (||mu K phi|| + ||W (V + 2 g phi^2) phi||)`
    /// in the `W^-1` norm.
    pub residual: f64,
    /// `2 E_kin - 2 E_trap + d E_int` over the total, for harmonic traps.
    pub virial: Option<f64>,
    pub converged: bool,
    /// Coupling after each outer refresh (2D log mode).
    pub coupling_history: Vec<f64>,
}

impl GpSolution {
    /// `|phi|^2` at each node.
    pub fn density(&self) -> Vec<f64> {
        self.phi.iter().map(|p| p * p).collect()
    }
}

fn residual(problem: &GpProblem, mesh: &Mesh, phi: &[f64], g: f64) -> (f64, f64) {
    let mu = problem.units.mu();
    let mut kx = vec![0.0; phi.len()];
    mesh.kinetic_apply(phi, &mut kx);
    let e = parts(problem, mesh, phi, g);
    let mu_c = (e.kinetic + e.trap + 2.0 * e.interaction) / problem.n;
    let (mut num, mut kin, mut pot) = (0.0, 0.0, 0.0);
    for i in 0..phi.len() {
        let w = mesh.weight(i);
        let local = w * (mesh.v[i] + 2.0 * g * phi[i] * phi[i]) * phi[i];
        let r = mu * kx[i] + local - mu_c * w * phi[i];
        num += r * r / w;
        kin += (mu * kx[i]).powi(2) / w;
        pot += local * local / w;
    }
    let scale = kin.sqrt() + pot.sqrt();
    let res = if num == 0.0 { 0.0 } else { num.sqrt() / scale.max(f64::MIN_POSITIVE) };
    (res, mu_c)
}

fn initial_guess(problem: &GpProblem, mesh: &Mesh) -> Vec<f64> {
    let d = problem.dimension.value();
    let s = problem
        .trap
        .linear_ground_energy(d, &problem.units)
        .filter(|s| *s > 0.0)
        .unwrap_or(1.0);
    let mut phi: Vec<f64> = mesh.v.iter().map(|v| (-v / (2.0 * s)).exp()).collect();
    mesh.normalize(&mut phi, problem.n);
    phi
}

struct Flow {
    phi: Vec<f64>,
    iterations: usize,
    residual: f64,
    converged: bool,
}

/// Gradient flow at frozen coupling `g`.
fn flow(problem: &GpProblem, mesh: &Mesh, mut phi: Vec<f64>, g: f64) -> Result<Flow> {
    let mu = problem.units.mu();
    let n = mesh.len();
    mesh.normalize(&mut phi, problem.n);
    let mut energy = parts(problem, mesh, &phi, g).total;
    let mut dt = 1e-2;
    let mut q = vec![0.0; n];
    let mut b = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut res = f64::INFINITY;
    for it in 0..problem.max_iterations {
        let (r, mu_c) = residual(problem, mesh, &phi, g);
        res = r;
        // Past dt ~ 1/mu_c the step is already inverse iteration; larger dt
        // only worsens the conditioning of the shifted system.
        let dt_max = 1e3 / mu_c.abs().max(1e-300);
        if res < problem.tolerance {
            return Ok(Flow {
                phi,
                iterations: it,
                residual: res,
                converged: true,
            });
        }
        loop {
            for i in 0..n {
                q[i] = mesh.v[i] + 2.0 * g * phi[i] * phi[i];
                b[i] = mesh.weight(i) * phi[i];
            }
            next.copy_from_slice(&phi);
            mesh.solve_shifted(mu, dt, &q, &b, &mut next)?;
            mesh.normalize(&mut next, problem.n);
            let e = parts(problem, mesh, &next, g).total;
            // Near the minimum the energy change is O(res^2) and drowns in
            // rounding; there the residual decides.
            let descent = e <= energy + 1e-14 * energy.abs()
                || (e <= energy + 1e-12 * energy.abs() && residual(problem, mesh, &next, g).0 < res);
            if descent {
                energy = e;
                std::mem::swap(&mut phi, &mut next);
                dt = (dt * 1.5).min(dt_max);
                break;
            }
            dt *= 0.5;
            if dt < 1e-14 {
                // No descent step exists at this precision.
                return Ok(Flow {
                    phi,
                    iterations: it,
                    residual: res,
                    converged: res < problem.tolerance,
                });
            }
        }
    }
    Ok(Flow {
        phi,
        iterations: problem.max_iterations,
        residual: res,
        converged: false,
    })
}

fn finish(problem: &GpProblem, mesh: &Mesh, phi: Vec<f64>, g: f64, f: &Flow, history: Vec<f64>) -> GpSolution {
    let e = parts(problem, mesh, &phi, g);
    let (res, mu_c) = residual(problem, mesh, &phi, g);
    let d = problem.dimension.value() as f64;
    let virial = matches!(problem.trap.kind(), TrapKind::Harmonic { .. })
        .then(|| (2.0 * e.kinetic - 2.0 * e.trap + d * e.interaction) / e.total);
    GpSolution {
        phi,
        energy_total: e.total,
        energy_kinetic: e.kinetic,
        energy_trap: e.trap,
        energy_interaction: e.interaction,
        energy_per_particle: e.total / problem.n,
        chemical_potential: mu_c,
        coupling: g,
        rho_bar: e.rho_bar,
        iterations: f.iterations,
        residual: res.min(f.residual.max(res)),
        virial,
        converged: f.converged,
        coupling_history: history,
    }
}

/// Minimize the GP functional. Non-convergence is reported through
/// `converged = false` with the best profile found.
pub fn gp_minimize(problem: &GpProblem) -> Result<GpSolution> {
    let mesh = problem.discretize()?;
    gp_minimize_on(problem, &mesh)
}

/// As [`gp_minimize`] on a prebuilt mesh.
pub fn gp_minimize_on(problem: &GpProblem, mesh: &Mesh) -> Result<GpSolution> {
    problem.validate()?;
    match problem.mode {
        CouplingMode::ThomasFermi => return tf::tf_minimize_on(problem, mesh),
        CouplingMode::Fixed3d => {
            let g = 4.0 * PI * problem.units.mu() * problem.a;
            let start = start_profile(problem, mesh, g);
            let f = flow(problem, mesh, start, g)?;
            if !f.converged {
                log::warn!("GP flow stopped at residual {:e} after {} iterations", f.residual, f.iterations);
            }
            let phi = f.phi.clone();
            return Ok(finish(problem, mesh, phi, g, &f, Vec::new()));
        }
        CouplingMode::Log2d => {}
    }
    require_positive("a", problem.a)?;
    let mut phi = initial_guess(problem, mesh);
    let mut g = gp_2d_coupling(problem, mesh, &phi)?;
    let mut history = vec![g];
    let mut iterations = 0;
    for _ in 0..200 {
        let f = flow(problem, mesh, phi, g)?;
        iterations += f.iterations;
        let g_new = gp_2d_coupling(problem, mesh, &f.phi)?;
        history.push(g_new);
        phi = f.phi.clone();
        if (g_new - g).abs() <= 1e-10 * g {
            let total = Flow { iterations, ..f };
            return Ok(finish(problem, mesh, phi, g, &total, history));
        }
        g = g_new;
    }
    log::warn!("2D coupling did not settle after 200 refreshes");
    let f = flow(problem, mesh, phi, g)?;
    let phi = f.phi.clone();
    let mut sol = finish(problem, mesh, phi, g, &f, history);
    sol.converged = false;
    Ok(sol)
}

/// Initial profile: the TF density blended with a trap Gaussian.
fn start_profile(problem: &GpProblem, mesh: &Mesh, g: f64) -> Vec<f64> {
    let gauss = initial_guess(problem, mesh);
    if g <= 0.0 {
        return gauss;
    }
    match tf::tf_density(problem, mesh, g) {
        Ok((rho, _)) => {
            let mut phi: Vec<f64> = rho.iter().zip(&gauss).map(|(r, p)| (r + 1e-3 * p * p).sqrt()).collect();
            mesh.normalize(&mut phi, problem.n);
            phi
        }
        Err(_) => gauss,
    }
}
