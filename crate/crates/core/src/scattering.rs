//! Zero-energy two-body scattering.
//!
//! In three dimensions the reduced radial function solves
//! `-2 mu u'' + v u = 0` with `u(0) = 0`; outside the potential
//! `u = c (r - a)`. In two dimensions the radial function solves
//! `-2 mu (psi'' + psi'/r) + v psi = 0` and behaves like `c ln(r/a)`.
//!
//! The equation is integrated outward with fixed-step classical RK4 on a grid
//! aligned with the discontinuities of `v`. The step is halved until the
//! extracted scattering length stops changing. Power-law tails are truncated
//! where the Born estimate of the discarded tail falls below `1e-10 a`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::potentials::{PairPotential, PotentialKind};
use crate::quadrature::{integrate, Tolerance};
use crate::units::{Convention, Units};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Dimension {
    Two,
    Three,
}

impl Dimension {
    pub fn value(self) -> usize {
        match self {
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }

    /// Area of the unit sphere in this dimension.
    pub fn surface(self) -> f64 {
        match self {
            Dimension::Two => 2.0 * PI,
            Dimension::Three => 4.0 * PI,
        }
    }
}

impl TryFrom<u8> for Dimension {
    type Error = Error;
    fn try_from(d: u8) -> Result<Self> {
        match d {
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            _ => Err(Error::invalid("dimension", format!("must be 2 or 3, got {d}"))),
        }
    }
}

impl From<Dimension> for u8 {
    fn from(d: Dimension) -> u8 {
        d.value() as u8
    }
}

/// Relative change of `a` below which step halving stops.
pub const REFINE_TOL: f64 = 1e-10;

/// Relative size of the discarded power-law tail.
pub const TAIL_CUTOFF: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub dimension: Dimension,
    pub r_max: f64,
    pub n_points: usize,
    /// Halve the step until `a` changes by less than this; `None` solves once.
    pub refine_tol: Option<f64>,
    pub max_refinements: usize,
    /// Extra radii that must be grid nodes.
    pub nodes: Vec<f64>,
}

impl SolveOptions {
    pub fn new(dimension: Dimension, r_max: f64, n_points: usize) -> Self {
        SolveOptions {
            dimension,
            r_max,
            n_points,
            refine_tol: Some(REFINE_TOL),
            max_refinements: 10,
            nodes: Vec::new(),
        }
    }

    pub fn fixed(mut self) -> Self {
        self.refine_tol = None;
        self
    }
}

/// Radial profile of the zero-energy solution and the extracted
/// scattering length.
#[derive(Clone, Debug, Serialize)]
pub struct ScatteringSolution {
    pub dimension: Dimension,
    pub grid: Vec<f64>,
    /// `u0(r)` in 3D, `psi(r)` in 2D. Normalized by the start condition:
    /// unit slope at the origin or core edge in 3D, `psi(0) = 1` (or unit
    /// `r psi'` at a core edge) in 2D.
    pub u: Vec<f64>,
    /// `u0'(r)` in 3D, `r psi'(r)` in 2D.
    pub du: Vec<f64>,
    /// Running integral of `2 mu (u' - u/r)^2 + v u^2` (3D only).
    pub energy_integral: Vec<f64>,
    pub a: f64,
    /// Asymptotic slope `c` in `u = c (r - a)` or `psi = c ln(r/a)`.
    pub slope: f64,
    pub fit_window: (f64, f64),
    pub residual: f64,
    /// Effective range used (the truncation radius for power tails).
    pub effective_range: f64,
    pub refinements: usize,
}

/// A potential cut to zero beyond `cut`.
struct Truncated<'a> {
    p: &'a PairPotential,
    cut: f64,
}

impl Truncated<'_> {
    fn v(&self, r: f64) -> f64 {
        if r >= self.cut {
            0.0
        } else {
            self.p.value_outside_core(r)
        }
    }
}

/// Truncation radius for power tails; the range for finite-range potentials.
fn effective_range(p: &PairPotential, units: &Units, dimension: Dimension) -> Result<f64> {
    let PotentialKind::PowerTail {
        core,
        amplitude,
        eps,
        tail_start,
    } = p.kind()
    else {
        return Ok(p.range());
    };
    if *amplitude == 0.0 {
        return Ok(core.range());
    }
    // First pass: cut at a generous multiple of the intrinsic scales.
    let scale = core.range().max(*tail_start);
    let cut0 = 16.0 * scale;
    let trial = Truncated { p, cut: cut0 };
    let opts = SolveOptions::new(dimension, 1.25 * cut0, 2000).fixed();
    let a0 = integrate_profile(&trial, p.hard_core_radius(), units, &opts, cut0)?.a.abs();
    let a0 = if a0 > 0.0 { a0 } else { scale };
    // Born estimate of the tail beyond r_c: amplitude / (2 mu eps r_c^eps).
    let cut = (amplitude / (2.0 * units.mu() * eps * TAIL_CUTOFF * a0)).powf(1.0 / eps);
    let cut = cut.max(cut0);
    if !cut.is_finite() || cut > 1e12 * scale {
        return Err(Error::OutOfRange(format!(
            "power tail decays too slowly to truncate (cut-off radius {cut:e})"
        )));
    }
    Ok(cut)
}

/// Solve the zero-energy equation and extract `a`, halving the step until
/// `a` is converged.
pub fn solve_zero_energy(p: &PairPotential, units: &Units, opts: &SolveOptions) -> Result<ScatteringSolution> {
    units.require(Convention::Dilute)?;
    require_positive("r_max", opts.r_max)?;
    if opts.n_points < 100 {
        return Err(Error::invalid("n_points", "must be at least 100"));
    }
    let range = effective_range(p, units, opts.dimension)?;
    let is_tail = p.range().is_infinite();
    let r_max = if is_tail { opts.r_max.max(1.25 * range) } else { opts.r_max };
    if r_max <= range {
        return Err(Error::GridTooShort { r_max, range });
    }
    let trunc = Truncated { p, cut: range };
    let core = p.hard_core_radius();

    let mut local = opts.clone();
    local.r_max = r_max;
    let mut sol = integrate_profile(&trunc, core, units, &local, range)?;
    let Some(tol) = opts.refine_tol else {
        return Ok(sol);
    };
    for k in 1..=opts.max_refinements {
        local.n_points *= 2;
        let mut finer = integrate_profile(&trunc, core, units, &local, range)?;
        finer.refinements = k;
        let change = (finer.a - sol.a).abs();
        sol = finer;
        if change <= tol * sol.a.abs() || change <= 1e-15 * r_max {
            return Ok(sol);
        }
    }
    log::warn!(
        "scattering length not converged to {tol:e} after {} refinements",
        opts.max_refinements
    );
    Ok(sol)
}

fn build_grid(start: f64, r_max: f64, n: usize, breaks: &[f64]) -> Vec<f64> {
    let mut edges = vec![start];
    edges.extend(breaks.iter().copied().filter(|&b| b > start && b < r_max));
    edges.push(r_max);
    edges.dedup();

    let geometric = |a: f64, b: f64| a > 0.0 && b / a > 20.0;
    let segs: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
    let uniform_len: f64 = segs
        .iter()
        .filter(|(a, b)| !geometric(*a, *b))
        .map(|(a, b)| b - a)
        .sum();
    let log_len: f64 = segs
        .iter()
        .filter(|(a, b)| geometric(*a, *b))
        .map(|(a, b)| (b / a).ln())
        .sum();
    let (n_uni, n_geo) = match (uniform_len > 0.0, log_len > 0.0) {
        (true, true) => (n / 2, n - n / 2),
        (true, false) => (n, 0),
        _ => (0, n),
    };

    let mut grid = vec![start];
    for &(a, b) in &segs {
        if geometric(a, b) {
            let m = ((n_geo as f64 * (b / a).ln() / log_len).ceil() as usize).max(16);
            let q = (b / a).powf(1.0 / m as f64);
            for j in 1..m {
                grid.push(a * q.powi(j as i32));
            }
        } else {
            let m = ((n_uni as f64 * (b - a) / uniform_len).ceil() as usize).max(16);
            let h = (b - a) / m as f64;
            for j in 1..m {
                grid.push(a + h * j as f64);
            }
        }
        grid.push(b);
    }
    grid
}

fn integrate_profile(
    v: &Truncated<'_>,
    core: Option<f64>,
    units: &Units,
    opts: &SolveOptions,
    range: f64,
) -> Result<ScatteringSolution> {
    let two_mu = 2.0 * units.mu();
    let start = core.unwrap_or(0.0);
    let mut breaks = v.p.breakpoints();
    if let PotentialKind::Tabulated { r, .. } = v.p.kind() {
        if r.len() > 64 {
            breaks.retain(|&b| b >= *r.last().unwrap_or(&0.0));
        }
    }
    breaks.push(v.cut);
    breaks.extend(opts.nodes.iter().copied());
    breaks.sort_by(|a, b| a.total_cmp(b));
    let grid = build_grid(start, opts.r_max, opts.n_points, &breaks);
    let dim = opts.dimension;

    // The state holds the deviation (w, z) from the free solution `reference`
    // so that weak potentials do not lose digits to cancellation, plus the
    // running energy integral.
    let reference = |r: f64| -> (f64, f64) {
        match (dim, core) {
            (Dimension::Three, _) => (r - start, 1.0),
            (Dimension::Two, Some(_)) => ((r / start).ln(), 1.0),
            (Dimension::Two, None) => (1.0, 0.0),
        }
    };
    let deriv = |r: f64, vr: f64, y: [f64; 3]| -> [f64; 3] {
        let (u0, du0) = reference(r);
        let (u, du) = (u0 + y[0], du0 + y[1]);
        match dim {
            Dimension::Three => {
                let ratio = if r > 0.0 { u / r } else { du };
                let d = du - ratio;
                [y[1], vr * u / two_mu, two_mu * d * d + vr * u * u]
            }
            Dimension::Two => {
                let dw = if r > 0.0 { y[1] / r } else { 0.0 };
                [dw, r * vr * u / two_mu, 0.0]
            }
        }
    };

    let mut y = [0.0; 3];
    let mut w = Vec::with_capacity(grid.len());
    let mut ei = Vec::with_capacity(grid.len());
    w.push((y[0], y[1]));
    ei.push(y[2]);
    for pair in grid.windows(2) {
        let (r0, r1) = (pair[0], pair[1]);
        let h = r1 - r0;
        // One-sided potential values so a step never straddles a jump.
        let nudge = 1e-10 * h;
        let v0 = v.v(r0 + nudge);
        let vm = v.v(r0 + 0.5 * h);
        let v1 = v.v(r1 - nudge);
        if !(v0.is_finite() && vm.is_finite() && v1.is_finite()) {
            return Err(Error::NonFinitePotential { r: r0 });
        }
        let k1 = deriv(r0, v0, y);
        let k2 = deriv(r0 + 0.5 * h, vm, add(y, k1, 0.5 * h));
        let k3 = deriv(r0 + 0.5 * h, vm, add(y, k2, 0.5 * h));
        let k4 = deriv(r1, v1, add(y, k3, h));
        for i in 0..3 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        w.push((y[0], y[1]));
        ei.push(y[2]);
    }
    let (u, du): (Vec<f64>, Vec<f64>) = grid
        .iter()
        .zip(&w)
        .map(|(&r, &(dw, dz))| {
            let (u0, du0) = reference(r);
            (u0 + dw, du0 + dz)
        })
        .unzip();

    let r_max = opts.r_max;
    let lo = range.max(start + 0.8 * (r_max - start));
    let idx: Vec<usize> = (0..grid.len()).filter(|&i| grid[i] >= lo && grid[i] > range).collect();
    if idx.len() < 3 {
        return Err(Error::FitWindowInsideRange {
            lo,
            hi: r_max,
            range,
        });
    }
    let window = (grid[idx[0]], grid[*idx.last().unwrap()]);
    let umax = idx.iter().map(|&i| u[i].abs()).fold(0.0, f64::max);
    // Fit the deviation, then add the reference line back.
    let (a, slope, residual) = match dim {
        Dimension::Three => {
            let (wi, ws, rms) = linear_fit(idx.iter().map(|&i| (grid[i], w[i].0)));
            let (icept, slope) = (wi - start, ws + 1.0);
            if slope.abs() <= 1e-300 || slope.abs() * r_max <= 1e-12 * umax {
                return Err(Error::VanishingDerivative);
            }
            (-icept / slope, slope, rms / (slope.abs() * r_max))
        }
        Dimension::Two => {
            let (wi, ws, rms) = linear_fit(idx.iter().map(|&i| (grid[i].ln(), w[i].0)));
            let (icept, slope) = match core {
                Some(_) => (wi - start.ln(), ws + 1.0),
                None => (wi + 1.0, ws),
            };
            if slope.abs() <= 1e-13 * umax.max(1e-300) {
                return Err(Error::NoLogarithm);
            }
            ((-icept / slope).exp(), slope, rms / slope.abs())
        }
    };
    Ok(ScatteringSolution {
        dimension: dim,
        grid,
        u,
        du,
        energy_integral: ei,
        a,
        slope,
        fit_window: window,
        residual,
        effective_range: range,
        refinements: 0,
    })
}

fn add(y: [f64; 3], k: [f64; 3], h: f64) -> [f64; 3] {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]]
}

/// Least squares `y = icept + slope x`; returns `(icept, slope, rms)`.
fn linear_fit(points: impl Iterator<Item = (f64, f64)> + Clone) -> (f64, f64, f64) {
    let n = points.clone().count() as f64;
    let (sx, sy) = points.clone().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxx, sxy) = points
        .clone()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (x - mx), b + (x - mx) * (y - my)));
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let ss: f64 = points.map(|(x, y)| (y - icept - slope * x).powi(2)).sum();
    (icept, slope, (ss / n).sqrt())
}

/// Scattering length of a 3D solution.
pub fn scattering_length_3d(s: &ScatteringSolution) -> Result<f64> {
    if s.dimension != Dimension::Three {
        return Err(Error::invalid("dimension", "expected a three-dimensional solution"));
    }
    Ok(s.a)
}

/// Scattering length of a 2D solution (`psi ~ c ln(r/a)`).
pub fn scattering_length_2d(s: &ScatteringSolution) -> Result<f64> {
    if s.dimension != Dimension::Two {
        return Err(Error::invalid("dimension", "expected a two-dimensional solution"));
    }
    Ok(s.a)
}

/// Default solve for a potential: `r_max` well outside the range.
pub fn scattering_length(p: &PairPotential, units: &Units, dimension: Dimension) -> Result<f64> {
    let r_max = default_r_max(p);
    let sol = solve_zero_energy(p, units, &SolveOptions::new(dimension, r_max, 2000))?;
    Ok(sol.a)
}

/// Ten times the range, or the last breakpoint for unbounded potentials.
pub fn default_r_max(p: &PairPotential) -> f64 {
    let range = p.range();
    let scale = if range.is_finite() && range > 0.0 {
        range
    } else {
        p.breakpoints().last().copied().unwrap_or(1.0)
    };
    10.0 * scale
}

/// `int v(|x|) d^3x` by radial quadrature.
pub fn born_approximation(p: &PairPotential) -> Result<f64> {
    let tol = Tolerance {
        abs: 1e-300,
        rel: 1e-13,
        max_intervals: 10_000,
    };
    match p.kind() {
        PotentialKind::Zero => Ok(0.0),
        PotentialKind::HardCore { .. } => Err(Error::DivergentBorn("hard core")),
        PotentialKind::SquareWell { .. } | PotentialKind::Tabulated { .. } => {
            let mut pts = vec![0.0];
            pts.extend(p.breakpoints());
            let range = p.range();
            pts.retain(|&x| x <= range);
            if pts.len() < 2 {
                return Ok(0.0);
            }
            let r = integrate(|r| 4.0 * PI * r * r * p.value_outside_core(r), &pts, tol)?;
            Ok(r.value)
        }
        PotentialKind::PowerTail {
            core,
            amplitude,
            eps,
            tail_start,
        } => {
            let inner = born_approximation(core)?;
            Ok(inner + 4.0 * PI * amplitude * tail_start.powf(-eps) / eps)
        }
    }
}

/// Born estimate of the scattering length, `born / (8 pi mu)`.
pub fn born_scattering_length(p: &PairPotential, units: &Units) -> Result<f64> {
    Ok(born_approximation(p)? / (8.0 * PI * units.mu()))
}

/// Both sides of the partial-integration identity, normalized by `8 pi mu a`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct IdentityCheck {
    pub a: f64,
    pub radius: f64,
    /// `4 pi int_0^R (2 mu (u' - u/r)^2 + v u^2) dr / (8 pi mu a)` by quadrature.
    pub ratio: f64,
    /// The boundary term `8 pi mu u(R) (u'(R) - u(R)/R) / (8 pi mu a)`.
    pub boundary_ratio: f64,
}

/// Evaluate the energy identity on the ball of radius `radius` with
/// `u0` normalized so that `u0(r)/r -> 1`.
pub fn energy_identity_check(p: &PairPotential, units: &Units, radius: f64) -> Result<IdentityCheck> {
    require_positive("R", radius)?;
    if p.is_zero() {
        return Err(Error::Degenerate("v = 0: both sides of the identity vanish"));
    }
    let range = effective_range(p, units, Dimension::Three)?;
    if radius <= range {
        return Err(Error::invalid("R", format!("must exceed the potential range {range}")));
    }
    let mut opts = SolveOptions::new(Dimension::Three, (1.25 * radius).max(2.0 * range), 2000);
    opts.nodes.push(radius);
    let sol = solve_zero_energy(p, units, &opts)?;
    if sol.a <= 0.0 {
        return Err(Error::Degenerate("scattering length vanishes"));
    }
    let i = sol
        .grid
        .iter()
        .position(|&r| r == radius)
        .ok_or_else(|| Error::invalid("R", "not on the solution grid"))?;
    let c2 = sol.slope * sol.slope;
    let mu = units.mu();
    let denom = 8.0 * PI * mu * sol.a;
    let lhs = 4.0 * PI * sol.energy_integral[i] / c2;
    let (u, du) = (sol.u[i], sol.du[i]);
    let boundary = 8.0 * PI * mu * u * (du - u / radius) / c2;
    Ok(IdentityCheck {
        a: sol.a,
        radius,
        ratio: lhs / denom,
        boundary_ratio: boundary / denom,
    })
}

/// A differentiable radial test function.
pub trait RadialProfile {
    fn value(&self, r: f64) -> f64;
    fn derivative(&self, r: f64) -> f64;
}

/// A profile given by closures for the value and the derivative.
pub struct FnProfile<F, G> {
    pub value: F,
    pub derivative: G,
}

impl<F: Fn(f64) -> f64, G: Fn(f64) -> f64> RadialProfile for FnProfile<F, G> {
    fn value(&self, r: f64) -> f64 {
        (self.value)(r)
    }
    fn derivative(&self, r: f64) -> f64 {
        (self.derivative)(r)
    }
}

/// `g(r) s(r)`: `g` vanishes on the hard core (`1 - a/r` in 3D,
/// `ln(r/a)` in 2D; `1` without a core) and
/// `s = amplitude * exp(sum_k c_k sin(k pi r / r1))`.
#[derive(Clone, Debug, Serialize)]
pub struct SmoothProfile {
    pub dimension: Dimension,
    pub core: f64,
    pub r1: f64,
    pub amplitude: f64,
    pub coeffs: Vec<f64>,
}

impl SmoothProfile {
    fn envelope(&self, r: f64) -> (f64, f64) {
        if self.core <= 0.0 {
            return (1.0, 0.0);
        }
        if r <= self.core {
            return (0.0, 0.0);
        }
        match self.dimension {
            Dimension::Three => (1.0 - self.core / r, self.core / (r * r)),
            Dimension::Two => ((r / self.core).ln(), 1.0 / r),
        }
    }

    fn shape(&self, r: f64) -> (f64, f64) {
        let (mut e, mut de) = (0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            let w = (k + 1) as f64 * PI / self.r1;
            e += c * (w * r).sin();
            de += c * w * (w * r).cos();
        }
        let s = self.amplitude * e.exp();
        (s, s * de)
    }
}

impl RadialProfile for SmoothProfile {
    fn value(&self, r: f64) -> f64 {
        self.envelope(r).0 * self.shape(r).0
    }
    fn derivative(&self, r: f64) -> f64 {
        let (g, dg) = self.envelope(r);
        let (s, ds) = self.shape(r);
        dg * s + g * ds
    }
}

/// Seeded family of smooth positive test profiles.
pub fn random_profiles(seed: u64, count: usize, dimension: Dimension, core: f64, r1: f64) -> Vec<SmoothProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| SmoothProfile {
            dimension,
            core,
            r1,
            amplitude: rng.gen_range(0.2..5.0),
            coeffs: (0..3).map(|_| rng.gen_range(-0.6..0.6)).collect(),
        })
        .collect()
}

/// A soft potential `U` for Dyson's lemma.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SoftPotential {
    Zero,
    /// Constant on `(inner, outer)`, normalized to saturate the constraint.
    /// In 3D with `inner = R0` this is `3 / (R^3 - R0^3)`.
    Shell { inner: f64, outer: f64 },
    /// `delta(r - radius)` normalized to saturate the constraint.
    Delta { radius: f64 },
    /// `(1 - t^2)^2` with `t = (r - center)/width`, scaled so the
    /// constraint integral equals `weight <= 1`.
    Bump { center: f64, width: f64, weight: f64 },
}

/// Dyson's lemma on balls, for one potential in one dimension.
#[derive(Clone, Debug)]
pub struct DysonLemma {
    potential: PairPotential,
    units: Units,
    dimension: Dimension,
    a: f64,
    range: f64,
}

impl DysonLemma {
    pub fn new(potential: &PairPotential, units: &Units, dimension: Dimension) -> Result<Self> {
        let range = potential.range();
        if !range.is_finite() {
            return Err(Error::invalid("potential", "Dyson's lemma needs a finite range"));
        }
        let a = if potential.is_zero() {
            0.0
        } else if let (Some(r), PotentialKind::HardCore { .. }) =
            (potential.hard_core_radius(), potential.kind())
        {
            r
        } else {
            scattering_length(potential, units, dimension)?
        };
        Ok(DysonLemma {
            potential: potential.clone(),
            units: *units,
            dimension,
            a,
            range,
        })
    }

    pub fn scattering_length(&self) -> f64 {
        self.a
    }

    /// Weight of the normalization constraint: `r^2` in 3D, `r ln(r/a)` in 2D.
    fn constraint_weight(&self, r: f64) -> f64 {
        match self.dimension {
            Dimension::Three => r * r,
            Dimension::Two => r * (r / self.a).ln(),
        }
    }

    fn tol() -> Tolerance {
        Tolerance {
            abs: 1e-15,
            rel: 1e-13,
            max_intervals: 20_000,
        }
    }

    /// Scale factor and support of `U`; checks `U = 0` below the range and
    /// the normalization.
    fn soft_density(&self, u: &SoftPotential) -> Result<(f64, f64, f64)> {
        let r0 = self.range;
        let norm = |lo: f64, hi: f64, shape: &dyn Fn(f64) -> f64| -> Result<f64> {
            Ok(integrate(|r| shape(r) * self.constraint_weight(r), &[lo, hi], Self::tol())?.value)
        };
        match *u {
            SoftPotential::Zero => Ok((0.0, 0.0, 0.0)),
            SoftPotential::Shell { inner, outer } => {
                if inner < r0 || outer <= inner {
                    return Err(Error::invalid("U", "shell must satisfy R0 <= inner < outer"));
                }
                let n = match self.dimension {
                    Dimension::Three => (outer.powi(3) - inner.powi(3)) / 3.0,
                    Dimension::Two => norm(inner, outer, &|_| 1.0)?,
                };
                Ok((1.0 / n, inner, outer))
            }
            SoftPotential::Delta { radius } => {
                if radius < r0 || radius <= 0.0 {
                    return Err(Error::invalid("U", "delta must sit at radius >= R0"));
                }
                let w = self.constraint_weight(radius);
                if w <= 0.0 {
                    return Err(Error::invalid("U", "delta radius must exceed a"));
                }
                Ok((1.0 / w, radius, radius))
            }
            SoftPotential::Bump { center, width, weight } => {
                if center - width < r0 || width <= 0.0 {
                    return Err(Error::invalid("U", "bump support must lie outside R0"));
                }
                if !(0.0..=1.0).contains(&weight) {
                    return Err(Error::Normalization { integral: weight });
                }
                let n = norm(center - width, center + width, &|r| bump(r, center, width))?;
                Ok((weight / n, center - width, center + width))
            }
        }
    }

    /// `int U w` for the constraint; must be `<= 1`.
    pub fn normalization(&self, u: &SoftPotential) -> Result<f64> {
        let (scale, lo, hi) = self.soft_density(u)?;
        Ok(match *u {
            SoftPotential::Zero => 0.0,
            SoftPotential::Delta { radius } => scale * self.constraint_weight(radius),
            SoftPotential::Shell { .. } => {
                scale * integrate(|r| self.constraint_weight(r), &[lo, hi], Self::tol())?.value
            }
            SoftPotential::Bump { center, width, .. } => {
                scale
                    * integrate(
                        |r| bump(r, center, width) * self.constraint_weight(r),
                        &[lo, hi],
                        Self::tol(),
                    )?
                    .value
            }
        })
    }

    /// `LHS - RHS` of the lemma on the ball of radius `r1`.
    pub fn margin(&self, u: &SoftPotential, psi: &dyn RadialProfile, r1: f64) -> Result<f64> {
        require_positive("R1", r1)?;
        let norm = self.normalization(u)?;
        if norm > 1.0 + 1e-12 {
            return Err(Error::Normalization { integral: norm });
        }
        let mu = self.units.mu();
        let s = self.dimension.surface();
        let jac = |r: f64| match self.dimension {
            Dimension::Three => r * r,
            Dimension::Two => r,
        };
        let start = self.potential.hard_core_radius().unwrap_or(0.0);
        if start > 0.0 {
            // psi must vanish on the core, otherwise the left side is infinite.
            let inside = (1..16).any(|k| psi.value(start * k as f64 / 16.0) != 0.0);
            if inside {
                return Ok(f64::INFINITY);
            }
        }
        for r in [start.max(1e-12), 0.5 * (start + r1), r1] {
            if !psi.value(r).is_finite() || !psi.derivative(r).is_finite() {
                return Err(Error::invalid("psi", "profile must be finite"));
            }
        }
        if r1 <= start {
            return Ok(0.0);
        }

        let mut pts = vec![start];
        pts.extend(self.potential.breakpoints());
        let (scale, lo, hi) = self.soft_density(u)?;
        pts.extend([lo, hi]);
        pts.push(r1);
        pts.retain(|&x| x >= start && x <= r1);
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup();

        let lhs = integrate(
            |r| {
                let d = psi.derivative(r);
                let p = psi.value(r);
                (mu * d * d + 0.5 * self.potential.value_outside_core(r) * p * p) * jac(r)
            },
            &pts,
            Self::tol(),
        )?
        .value
            * s;

        let rhs_integral = match *u {
            SoftPotential::Zero => 0.0,
            SoftPotential::Delta { radius } => {
                if radius <= r1 {
                    scale * psi.value(radius).powi(2) * jac(radius)
                } else {
                    0.0
                }
            }
            SoftPotential::Shell { .. } | SoftPotential::Bump { .. } => {
                let hi = hi.min(r1);
                if hi <= lo {
                    0.0
                } else {
                    let shape = |r: f64| match *u {
                        SoftPotential::Bump { center, width, .. } => bump(r, center, width),
                        _ => 1.0,
                    };
                    scale
                        * integrate(
                            |r| shape(r) * psi.value(r).powi(2) * jac(r),
                            &[lo, hi],
                            Self::tol(),
                        )?
                        .value
                }
            }
        };
        let prefactor = match self.dimension {
            Dimension::Three => mu * self.a,
            Dimension::Two => mu,
        };
        Ok(lhs - prefactor * s * rhs_integral)
    }
}

fn bump(r: f64, center: f64, width: f64) -> f64 {
    let t = (r - center) / width;
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - t * t).powi(2)
    }
}

/// `LHS - RHS` of Dyson's lemma for radial `psi` on the ball of radius `r1`.
pub fn verify_dyson_lemma(
    p: &PairPotential,
    units: &Units,
    u: &SoftPotential,
    psi: &dyn RadialProfile,
    r1: f64,
    dimension: Dimension,
) -> Result<f64> {
    DysonLemma::new(p, units, dimension)?.margin(u, psi, r1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn units() -> Units {
        Units::default()
    }

    /// Closed form for the repulsive square well in 3D.
    fn square_well_a(h: f64, r0: f64, mu: f64) -> f64 {
        let k = (h / (2.0 * mu)).sqrt();
        r0 * (1.0 - (k * r0).tanh() / (k * r0))
    }

    /// Modified Bessel functions by power series (test oracle).
    fn bessel_i0_i1(x: f64) -> (f64, f64) {
        let (mut i0, mut i1) = (0.0, 0.0);
        let mut t0 = 1.0;
        let mut t1 = 0.5 * x;
        for k in 0..200 {
            i0 += t0;
            i1 += t1;
            let kf = k as f64;
            t0 *= (0.5 * x).powi(2) / ((kf + 1.0) * (kf + 1.0));
            t1 *= (0.5 * x).powi(2) / ((kf + 1.0) * (kf + 2.0));
        }
        (i0, i1)
    }

    #[test]
    fn zero_potential_is_linear() {
        let sol = solve_zero_energy(
            &PairPotential::zero(),
            &units(),
            &SolveOptions::new(Dimension::Three, 10.0, 200),
        )
        .unwrap();
        for (r, u) in sol.grid.iter().zip(&sol.u) {
            assert!((u - r).abs() <= 1e-14 * r.max(1.0));
        }
        assert!(sol.a.abs() < 1e-12);
    }

    #[test]
    fn hard_core_is_exact() {
        let p = PairPotential::hard_core(1.0).unwrap();
        let sol = solve_zero_energy(&p, &units(), &SolveOptions::new(Dimension::Three, 20.0, 400)).unwrap();
        assert!((sol.a - 1.0).abs() < 1e-12);
        for (r, u) in sol.grid.iter().zip(&sol.u) {
            assert!((u - (r - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn square_well_profile_matches_closed_form() {
        let (h, r0) = (10.0, 1.0);
        let p = PairPotential::square_well(h, r0).unwrap();
        let sol = solve_zero_energy(&p, &units(), &SolveOptions::new(Dimension::Three, 10.0, 1000)).unwrap();
        let k = (h / 2.0f64).sqrt();
        for (r, u) in sol.grid.iter().zip(&sol.u) {
            let exact = if *r <= r0 {
                (k * r).sinh() / k
            } else {
                (k * r0).sinh() / k + (k * r0).cosh() * (r - r0)
            };
            if *r > 0.0 {
                assert!((u - exact).abs() <= 1e-8 * exact.abs(), "r = {r}: {u} vs {exact}");
            }
        }
        assert!((sol.a - square_well_a(h, r0, 1.0)).abs() <= 1e-10 * sol.a);
    }

    #[test]
    fn square_well_scattering_length_over_four_decades() {
        for h in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let p = PairPotential::square_well(h, 1.0).unwrap();
            let a = scattering_length(&p, &units(), Dimension::Three).unwrap();
            let exact = square_well_a(h, 1.0, 1.0);
            assert!((a - exact).abs() <= 1e-8 * exact, "h = {h}: {a} vs {exact}");
        }
    }

    #[test]
    fn scattering_length_respects_mu() {
        let p = PairPotential::square_well(3.0, 1.5).unwrap();
        let u = Units::dilute(0.7).unwrap();
        let a = scattering_length(&p, &u, Dimension::Three).unwrap();
        assert!((a - square_well_a(3.0, 1.5, 0.7)).abs() < 1e-9 * a);
    }

    #[test]
    fn monotone_in_height() {
        let mut prev = 0.0;
        for k in 0..20 {
            let h = 0.05 * 1.6f64.powi(k);
            let a = scattering_length(&PairPotential::square_well(h, 1.0).unwrap(), &units(), Dimension::Three)
                .unwrap();
            assert!(a >= prev);
            prev = a;
        }
    }

    #[test]
    fn born_matches_well_volume() {
        let p = PairPotential::square_well(2.0, 1.5).unwrap();
        let b = born_approximation(&p).unwrap();
        assert!((b - 2.0 * 4.0 * PI / 3.0 * 1.5f64.powi(3)).abs() < 1e-12 * b);
        assert_eq!(born_approximation(&PairPotential::zero()).unwrap(), 0.0);
        assert!(matches!(
            born_approximation(&PairPotential::hard_core(1.0).unwrap()),
            Err(Error::DivergentBorn(_))
        ));
    }

    #[test]
    fn born_deviation_is_linear_in_height() {
        let dev = |h: f64| {
            let p = PairPotential::square_well(h, 1.0).unwrap();
            let a = scattering_length(&p, &units(), Dimension::Three).unwrap();
            let born = born_scattering_length(&p, &units()).unwrap();
            (born - a) / a
        };
        let (d4, d5) = (dev(1e-4), dev(1e-5));
        assert!(d4 > 0.0 && d5 > 0.0);
        let ratio = d4 / d5;
        assert!((ratio - 10.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn hard_disc_in_2d() {
        let p = PairPotential::hard_core(1.0).unwrap();
        let sol = solve_zero_energy(&p, &units(), &SolveOptions::new(Dimension::Two, 20.0, 400)).unwrap();
        assert!((scattering_length_2d(&sol).unwrap() - 1.0).abs() < 1e-12);
        assert!(scattering_length_3d(&sol).is_err());
    }

    #[test]
    fn zero_potential_in_2d_has_no_logarithm() {
        let r = solve_zero_energy(
            &PairPotential::zero(),
            &units(),
            &SolveOptions::new(Dimension::Two, 10.0, 200),
        );
        assert!(matches!(r, Err(Error::NoLogarithm)));
    }

    #[test]
    fn square_well_2d_matches_bessel_closed_form() {
        let (h, r0) = (4.0, 1.0);
        let k = (h / 2.0f64).sqrt();
        let (i0, i1) = bessel_i0_i1(k * r0);
        let exact = r0 * (-i0 / (k * r0 * i1)).exp();
        let a = scattering_length(&PairPotential::square_well(h, r0).unwrap(), &units(), Dimension::Two).unwrap();
        assert!((a - exact).abs() < 1e-8 * exact, "{a} vs {exact}");
    }

    #[test]
    fn square_well_2d_matches_richardson_oracle() {
        let p = PairPotential::square_well(4.0, 1.0).unwrap();
        let solve = |n| {
            solve_zero_energy(&p, &units(), &SolveOptions::new(Dimension::Two, 10.0, n).fixed())
                .unwrap()
                .a
        };
        let coarse = solve(4000);
        let fine = solve(16000);
        let oracle = fine + (fine - coarse) / 255.0;
        let a = scattering_length(&p, &units(), Dimension::Two).unwrap();
        assert!((a - oracle).abs() <= 1e-6 * oracle);
    }

    #[test]
    fn residual_shrinks_with_resolution() {
        let p = PairPotential::square_well(5.0, 1.0).unwrap();
        let res = |n| {
            solve_zero_energy(&p, &units(), &SolveOptions::new(Dimension::Three, 10.0, n).fixed())
                .unwrap()
                .residual
        };
        assert!(res(200) < 1e-10);
        assert!(res(800) <= res(200) * 1.01 + 1e-15);
    }

    #[test]
    fn grid_must_exceed_range() {
        let p = PairPotential::square_well(1.0, 5.0).unwrap();
        let r = solve_zero_energy(&p, &units(), &SolveOptions::new(Dimension::Three, 4.0, 200));
        assert!(matches!(r, Err(Error::GridTooShort { .. })));
        let r = solve_zero_energy(&p, &units(), &SolveOptions::new(Dimension::Three, 40.0, 50));
        assert!(r.is_err());
    }

    #[test]
    fn power_tail_converges_to_cutoff_independent_value() {
        let core = PairPotential::hard_core(1.0).unwrap();
        let p = PairPotential::power_tail(core, 0.2, 1.0, 1.0).unwrap();
        let sol = solve_zero_energy(&p, &units(), &SolveOptions::new(Dimension::Three, 10.0, 2000)).unwrap();
        assert!(sol.effective_range > 1e3);
        // Perturbative estimate: a ~ 1 + (tail Born length) to first order.
        assert!(sol.a > 1.0 && sol.a < 1.0 + 0.2 / (2.0 * 1.0) * 1.1);
    }

    #[test]
    fn identity_for_hard_core() {
        let p = PairPotential::hard_core(1.0).unwrap();
        let c = energy_identity_check(&p, &units(), 10.0).unwrap();
        assert!((c.ratio - 0.9).abs() < 1e-12, "{}", c.ratio);
        assert!((c.boundary_ratio - 0.9).abs() < 1e-12);
    }

    #[test]
    fn identity_for_square_well_routes_agree() {
        let p = PairPotential::square_well(3.0, 1.0).unwrap();
        let c = energy_identity_check(&p, &units(), 50.0).unwrap();
        assert!((c.ratio - c.boundary_ratio).abs() < 1e-9);
        assert!((c.ratio - (1.0 - c.a / 50.0)).abs() < 1e-9);
    }

    #[test]
    fn identity_degenerate_for_zero_potential() {
        assert!(matches!(
            energy_identity_check(&PairPotential::zero(), &units(), 5.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn dyson_with_zero_u_is_kinetic() {
        let p = PairPotential::hard_core(1.0).unwrap();
        let psi = FnProfile {
            value: |r: f64| if r > 1.0 { r - 1.0 } else { 0.0 },
            derivative: |r: f64| if r > 1.0 { 1.0 } else { 0.0 },
        };
        let m = verify_dyson_lemma(&p, &units(), &SoftPotential::Zero, &psi, 3.0, Dimension::Three).unwrap();
        // 4 pi int_1^3 r^2 dr
        assert!((m - 4.0 * PI * 26.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn dyson_delta_is_saturated_by_scattering_solution() {
        let p = PairPotential::hard_core(1.0).unwrap();
        let psi = FnProfile {
            value: |r: f64| if r > 1.0 { 1.0 - 1.0 / r } else { 0.0 },
            derivative: |r: f64| if r > 1.0 { 1.0 / (r * r) } else { 0.0 },
        };
        let lemma = DysonLemma::new(&p, &units(), Dimension::Three).unwrap();
        let r = 4.0;
        let m = lemma.margin(&SoftPotential::Delta { radius: r }, &psi, r).unwrap();
        // LHS = 4 pi (1 - 1/R), RHS = 4 pi (1 - 1/R)^2: margin 4 pi (1 - 1/R)/R.
        let exact = 4.0 * PI * (1.0 - 1.0 / r) / r;
        assert!((m - exact).abs() < 1e-10);
        let shell = lemma
            .margin(&SoftPotential::Shell { inner: 1.0, outer: r }, &psi, r)
            .unwrap();
        assert!(shell >= 0.0);
    }

    #[test]
    fn dyson_normalization_enforced() {
        let p = PairPotential::hard_core(1.0).unwrap();
        let lemma = DysonLemma::new(&p, &units(), Dimension::Three).unwrap();
        let n = lemma
            .normalization(&SoftPotential::Shell { inner: 1.0, outer: 3.0 })
            .unwrap();
        assert!((n - 1.0).abs() < 1e-12);
        let psi = FnProfile {
            value: |_r: f64| 1.0,
            derivative: |_r: f64| 0.0,
        };
        assert!(lemma
            .margin(&SoftPotential::Shell { inner: 0.5, outer: 3.0 }, &psi, 3.0)
            .is_err());
        assert!(lemma
            .margin(
                &SoftPotential::Bump {
                    center: 3.0,
                    width: 1.0,
                    weight: 1.5
                },
                &psi,
                5.0
            )
            .is_err());
    }

    #[test]
    fn dyson_holds_for_soft_potential() {
        let p = PairPotential::square_well(2.0, 1.0).unwrap();
        for dim in [Dimension::Two, Dimension::Three] {
            let lemma = DysonLemma::new(&p, &units(), dim).unwrap();
            for prof in random_profiles(11, 20, dim, 0.0, 6.0) {
                for u in [
                    SoftPotential::Shell { inner: 1.0, outer: 3.0 },
                    SoftPotential::Delta { radius: 2.0 },
                ] {
                    let m = lemma.margin(&u, &prof, 6.0).unwrap();
                    assert!(m >= -1e-8, "{dim:?} {u:?}: {m}");
                }
            }
        }
    }

    #[test]
    fn random_profiles_are_reproducible() {
        let a = random_profiles(3, 5, Dimension::Three, 1.0, 5.0);
        let b = random_profiles(3, 5, Dimension::Three, 1.0, 5.0);
        assert_eq!(a[4].coeffs, b[4].coeffs);
        let p = &a[0];
        let h = 1e-6;
        let fd = (p.value(2.0 + h) - p.value(2.0 - h)) / (2.0 * h);
        assert!((fd - p.derivative(2.0)).abs() < 1e-7);
    }
}
