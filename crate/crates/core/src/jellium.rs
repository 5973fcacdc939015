//! Bogolubov theory of the charged Bose gas (bosonic jellium).
//!
//! Units `hbar = m = 1` with the Coulomb kernel `sum_{p != 0} L^-3 |p|^-2`,
//! the Fourier series of `1 / (4 pi |x|)`; the corresponding `e^2` is
//! `1 / (4 pi)`, which sets the Hartree energy `1 / (16 pi^2)` and Bohr
//! length `4 pi` used for the `r_s` conversion.
//!
//! Each mode `p != 0` has `A (1 + beta^2) = nu + w` and `2 A beta = w` with
//! `nu = p^2 / 2`, `w = rho / p^2`. The correlation energy per volume is
//! `-int A beta^2 d^3p / (2 pi)^3 = -C_F rho^{5/4}`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::exec::Exec;
use crate::quadrature::{integrate, Tolerance};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BogolubovMode {
    pub p: f64,
    pub nu: f64,
    pub w: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub beta: f64,
}

impl BogolubovMode {
    /// Relative residuals of the two defining equations.
    pub fn residuals(&self) -> (f64, f64) {
        let lhs = self.a * (1.0 + self.beta * self.beta);
        let first = (lhs - (self.nu + self.w)).abs() / (self.nu + self.w);
        let second = (2.0 * self.a * self.beta - self.w).abs() / self.w;
        (first, second)
    }
}

/// `beta` on the branch `0 < beta < 1`.
fn beta(nu: f64, w: f64) -> f64 {
    w / ((nu + w) + (nu * (nu + 2.0 * w)).sqrt())
}

pub fn bogolubov_coefficients(p: f64, rho: f64) -> Result<BogolubovMode> {
    require_positive("p", p)?;
    require_positive("rho", rho)?;
    let nu = 0.5 * p * p;
    let w = rho / (p * p);
    let b = beta(nu, w);
    let mode = BogolubovMode {
        p,
        nu,
        w,
        a: w / (2.0 * b),
        beta: b,
    };
    let (r1, r2) = mode.residuals();
    if !(r1 <= 1e-12 && r2 <= 1e-12) {
        return Err(Error::OutOfRange(format!("coefficient residuals {r1:e}, {r2:e} at p = {p}")));
    }
    Ok(mode)
}

/// The pairing amplitude `beta_p`, a function of `p^4 / rho` alone.
pub fn pairing_kernel(rho: f64, p: f64) -> Result<f64> {
    Ok(bogolubov_coefficients(p, rho)?.beta)
}

/// `G(x)` with `beta(p, rho) = G(p^4 / rho)`.
pub fn kernel_g(x: f64) -> Result<f64> {
    require_positive("p^4/rho", x)?;
    pairing_kernel(1.0, x.powf(0.25))
}

/// `(x, G(x))` on `count` log-spaced points of `[lo, hi]`.
pub fn tabulate_g(lo: f64, hi: f64, count: usize) -> Result<Vec<(f64, f64)>> {
    require_positive("lo", lo)?;
    if !(hi > lo) || count < 2 {
        return Err(Error::invalid("range", "need hi > lo and at least two points"));
    }
    let step = (hi / lo).ln() / (count - 1) as f64;
    (0..count)
        .map(|i| {
            let x = lo * (step * i as f64).exp();
            kernel_g(x).map(|g| (x, g))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// Panels end here; the `q^-4` tail beyond is added analytically.
    pub q_max: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-12,
            abs_tol: 1e-16,
            max_intervals: 4000,
            q_max: 64.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FoldyConstant {
    pub value: f64,
    pub quadrature_error: f64,
    pub tail: f64,
}

/// `C_F = int A beta^2 d^3q / (2 pi)^3` at `rho = 1`.
pub fn foldy_constant(spec: &QuadratureSpec) -> Result<FoldyConstant> {
    require_positive("q_max", spec.q_max)?;
    let f = |q: f64| {
        let nu = 0.5 * q * q;
        let w = 1.0 / (q * q);
        let b = beta(nu, w);
        // A beta^2 = w beta / 2.
        0.5 * w * b * q * q / (2.0 * PI * PI)
    };
    let mut points = vec![0.0, 0.25, 0.5];
    let mut x = 1.0;
    while x < spec.q_max {
        points.push(x);
        x *= 2.0;
    }
    points.push(spec.q_max);
    let tol = Tolerance {
        abs: spec.abs_tol,
        rel: spec.rel_tol,
        max_intervals: spec.max_intervals,
    };
    let body = integrate(f, &points, tol)?;
    // A beta^2 q^2 / (2 pi^2) ~ 1 / (4 pi^2 q^4); the next term is O(q^-8).
    let tail = 1.0 / (12.0 * PI * PI * spec.q_max.powi(3));
    let tail_error = tail / spec.q_max.powi(4);
    Ok(FoldyConstant {
        value: body.value + tail,
        quadrature_error: body.abs_error + tail_error,
        tail,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JelliumResult {
    pub rho: f64,
    pub e_per_volume: f64,
    pub e_per_particle: f64,
    /// Magnitude `c` in `e_per_particle = -c r_s^{-3/4}` Hartree.
    pub coefficient_rs: f64,
    pub r_s: f64,
    pub quadrature_error: f64,
}

/// Hartree energy and Bohr length for `e^2 = 1 / (4 pi)`.
const HARTREE: f64 = 1.0 / (16.0 * PI * PI);
const BOHR: f64 = 4.0 * PI;

/// `r_s` for density `rho`.
pub fn rs_from_rho(rho: f64) -> f64 {
    (3.0 / (4.0 * PI * rho)).cbrt() / BOHR
}

pub fn rho_from_rs(rs: f64) -> f64 {
    3.0 / (4.0 * PI * (rs * BOHR).powi(3))
}

pub fn foldy_energy(rho: f64, spec: &QuadratureSpec) -> Result<JelliumResult> {
    require_positive("rho", rho)?;
    let c = foldy_constant(spec)?;
    let tol = spec.rel_tol * c.value.abs() + spec.abs_tol;
    if c.quadrature_error > tol.max(1e-10 * c.value) {
        return Err(Error::Quadrature {
            error: c.quadrature_error,
            requested: tol,
        });
    }
    let scale = rho.powf(0.25);
    let e_per_particle = -c.value * scale;
    let r_s = rs_from_rho(rho);
    Ok(JelliumResult {
        rho,
        e_per_volume: e_per_particle * rho,
        e_per_particle,
        coefficient_rs: -e_per_particle * r_s.powf(0.75) / HARTREE,
        r_s,
        quadrature_error: c.quadrature_error * scale,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid("fit", "need matching arrays of length >= 2"));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("fit", "log fit needs positive values"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("fit", "x values must not all coincide"));
    }
    Ok(sxy / sxx)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityFit {
    pub slope_per_volume: f64,
    pub slope_per_particle: f64,
    /// Exponent of the classical infinite-mass law, for reference.
    pub infinite_mass_slope: f64,
    pub rows: Vec<JelliumResult>,
}

/// Fit `|e|` against `rho` on `rhos` (at least 4 points, 3 decades).
pub fn infinite_mass_comparison(rhos: &[f64], spec: &QuadratureSpec, exec: Exec) -> Result<DensityFit> {
    if rhos.len() < 4 {
        return Err(Error::invalid("rho", "need at least 4 densities"));
    }
    let lo = rhos.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = rhos.iter().cloned().fold(0.0, f64::max);
    if !(hi / lo >= 1e3 * (1.0 - 1e-12)) {
        return Err(Error::invalid("rho", "grid must span at least 3 decades"));
    }
    let rows = exec
        .map(rhos, |&rho| foldy_energy(rho, spec))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let vol: Vec<f64> = rows.iter().map(|r| -r.e_per_volume).collect();
    let part: Vec<f64> = rows.iter().map(|r| -r.e_per_particle).collect();
    Ok(DensityFit {
        slope_per_volume: log_log_slope(rhos, &vol)?,
        slope_per_particle: log_log_slope(rhos, &part)?,
        infinite_mass_slope: 1.0 / 3.0,
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwoComponentRow {
    pub n: f64,
    pub l_opt: f64,
    pub e_min: f64,
    pub l_numeric: f64,
    pub e_numeric: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoComponentFit {
    pub energy_slope: f64,
    pub length_slope: f64,
    pub rows: Vec<TwoComponentRow>,
}

/// `E(L) = c_kin N L^-2 - c_foldy N (N L^-3)^{1/4}`.
pub fn two_component_energy(n: f64, l: f64, c_kin: f64, c_foldy: f64) -> f64 {
    c_kin * n / (l * l) - c_foldy * n * (n / l.powi(3)).powf(0.25)
}

/// Golden-section minimum of a unimodal `f` on `[lo, hi]`.
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-14 * (lo.abs() + hi.abs()) {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Minimize over `L` for each `N` and fit the `N` exponents.
pub fn two_component_scaling(ns: &[f64], c_kin: f64, c_foldy: f64) -> Result<TwoComponentFit> {
    require_positive("c_kin", c_kin)?;
    require_positive("c_foldy", c_foldy)?;
    if ns.len() < 2 || ns.iter().any(|n| !(*n > 0.0)) {
        return Err(Error::invalid("N_list", "need at least two positive counts"));
    }
    let lo = ns.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ns.iter().cloned().fold(0.0, f64::max);
    if !(hi / lo >= 1e3 * (1.0 - 1e-12)) {
        return Err(Error::invalid("N_list", "must span at least 3 decades"));
    }
    let rows: Vec<TwoComponentRow> = ns
        .iter()
        .map(|&n| {
            let l_opt = (8.0 * c_kin / (3.0 * c_foldy)).powf(0.8) * n.powf(-0.2);
            let e_min = -5.0 / 3.0 * c_kin * n / (l_opt * l_opt);
            let t = golden_min(
                |t| two_component_energy(n, t.exp(), c_kin, c_foldy),
                l_opt.ln() - 5.0,
                l_opt.ln() + 5.0,
            );
            let l_numeric = t.exp();
            TwoComponentRow {
                n,
                l_opt,
                e_min,
                l_numeric,
                e_numeric: two_component_energy(n, l_numeric, c_kin, c_foldy),
            }
        })
        .collect();
    let e: Vec<f64> = rows.iter().map(|r| -r.e_min).collect();
    let l: Vec<f64> = rows.iter().map(|r| r.l_opt).collect();
    Ok(TwoComponentFit {
        energy_slope: log_log_slope(ns, &e)?,
        length_slope: log_log_slope(ns, &l)?,
        rows,
    })
}
