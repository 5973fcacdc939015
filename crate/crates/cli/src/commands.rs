//! Subcommand execution. Each command produces a JSON report, a CSV table
//! and a one-line summary; the configured format picks what is written.

use bosegas::bounds::{
    dyson_bounds_hard_sphere, lower_bound, lower_bound_finite_box, optimize_error_constant, Ansatz, BoundReport,
    Constants, Exponents, GasParameter, OptimizeOptions, Precision as BoundPrecision,
};
use bosegas::gp::{
    gp_limit_scan, gp_minimize_on, tf_closed_form, tf_minimize_on, CouplingMode, GpProblem, GpSolution, Mesh,
};
use bosegas::jellium::{foldy_energy, log_log_slope, rho_from_rs, tabulate_g, JelliumResult, QuadratureSpec};
use bosegas::potentials::{PairPotential, TrapKind, TrapPotential};
use bosegas::scattering::{
    default_r_max, random_profiles, solve_zero_energy, Dimension, DysonLemma, ScatteringSolution, SolveOptions,
};
use bosegas::{Exec, Units};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{
    BoundsConfig, Command, GpConfig, GpMode, JelliumConfig, PotentialConfig, Precision, RunConfig, ScatterConfig,
    SweepSpec, TrapConfig,
};
use crate::error::CliError;
use crate::output::{Cell, Table};

pub struct Artifact {
    pub json: Value,
    pub table: Table,
    pub summary: String,
}

pub fn run(config: &RunConfig) -> Result<Artifact, CliError> {
    match config.command {
        Command::Scatter => scatter(config),
        Command::Bounds => bounds(config),
        Command::Gp => gp(config),
        Command::Jellium => jellium(config),
        Command::Sweep => sweep(config),
    }
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    s.as_ref().ok_or_else(|| CliError::Parse(format!("missing [{name}] section")))
}

fn dimension(d: u8) -> Result<Dimension, CliError> {
    Ok(Dimension::try_from(d)?)
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn insert(v: &mut Value, key: &str, x: Value) {
    if let Value::Object(m) = v {
        m.insert(key.to_string(), x);
    }
}

// ---------------------------------------------------------------- scatter

fn build_potential(c: &PotentialConfig) -> Result<PairPotential, CliError> {
    Ok(match c {
        PotentialConfig::Zero => PairPotential::zero(),
        PotentialConfig::HardCore { radius } => PairPotential::hard_core(*radius)?,
        PotentialConfig::SquareWell { height, range } => PairPotential::square_well(*height, *range)?,
        PotentialConfig::Tabulated { r, v } => PairPotential::tabulated(r.clone(), v.clone())?,
        PotentialConfig::PowerTail {
            core,
            amplitude,
            eps,
            tail_start,
        } => PairPotential::power_tail(build_potential(core)?, *amplitude, *eps, *tail_start)?,
    })
}

fn solve_scatter(c: &ScatterConfig) -> Result<(PairPotential, Units, ScatteringSolution), CliError> {
    let p = build_potential(&c.potential)?;
    let units = Units::dilute(c.mu)?;
    let dim = dimension(c.dimension)?;
    let r_max = c.r_max.unwrap_or_else(|| default_r_max(&p));
    let sol = solve_zero_energy(&p, &units, &SolveOptions::new(dim, r_max, c.points.unwrap_or(2000)))?;
    Ok((p, units, sol))
}

fn scatter(config: &RunConfig) -> Result<Artifact, CliError> {
    let c = section(&config.scatter, "scatter")?;
    let (p, units, sol) = solve_scatter(c)?;
    let mut report = json!({
        "a": sol.a,
        "residual": sol.residual,
        "dimension": c.dimension,
        "slope": sol.slope,
        "fit_window": [sol.fit_window.0, sol.fit_window.1],
        "effective_range": sol.effective_range,
        "refinements": sol.refinements,
        "points": sol.grid.len(),
    });
    if let Some(d) = &c.dyson {
        let lemma = DysonLemma::new(&p, &units, sol.dimension)?;
        let core = p.hard_core_radius().unwrap_or(0.0);
        let profiles = random_profiles(config.seed, d.profiles, sol.dimension, core, d.r1);
        let margins = profiles
            .par_iter()
            .map(|psi| lemma.margin(&d.soft, psi, d.r1))
            .collect::<Result<Vec<f64>, _>>()?;
        let worst = margins.iter().cloned().fold(f64::INFINITY, f64::min);
        insert(
            &mut report,
            "dyson",
            json!({ "profiles": d.profiles, "seed": config.seed, "min_margin": worst }),
        );
    }
    let mut table = Table::new(&["r", "u", "du"]);
    for i in 0..sol.grid.len() {
        table.push(vec![sol.grid[i].into(), sol.u[i].into(), sol.du[i].into()]);
    }
    Ok(Artifact {
        summary: format!("scatter: a = {:?} (residual {:e})", sol.a, sol.residual),
        json: report,
        table,
    })
}

// ----------------------------------------------------------------- bounds

const BOUNDS_COLUMNS: [&str; 7] = ["Y", "lower", "upper", "epsilon", "R_over_a", "ell_over_a", "valid"];

fn bound_row(r: &BoundReport) -> Vec<Cell> {
    vec![
        r.y.into(),
        r.lower.into(),
        r.upper.into(),
        r.params.epsilon.into(),
        r.params.r.into(),
        r.params.ell.into(),
        r.valid.into(),
    ]
}

fn exponents(c: &BoundsConfig) -> Result<Exponents, CliError> {
    c.exponents
        .parse()
        .map_err(|e: bosegas::Error| CliError::Parse(e.to_string()))
}

/// Optimized constants and `C` on `ys`.
fn optimize_constants(c: &BoundsConfig, ys: &[f64]) -> Result<(Constants, f64), CliError> {
    let opts = OptimizeOptions {
        gap: c.gap_convention,
        r0_over_a: c.r0_over_a,
        ..Default::default()
    };
    let o = optimize_error_constant(ys, exponents(c)?, &opts)?;
    Ok((o.constants, o.c))
}

fn evaluate_bound(c: &BoundsConfig, precision: Precision, constants: Constants) -> Result<BoundReport, CliError> {
    let ex = exponents(c)?;
    ex.check()?;
    let mut ansatz = Ansatz::new(ex, constants);
    ansatz.gap = c.gap_convention;
    ansatz.r0_over_a = c.r0_over_a;
    ansatz.precision = match precision {
        Precision::Double => BoundPrecision::Auto,
        Precision::Extended => BoundPrecision::Extended,
    };
    let gas = GasParameter::from_y(c.y, 1.0, Dimension::Three)?;
    Ok(match c.box_length {
        Some(l) => {
            let n = gas.rho() * l.powi(3);
            lower_bound_finite_box(n, l, &gas, &ansatz, &Units::default(), None)?
        }
        None => lower_bound(&gas, &ansatz)?,
    })
}

fn bounds(config: &RunConfig) -> Result<Artifact, CliError> {
    let c = section(&config.bounds, "bounds")?;
    let (constants, big_c) = if c.optimize {
        let (k, big_c) = optimize_constants(c, &[c.y])?;
        (k, Some(big_c))
    } else {
        (c.constants.unwrap_or_else(Constants::unit), None)
    };
    let r = evaluate_bound(c, config.precision, constants)?;
    let mut report = to_json(&r);
    insert(&mut report, "exponents", json!(c.exponents));
    insert(&mut report, "constants", to_json(&constants));
    insert(&mut report, "C", big_c.map_or(Value::Null, Value::from));
    insert(&mut report, "dyson_lower", json!(dyson_bounds_hard_sphere(c.y)?.0));
    let mut table = Table::new(&BOUNDS_COLUMNS);
    table.push(bound_row(&r));
    Ok(Artifact {
        summary: format!(
            "bounds: Y = {:?}, lower = {:?}, upper = {:?}, valid = {}",
            r.y, r.lower, r.upper, r.valid
        ),
        json: report,
        table,
    })
}

// --------------------------------------------------------------------- gp

fn build_problem(c: &GpConfig) -> Result<GpProblem, CliError> {
    let dim = dimension(c.dimension)?;
    let trap = match &c.trap {
        TrapConfig::Harmonic { omega } => TrapPotential::harmonic(omega.clone())?,
        TrapConfig::Box { side, walls } => TrapPotential::hard_box(*side, *walls)?,
        TrapConfig::TabulatedRadial { r, v } => TrapPotential::tabulated_radial(r.clone(), v.clone())?,
    };
    let mut p = GpProblem::new(dim, trap, c.n, c.a)?;
    p.units = Units::dilute(c.mu)?;
    p.mode = match (c.mode, dim) {
        (GpMode::Tf, _) => CouplingMode::ThomasFermi,
        (GpMode::Log2d, _) | (GpMode::Gp, Dimension::Two) => CouplingMode::Log2d,
        (GpMode::Gp, Dimension::Three) => CouplingMode::Fixed3d,
    };
    p.grid = c.grid;
    if let Some(t) = c.tolerance {
        p.tolerance = t;
    }
    if let Some(m) = c.max_iterations {
        p.max_iterations = m;
    }
    p.validate()?;
    Ok(p)
}

fn solve_gp(p: &GpProblem) -> Result<(GpSolution, Mesh), CliError> {
    let mesh = p.discretize()?;
    let s = match p.mode {
        CouplingMode::ThomasFermi => tf_minimize_on(p, &mesh)?,
        _ => gp_minimize_on(p, &mesh)?,
    };
    Ok((s, mesh))
}

fn gp(config: &RunConfig) -> Result<Artifact, CliError> {
    let c = section(&config.gp, "gp")?;
    let p = build_problem(c)?;
    if let Some(scan) = &c.limit_scan {
        let t = gp_limit_scan(&p, scan.na, &scan.n)?;
        let mut table = Table::new(&["N", "a", "energy_per_particle", "chemical_potential", "residual", "converged", "tf_l1"]);
        for r in &t.rows {
            table.push(vec![
                r.n.into(),
                r.a.into(),
                r.energy_per_particle.into(),
                r.chemical_potential.into(),
                r.residual.into(),
                r.converged.into(),
                r.tf_l1.unwrap_or(f64::NAN).into(),
            ]);
        }
        return Ok(Artifact {
            summary: format!("gp: limit scan at Na = {:?}, relative E/N spread {:e}", scan.na, t.energy_spread()),
            json: to_json(&t),
            table,
        });
    }
    let (s, mesh) = solve_gp(&p)?;
    let mut report = to_json(&s);
    let d = p.dimension.value();
    insert(&mut report, "N", json!(p.n));
    insert(&mut report, "a", json!(p.a));
    insert(&mut report, "dimension", json!(d));
    insert(&mut report, "mode", to_json(&p.mode));
    insert(&mut report, "grid_nodes", json!(mesh.len()));
    insert(&mut report, "grid_spacing", json!(mesh.max_spacing()));
    if let Some(lambda) = p.trap.linear_ground_energy(d, &p.units) {
        insert(&mut report, "n_lambda", json!(p.n * lambda));
    }
    if matches!(p.trap.kind(), TrapKind::Harmonic { .. }) && s.coupling > 0.0 {
        insert(&mut report, "tf_closed_form", to_json(&tf_closed_form(&p, s.coupling)?));
    }
    let names = mesh.coordinate_names();
    let mut header: Vec<&str> = names.to_vec();
    header.push("density");
    let mut table = Table::new(&header);
    for (i, phi) in s.phi.iter().enumerate() {
        let mut row: Vec<Cell> = mesh.point(i).into_iter().map(Cell::from).collect();
        row.push((phi * phi).into());
        table.push(row);
    }
    Ok(Artifact {
        summary: format!(
            "gp: E/N = {:?}, mu = {:?}, residual {:e}, converged = {}",
            s.energy_per_particle, s.chemical_potential, s.residual, s.converged
        ),
        json: report,
        table,
    })
}

// ---------------------------------------------------------------- jellium

fn quadrature(c: &JelliumConfig) -> QuadratureSpec {
    let mut q = QuadratureSpec::default();
    if let Some(t) = c.rel_tol {
        q.rel_tol = t;
    }
    if let Some(m) = c.q_max {
        q.q_max = m;
    }
    q
}

fn jellium_point(c: &JelliumConfig) -> Result<JelliumResult, CliError> {
    let rho = match (c.rho, c.rs) {
        (Some(rho), None) => rho,
        (None, Some(rs)) => {
            if !(rs > 0.0) {
                return Err(bosegas::Error::OutOfRange(format!("rs = {rs} must be positive")).into());
            }
            rho_from_rs(rs)
        }
        _ => return Err(CliError::Parse("[jellium] needs exactly one of rho and rs".into())),
    };
    Ok(foldy_energy(rho, &quadrature(c))?)
}

fn jellium(config: &RunConfig) -> Result<Artifact, CliError> {
    let c = section(&config.jellium, "jellium")?;
    let r = jellium_point(c)?;
    let mut table = Table::new(&["p4_over_rho", "G"]);
    for (x, g) in tabulate_g(c.g_lo, c.g_hi, c.g_points)? {
        table.push(vec![x.into(), g.into()]);
    }
    Ok(Artifact {
        summary: format!(
            "jellium: rho = {:?}, e = {:?}, coefficient_rs = {:?}",
            r.rho, r.e_per_particle, r.coefficient_rs
        ),
        json: to_json(&r),
        table,
    })
}

// ------------------------------------------------------------------ sweep

fn sweep(config: &RunConfig) -> Result<Artifact, CliError> {
    let spec = section(&config.sweep, "sweep")?;
    spec.validate()?;
    let values = spec.values();
    let mut base = config.clone();
    base.command = spec.target;
    // Validate the binding once so a bad variable fails before any work.
    base.with_binding(spec.target, &spec.variable, values[0])?;

    if spec.target == Command::Bounds {
        let b = section(&base.bounds, "bounds")?.clone();
        if b.optimize {
            let ys = if spec.variable == "Y" { values.clone() } else { vec![b.y] };
            let (k, _) = optimize_constants(&b, &ys)?;
            let bb = base.bounds.as_mut().expect("checked above");
            bb.optimize = false;
            bb.constants = Some(k);
        }
    }

    let configs = values
        .iter()
        .map(|&v| base.with_binding(spec.target, &spec.variable, v))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = configs
        .par_iter()
        .zip(values.par_iter())
        .map(|(c, &v)| sweep_row(c, spec, v))
        .collect::<Result<Vec<Vec<Cell>>, _>>()?;

    let mut table = Table::new(&sweep_header(spec).iter().map(String::as_str).collect::<Vec<_>>());
    for r in rows {
        table.push(r);
    }
    if spec.target == Command::Jellium && matches!(spec.variable.as_str(), "rho" | "rs") {
        add_slope_column(&mut table)?;
    }
    Ok(Artifact {
        summary: format!(
            "sweep: {} over {} = {:?}..{:?} ({} points)",
            spec.target.name(),
            spec.variable,
            spec.start,
            spec.stop,
            spec.count
        ),
        json: table.to_json(),
        table,
    })
}

fn sweep_header(spec: &SweepSpec) -> Vec<String> {
    let var = spec.variable.clone();
    let fixed: &[&str] = match spec.target {
        Command::Scatter => &["a", "residual", "refinements"],
        Command::Bounds => &BOUNDS_COLUMNS,
        Command::Gp => &[
            "energy_per_particle",
            "chemical_potential",
            "energy_kinetic",
            "energy_trap",
            "energy_interaction",
            "residual",
            "iterations",
            "converged",
        ],
        Command::Jellium => &["rho", "e_per_particle", "coefficient_rs", "quadrature_error"],
        Command::Sweep => &[],
    };
    let mut h: Vec<String> = Vec::new();
    if !fixed.contains(&var.as_str()) {
        h.push(var);
    }
    h.extend(fixed.iter().map(|s| s.to_string()));
    h
}

fn sweep_row(c: &RunConfig, spec: &SweepSpec, v: f64) -> Result<Vec<Cell>, CliError> {
    let mut row: Vec<Cell> = Vec::new();
    let prefix = |row: &mut Vec<Cell>, fixed: &[&str]| {
        if !fixed.contains(&spec.variable.as_str()) {
            row.push(v.into());
        }
    };
    match spec.target {
        Command::Scatter => {
            let (_, _, sol) = solve_scatter(section(&c.scatter, "scatter")?)?;
            prefix(&mut row, &["a", "residual", "refinements"]);
            row.extend([sol.a.into(), sol.residual.into(), sol.refinements.into()]);
        }
        Command::Bounds => {
            let b = section(&c.bounds, "bounds")?;
            let r = evaluate_bound(b, c.precision, b.constants.unwrap_or_else(Constants::unit))?;
            prefix(&mut row, &BOUNDS_COLUMNS);
            row.extend(bound_row(&r));
        }
        Command::Gp => {
            let p = build_problem(section(&c.gp, "gp")?)?;
            let p = GpProblem { exec: Exec::Sequential, ..p };
            let (s, _) = solve_gp(&p)?;
            prefix(&mut row, &[]);
            row.extend([
                s.energy_per_particle.into(),
                s.chemical_potential.into(),
                s.energy_kinetic.into(),
                s.energy_trap.into(),
                s.energy_interaction.into(),
                s.residual.into(),
                s.iterations.into(),
                s.converged.into(),
            ]);
        }
        Command::Jellium => {
            let r = jellium_point(section(&c.jellium, "jellium")?)?;
            prefix(&mut row, &["rho", "e_per_particle", "coefficient_rs", "quadrature_error"]);
            row.extend([
                r.rho.into(),
                r.e_per_particle.into(),
                r.coefficient_rs.into(),
                r.quadrature_error.into(),
            ]);
        }
        Command::Sweep => unreachable!("validated"),
    }
    Ok(row)
}

/// Append the log-log slope of `|e_per_particle|` against `rho`.
fn add_slope_column(table: &mut Table) -> Result<(), CliError> {
    let col = |name: &str| table.header.iter().position(|h| h == name).expect("jellium columns");
    let (ir, ie) = (col("rho"), col("e_per_particle"));
    let get = |row: &Vec<Cell>, i: usize| match row[i] {
        Cell::Float(x) => x,
        _ => f64::NAN,
    };
    let rho: Vec<f64> = table.rows.iter().map(|r| get(r, ir)).collect();
    let e: Vec<f64> = table.rows.iter().map(|r| -get(r, ie)).collect();
    let slope = log_log_slope(&rho, &e)?;
    table.header.push("fitted_slope".into());
    for r in &mut table.rows {
        r.push(slope.into());
    }
    Ok(())
}
