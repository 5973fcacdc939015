//! Acceptance checks, one line per criterion. Exits nonzero if any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use bosegas::bounds::{
    dyson_bounds_hard_sphere, lhy_expansion, lower_bound, optimize_error_constant, upper_bound_ratio, Ansatz,
    CellMode, Exponents, GasParameter, OptimizeOptions, LHY_LOG_COEFF, LHY_SQRT_COEFF,
};
use bosegas::bounds::cells::cell_table;
use bosegas::gp::{gp_minimize, tf_closed_form, tf_minimize, GpProblem, GpSolution};
use bosegas::jellium::{
    bogolubov_coefficients, foldy_energy, infinite_mass_comparison, two_component_scaling, QuadratureSpec,
};
use bosegas::potentials::Walls;
use bosegas::scattering::{
    energy_identity_check, random_profiles, scattering_length, Dimension, DysonLemma, SoftPotential,
};
use bosegas::{Exec, PairPotential, TrapPotential, Units};

type Outcome = Result<String, String>;

struct Report {
    failed: Vec<usize>,
}

impl Report {
    fn run(&mut self, id: usize, title: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let mut outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let elapsed = start.elapsed();
        if let Some(b) = budget {
            if elapsed > b {
                outcome = Err(format!("took {elapsed:.2?}, budget {b:?}"));
            }
        }
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("[{tag}] {id:>2} {title} ({elapsed:.2?}): {detail}");
        if outcome.is_err() {
            self.failed.push(id);
        }
    }
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn units() -> Units {
    Units::dilute(1.0).unwrap()
}

fn c1_scattering_length() -> Outcome {
    let hard = scattering_length(&PairPotential::hard_core(1.0).unwrap(), &units(), Dimension::Three)
        .map_err(|e| e.to_string())?;
    ensure((hard - 1.0).abs() <= 1e-10, format!("hard core a = {hard}"))?;
    let mut worst: f64 = 0.0;
    for i in 0..=16 {
        let h = 10f64.powf(-2.0 + 0.25 * i as f64);
        let p = PairPotential::square_well(h, 1.0).unwrap();
        let a = scattering_length(&p, &units(), Dimension::Three).map_err(|e| e.to_string())?;
        let k = (h / 2.0).sqrt();
        let exact = 1.0 - k.tanh() / k;
        worst = worst.max((a / exact - 1.0).abs());
    }
    ensure(worst <= 1e-8, format!("square well rel err {worst:e}"))?;
    Ok(format!("|a - 1| = {:e}, square well max rel err {worst:e} over h in [1e-2, 1e2]", (hard - 1.0).abs()))
}

fn c2_energy_identity() -> Outcome {
    let p = PairPotential::hard_core(1.0).unwrap();
    let mut last = f64::INFINITY;
    let mut detail = Vec::new();
    for r in [2.0, 5.0, 10.0, 100.0, 1000.0] {
        let c = energy_identity_check(&p, &units(), r).map_err(|e| e.to_string())?;
        let err = (c.ratio - 1.0).abs();
        let x = c.a / r;
        let tol = 1.1 * (2.0 * x - x * x);
        ensure(err <= tol, format!("R/a = {r}: error {err:e} > {tol:e}"))?;
        ensure(err < last, format!("error does not shrink at R/a = {r}"))?;
        last = err;
        detail.push(format!("{r}:{err:.1e}"));
    }
    Ok(format!("error by R/a {}", detail.join(" ")))
}

fn c3_dyson_lemma() -> Outcome {
    let p = PairPotential::hard_core(1.0).unwrap();
    let r1 = 6.0;
    let us = [
        SoftPotential::Shell { inner: 1.0, outer: r1 },
        SoftPotential::Shell { inner: 3.0, outer: r1 },
        SoftPotential::Delta { radius: 2.0 },
        SoftPotential::Delta { radius: r1 },
        SoftPotential::Bump { center: 3.5, width: 2.0, weight: 1.0 },
    ];
    let mut min = f64::INFINITY;
    for dim in [Dimension::Three, Dimension::Two] {
        let lemma = DysonLemma::new(&p, &units(), dim).map_err(|e| e.to_string())?;
        let profiles = random_profiles(2024, 100, dim, 1.0, r1);
        let margins = Exec::Parallel.map(&profiles, |prof| {
            us.iter().map(|u| lemma.margin(u, prof, r1)).collect::<Result<Vec<f64>, _>>()
        });
        for m in margins {
            let m = m.map_err(|e| e.to_string())?;
            min = m.into_iter().fold(min, f64::min);
        }
    }
    ensure(min >= -1e-8, format!("min margin {min:e}"))?;
    Ok(format!("min margin {min:.3e} over 100 profiles x 5 U in 3D and 2D"))
}

fn c4_bound_bracket() -> Outcome {
    let grid: Vec<f64> = (0..9).map(|i| 10f64.powi(-24 + i)).collect();
    let opt = optimize_error_constant(&grid, Exponents::standard(), &OptimizeOptions::default())
        .map_err(|e| e.to_string())?;
    let ansatz = Ansatz::new(Exponents::standard(), opt.constants);
    let mut problems = Vec::new();
    let mut worst_upper: f64 = 0.0;
    let mut upper_over = 0;
    for &y in &grid {
        let gas = GasParameter::from_y(y, 1.0, Dimension::Three).unwrap();
        let r = lower_bound(&gas, &ansatz).map_err(|e| e.to_string())?;
        let upper = upper_bound_ratio(y).map_err(|e| e.to_string())?;
        if !r.valid || !(r.lower > 0.0 && r.lower <= 1.0) || r.lower > upper {
            problems.push(format!("Y = {y:e}: lower {} upper {upper} valid {}", r.lower, r.valid));
        }
        if 1.0 - r.lower > opt.c * y.powf(1.0 / 17.0) {
            problems.push(format!("Y = {y:e}: 1 - lower = {:e} > C Y^(1/17)", 1.0 - r.lower));
        }
        let ratio = (upper - 1.0) / y.cbrt();
        worst_upper = worst_upper.max(ratio);
        if ratio > 3.0 {
            upper_over += 1;
        }
    }
    if upper_over > 0 {
        problems.push(format!("|upper - 1| > 3 Y^(1/3) at {upper_over} of {} points", grid.len()));
    }
    let summary = format!("C = {:.4}, max |upper - 1| / Y^(1/3) = {worst_upper:.4} (limit 3)", opt.c);
    if problems.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", problems.join("; ")))
    }
}

fn c5_exponents() -> Outcome {
    let e = Exponents::standard();
    let identities = [
        ("alpha", e.alpha),
        ("3 beta - 1", e.beta * 3 - 1),
        ("1 - 3 beta + gamma", -(e.beta * 3) + e.gamma + 1),
        ("1 - alpha - 2 beta - gamma", -e.alpha - e.beta * 2 - e.gamma + 1),
    ];
    let bad: Vec<String> = identities
        .iter()
        .filter(|(_, v)| *v * 17 != 1.into())
        .map(|(name, v)| format!("{name} = {v}"))
        .collect();
    let conditions = e.conditions();
    let failing: Vec<&str> = conditions.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    if bad.is_empty() && failing.is_empty() {
        Ok(format!("all four equal 1/17; {} admissibility conditions pass", conditions.len()))
    } else {
        Err(format!(
            "not 1/17: [{}]; failing conditions: [{}] ({} of {} pass)",
            bad.join(", "),
            failing.join(", "),
            conditions.len() - failing.len(),
            conditions.len()
        ))
    }
}

fn c6_cells() -> Outcome {
    let ks: Vec<f64> = (0..=12).map(|i| 1.0 + 0.25 * i as f64).collect();
    let ps: Vec<u32> = (2..=24).collect();
    let analytic = cell_table(&ks, &ps, CellMode::Analytic, Exec::Parallel).map_err(|e| e.to_string())?;
    let brute = cell_table(&ks, &ps, CellMode::DEFAULT_BRUTE_FORCE, Exec::Parallel).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for (&(k, p, a), &(_, _, b)) in analytic.iter().zip(&brute) {
        ensure(b >= a - 1e-12, format!("k = {k}, p = {p}: brute {b} < analytic {a}"))?;
        if p as f64 >= 4.0 * k {
            ensure((a - k * (k - 1.0)).abs() <= 1e-12, format!("k = {k}, p = {p}: analytic {a} != k(k-1)"))?;
            checked += 1;
        }
    }
    Ok(format!("{} pairs, k(k-1) at {checked} pairs with p >= 4k", analytic.len()))
}

fn c7_dyson_constant() -> Outcome {
    let (lower, _) = dyson_bounds_hard_sphere(1e-6).map_err(|e| e.to_string())?;
    let exact = 1.0 / (10.0 * 2f64.sqrt());
    ensure((lower - exact).abs() <= 1e-15, format!("{lower} vs {exact}"))?;
    Ok(format!("lower = {lower}"))
}

fn c8_lhy() -> Outcome {
    let exact = 128.0 / (15.0 * PI.sqrt());
    ensure((LHY_SQRT_COEFF - exact).abs() <= 1e-12, format!("constant {LHY_SQRT_COEFF} vs {exact}"))?;
    // Read back through the series; 1 + c sqrt(x) rounds at 1e-16 / sqrt(x).
    let x = 1e-8;
    let read = (lhy_expansion(x).map_err(|e| e.to_string())? - 1.0 - LHY_LOG_COEFF * x * x.ln()) / x.sqrt();
    ensure((read - exact).abs() <= 1e-10, format!("series gives {read}"))?;
    Ok(format!("coefficient {LHY_SQRT_COEFF:.15} (|diff| {:e})", (LHY_SQRT_COEFF - exact).abs()))
}

fn harmonic(n: f64, a: f64) -> GpProblem {
    GpProblem::new(Dimension::Three, TrapPotential::isotropic(1.0).unwrap(), n, a).unwrap()
}

fn solve(p: &GpProblem) -> Result<GpSolution, String> {
    let s = gp_minimize(p).map_err(|e| e.to_string())?;
    ensure(s.converged, format!("GP flow did not converge (residual {:e})", s.residual))?;
    Ok(s)
}

fn c9_gp_limits() -> Outcome {
    let mut notes = Vec::new();

    // (i) noninteracting trap: N lambda, second order in h.
    let base = harmonic(10.0, 0.0);
    let lambda = base.trap.linear_ground_energy(3, &base.units).unwrap();
    let coarse = solve(&base)?;
    let e0 = (coarse.energy_per_particle / lambda - 1.0).abs();
    ensure(e0 <= 1e-4, format!("(i) rel err {e0:e} on default grid"))?;
    let mesh = base.discretize().map_err(|e| e.to_string())?;
    let (cells, extent) = (mesh.len(), mesh.max_spacing() * mesh.len() as f64);
    let mut fine_p = base.clone();
    fine_p.grid.points = Some(2 * cells);
    fine_p.grid.extent = Some(extent);
    let fine = solve(&fine_p)?;
    let e1 = (fine.energy_per_particle / lambda - 1.0).abs();
    let order = (e0 / e1).log2();
    ensure((order - 2.0).abs() <= 0.2, format!("(i) observed order {order:.3}"))?;
    notes.push(format!("(i) err {e0:.2e} -> {e1:.2e}, order {order:.2}"));

    // (ii) reflecting box at Na/L = 1e-3.
    let (l, n, a): (f64, f64, f64) = (10.0, 1000.0, 1e-5);
    let expect = 4.0 * PI * a * n * n / l.powi(3) / n;
    let boxed = GpProblem::new(Dimension::Three, TrapPotential::hard_box(l, Walls::Neumann).unwrap(), n, a).unwrap();
    let sb = solve(&boxed)?;
    let dev = (sb.energy_per_particle / expect - 1.0).abs();
    ensure(dev <= 0.03, format!("(ii) box E/N {} vs {expect}", sb.energy_per_particle))?;
    let dirichlet =
        GpProblem::new(Dimension::Three, TrapPotential::hard_box(l, Walls::Dirichlet).unwrap(), n, a).unwrap();
    let sd = gp_minimize(&dirichlet).map_err(|e| e.to_string())?;
    notes.push(format!(
        "(ii) box {:.2}% off (Dirichlet walls for reference: E/N = {:.3e} vs {expect:.3e})",
        100.0 * dev,
        sd.energy_per_particle
    ));

    // (iii) TF below GP, (iv) residuals.
    let mut aniso = harmonic(500.0, 2e-3);
    aniso.trap = TrapPotential::harmonic(vec![1.0, 1.5, 2.0]).unwrap();
    let mut planar = GpProblem::new(Dimension::Two, TrapPotential::isotropic(1.0).unwrap(), 500.0, 1e-3).unwrap();
    planar.grid.points = None;
    let problems = [harmonic(100.0, 0.01), harmonic(1e4, 1e-2), aniso, planar, boxed];
    let mut worst_res: f64 = sb.residual.max(coarse.residual).max(fine.residual);
    for (i, p) in problems.iter().enumerate() {
        let gp = solve(p)?;
        let tf = tf_minimize(p).map_err(|e| e.to_string())?;
        worst_res = worst_res.max(gp.residual);
        // Same energy up to rounding where TF is exact (uniform box state).
        ensure(
            tf.energy_per_particle <= gp.energy_per_particle * (1.0 + 1e-12),
            format!("(iii) problem {i}: TF {} > GP {}", tf.energy_per_particle, gp.energy_per_particle),
        )?;
        // Closed form for harmonic traps in 3D.
        if let (Dimension::Three, Ok(closed)) = (p.dimension, tf_closed_form(p, 4.0 * PI * p.units.mu() * p.a)) {
            ensure(
                closed.energy_per_particle <= gp.energy_per_particle,
                format!("(iii) problem {i}: closed-form TF above GP"),
            )?;
        }
    }
    ensure(worst_res < 1e-6, format!("(iv) residual {worst_res:e}"))?;
    notes.push(format!("(iii) TF <= GP on {} problems, (iv) max residual {worst_res:.1e}", problems.len()));
    Ok(notes.join("; "))
}

fn c10_foldy() -> Outcome {
    let spec = QuadratureSpec::default();
    let r = foldy_energy(1.0, &spec).map_err(|e| e.to_string())?;
    ensure((r.coefficient_rs - 0.402).abs() <= 0.002, format!("coefficient {}", r.coefficient_rs))?;
    let rhos: Vec<f64> = (0..=6).map(|i| 10f64.powi(i - 3)).collect();
    let fit = infinite_mass_comparison(&rhos, &spec, Exec::Parallel).map_err(|e| e.to_string())?;
    ensure((fit.slope_per_particle - 0.25).abs() <= 0.005, format!("slope {}", fit.slope_per_particle))?;
    let (mut worst_res, mut worst_collapse): (f64, f64) = (0.0, 0.0);
    for i in 0..=80 {
        let p = 10f64.powf(-4.0 + 0.1 * i as f64);
        for rho in [1e-3, 1.0, 1e3] {
            let m = bogolubov_coefficients(p, rho).map_err(|e| e.to_string())?;
            let (r1, r2) = m.residuals();
            worst_res = worst_res.max(r1).max(r2);
            let scaled = bogolubov_coefficients(2.0 * p, 16.0 * rho).map_err(|e| e.to_string())?;
            worst_collapse = worst_collapse.max((scaled.beta - m.beta).abs() / m.beta);
        }
    }
    ensure(worst_res < 1e-12, format!("coefficient residual {worst_res:e}"))?;
    ensure(worst_collapse <= 4.0 * f64::EPSILON, format!("beta collapse {worst_collapse:e}"))?;
    Ok(format!(
        "coefficient {:.5}, slope {:.6}, residual {worst_res:.1e}, collapse {worst_collapse:.1e}",
        r.coefficient_rs, fit.slope_per_particle
    ))
}

fn c11_two_component() -> Outcome {
    let c_f = foldy_energy(1.0, &QuadratureSpec::default()).map_err(|e| e.to_string())?.e_per_particle.abs();
    let ns: Vec<f64> = (0..=12).map(|i| 10f64.powf(2.0 + 0.5 * i as f64)).collect();
    let fit = two_component_scaling(&ns, 0.5, c_f).map_err(|e| e.to_string())?;
    ensure((fit.energy_slope - 1.4).abs() <= 0.01, format!("energy slope {}", fit.energy_slope))?;
    ensure((fit.length_slope + 0.2).abs() <= 0.01, format!("length slope {}", fit.length_slope))?;
    Ok(format!("|E| ~ N^{:.6}, L ~ N^{:.6}", fit.energy_slope, fit.length_slope))
}

const RUNS: [(&str, &str); 6] = [
    (
        "scatter",
        "command = \"scatter\"\nseed = 11\n[scatter.potential]\nkind = \"square_well\"\nheight = 4.0\nrange = 1.0\n\
         [scatter.dyson]\nprofiles = 25\nr1 = 4.0\nsoft = { kind = \"shell\", inner = 1.0, outer = 4.0 }\n",
    ),
    ("bounds", "command = \"bounds\"\n[bounds]\nY = 1e-20\noptimize = true\n"),
    (
        "sweep",
        "command = \"sweep\"\n[output]\nformat = \"csv\"\n[bounds]\nY = 1e-20\n\
         [sweep]\ntarget = \"bounds\"\nvariable = \"Y\"\nscale = \"geometric\"\nstart = 1e-24\nstop = 1e-16\ncount = 9\n",
    ),
    ("gp", "command = \"gp\"\n[gp]\nN = 200.0\na = 0.005\n[gp.trap]\nkind = \"harmonic\"\nomega = [1.0]\n"),
    ("gp-csv", "command = \"gp\"\n[output]\nformat = \"csv\"\n[gp]\nN = 200.0\na = 0.005\n[gp.trap]\nkind = \"harmonic\"\nomega = [1.0]\n"),
    ("jellium", "command = \"jellium\"\n[output]\nformat = \"csv\"\n[jellium]\nrho = 1.0\n"),
];

fn run_once(config: &Path, out: &Path) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_bosegas"))
        .arg("run")
        .arg(config)
        .arg("--output")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), String::from_utf8_lossy(&status.stderr).into_owned())?;
    std::fs::read(out).map_err(|e| e.to_string())
}

fn c12_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut bytes = 0;
    for (name, text) in RUNS {
        let cfg = dir.path().join(format!("{name}.toml"));
        std::fs::write(&cfg, text).map_err(|e| e.to_string())?;
        let first = run_once(&cfg, &dir.path().join(format!("{name}.1")))?;
        let second = run_once(&cfg, &dir.path().join(format!("{name}.2")))?;
        ensure(first == second, format!("{name}: outputs differ"))?;
        bytes += first.len();
    }
    Ok(format!("{} configs, {bytes} bytes identical across two runs", RUNS.len()))
}

fn main() {
    let mut report = Report { failed: Vec::new() };
    let s = |x| Some(Duration::from_secs(x));
    report.run(1, "scattering length", s(1), c1_scattering_length);
    report.run(2, "energy identity", None, c2_energy_identity);
    report.run(3, "Dyson lemma margins", s(10), c3_dyson_lemma);
    report.run(4, "bound bracket and limit", None, c4_bound_bracket);
    report.run(5, "exponent identities", None, c5_exponents);
    report.run(6, "cell minimization", s(30), c6_cells);
    report.run(7, "hard-sphere lower constant", None, c7_dyson_constant);
    report.run(8, "LHY coefficient", None, c8_lhy);
    report.run(9, "GP limits", s(60), c9_gp_limits);
    report.run(10, "Foldy coefficient", s(5), c10_foldy);
    report.run(11, "two-component law", None, c11_two_component);
    report.run(12, "CLI determinism", None, c12_determinism);
    if report.failed.is_empty() {
        println!("acceptance: all 12 criteria pass");
    } else {
        println!("acceptance: {} of 12 fail: {:?}", report.failed.len(), report.failed);
        std::process::exit(1);
    }
}
