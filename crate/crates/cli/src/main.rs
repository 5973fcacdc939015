//! `bosegas`: scattering lengths, energy bounds, GP ground states and
//! jellium energies from the command line.

mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use toml::{Table, Value};

use crate::config::{set_value, Command, Format, RunConfig};
use crate::error::CliError;
use crate::output::{json_text, write_atomic};

fn version() -> String {
    format!(
        "{} (library {})\nunits: dilute gas hbar = 1, mu = hbar^2/2m = 1 unless set; \
         jellium hbar = m = 1 with e^2 = 1/(4 pi)",
        env!("CARGO_PKG_VERSION"),
        bosegas::VERSION
    )
}

#[derive(Parser, Debug)]
#[command(name = "bosegas", about = "Numerics for dilute and charged Bose gases")]
struct Cli {
    /// Worker threads for parallel evaluation (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// TOML run configuration; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output format: json or csv.
    #[arg(long)]
    out: Option<String>,
    /// Output file (standard output when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// double or extended.
    #[arg(long)]
    precision: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Run a configuration file as is.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Zero-energy scattering solution and scattering length.
    Scatter {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dim: Option<u8>,
        #[arg(long)]
        mu: Option<f64>,
        /// zero, hard_core or square_well (other kinds via --config).
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        height: Option<f64>,
        #[arg(long)]
        range: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long)]
        points: Option<i64>,
    },
    /// Upper and lower bounds on the energy per particle.
    Bounds {
        #[command(flatten)]
        common: Common,
        /// A value, or `start:stop:count` for a geometric range.
        #[arg(long = "Y")]
        y: Option<String>,
        #[arg(long)]
        exponents: Option<String>,
        #[arg(long)]
        c_eps: Option<f64>,
        #[arg(long)]
        c_ell: Option<f64>,
        #[arg(long)]
        c_r: Option<f64>,
        #[arg(long)]
        optimize: bool,
        /// pi or pi-squared.
        #[arg(long)]
        gap_convention: Option<String>,
        #[arg(long)]
        r0_over_a: Option<f64>,
        #[arg(long)]
        box_length: Option<f64>,
    },
    /// Gross-Pitaevskii or Thomas-Fermi ground state in a trap.
    Gp {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dim: Option<u8>,
        /// harmonic, box or tabulated_radial.
        #[arg(long)]
        trap: Option<String>,
        /// Comma-separated frequencies.
        #[arg(long)]
        omega: Option<String>,
        #[arg(long)]
        side: Option<f64>,
        /// dirichlet or neumann.
        #[arg(long)]
        walls: Option<String>,
        #[arg(long = "N")]
        n: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        /// gp, tf or 2dlog.
        #[arg(long)]
        mode: Option<String>,
        /// auto, radial or tensor.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        grid_points: Option<i64>,
        #[arg(long)]
        grid_extent: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        max_iterations: Option<i64>,
    },
    /// Bogolubov correlation energy of the charged Bose gas.
    Jellium {
        #[command(flatten)]
        common: Common,
        /// A value, or `start:stop:count` for a geometric range.
        #[arg(long)]
        rho: Option<String>,
        #[arg(long)]
        rs: Option<f64>,
        #[arg(long)]
        rel_tol: Option<f64>,
        #[arg(long)]
        q_max: Option<f64>,
    },
    /// Evaluate a subcommand over a range of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        variable: Option<String>,
        /// linear or geometric.
        #[arg(long)]
        scale: Option<String>,
        #[arg(long)]
        start: Option<f64>,
        #[arg(long)]
        stop: Option<f64>,
        #[arg(long)]
        count: Option<i64>,
    },
}

/// Flag overlay: dotted config keys with their values.
#[derive(Default)]
struct Overlay(Vec<(String, Value)>);

impl Overlay {
    fn put<T: Into<Value>>(&mut self, key: &str, v: Option<T>) {
        if let Some(v) = v {
            self.0.push((key.to_string(), v.into()));
        }
    }
}

fn parse_range(s: &str, name: &str) -> Result<Option<(f64, f64, i64)>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => Ok(None),
        3 => {
            let bad = || CliError::Parse(format!("--{name} range must be start:stop:count"));
            let start = parts[0].trim().parse().map_err(|_| bad())?;
            let stop = parts[1].trim().parse().map_err(|_| bad())?;
            let count = parts[2].trim().parse().map_err(|_| bad())?;
            Ok(Some((start, stop, count)))
        }
        _ => Err(CliError::Parse(format!("cannot parse --{name} {s:?}"))),
    }
}

fn parse_f64(s: &str, name: &str) -> Result<f64, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Parse(format!("--{name} expects a number, got {s:?}")))
}

/// Flags that name a range turn the run into a geometric sweep.
fn range_or_value(
    o: &mut Overlay,
    target: Command,
    key: &str,
    raw: Option<&String>,
    command: &mut Command,
) -> Result<(), CliError> {
    let Some(raw) = raw else { return Ok(()) };
    match parse_range(raw, key)? {
        None => o.put(&format!("{}.{key}", target.name()), Some(parse_f64(raw, key)?)),
        Some((start, stop, count)) => {
            // The swept key still needs a placeholder for deserialization.
            o.put(&format!("{}.{key}", target.name()), Some(start));
            o.put("sweep.target", Some(target.name()));
            o.put("sweep.variable", Some(key));
            o.put("sweep.scale", Some("geometric"));
            o.put("sweep.start", Some(start));
            o.put("sweep.stop", Some(stop));
            o.put("sweep.count", Some(count));
            *command = Command::Sweep;
        }
    }
    Ok(())
}

fn load(path: &Path) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path)?;
    text.parse::<Table>()
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn build(sub: &Sub) -> Result<RunConfig, CliError> {
    let mut o = Overlay::default();
    let (common, command) = match sub {
        Sub::Run { config, out, output } => {
            let mut table = load(config)?;
            if let Some(f) = out {
                set_value(&mut table, "output.format", Value::from(f.as_str()))?;
            }
            if let Some(p) = output {
                set_value(&mut table, "output.path", Value::from(p.display().to_string()))?;
            }
            return RunConfig::from_table(table);
        }
        Sub::Scatter {
            common,
            dim,
            mu,
            kind,
            radius,
            height,
            range,
            r_max,
            points,
        } => {
            o.put("scatter.dimension", dim.map(i64::from));
            o.put("scatter.mu", *mu);
            o.put("scatter.potential.kind", kind.clone());
            o.put("scatter.potential.radius", *radius);
            o.put("scatter.potential.height", *height);
            o.put("scatter.potential.range", *range);
            o.put("scatter.r_max", *r_max);
            o.put("scatter.points", *points);
            (common, Command::Scatter)
        }
        Sub::Bounds {
            common,
            y,
            exponents,
            c_eps,
            c_ell,
            c_r,
            optimize,
            gap_convention,
            r0_over_a,
            box_length,
        } => {
            let mut command = Command::Bounds;
            range_or_value(&mut o, Command::Bounds, "Y", y.as_ref(), &mut command)?;
            o.put("bounds.exponents", exponents.clone());
            o.put("bounds.constants.c_eps", *c_eps);
            o.put("bounds.constants.c_ell", *c_ell);
            o.put("bounds.constants.c_r", *c_r);
            o.put("bounds.optimize", optimize.then_some(true));
            o.put("bounds.gap_convention", gap_convention.clone());
            o.put("bounds.r0_over_a", *r0_over_a);
            o.put("bounds.box_length", *box_length);
            (common, command)
        }
        Sub::Gp {
            common,
            dim,
            trap,
            omega,
            side,
            walls,
            n,
            a,
            mode,
            grid,
            grid_points,
            grid_extent,
            mu,
            tolerance,
            max_iterations,
        } => {
            o.put("gp.dimension", dim.map(i64::from));
            o.put("gp.trap.kind", trap.clone());
            if let Some(w) = omega {
                let list = w
                    .split(',')
                    .map(|x| parse_f64(x, "omega").map(Value::from))
                    .collect::<Result<Vec<_>, _>>()?;
                o.put("gp.trap.omega", Some(Value::Array(list)));
            }
            o.put("gp.trap.side", *side);
            o.put("gp.trap.walls", walls.clone());
            o.put("gp.N", *n);
            o.put("gp.a", *a);
            o.put("gp.mode", mode.clone());
            o.put("gp.grid.geometry", grid.clone());
            o.put("gp.grid.points", *grid_points);
            o.put("gp.grid.extent", *grid_extent);
            o.put("gp.mu", *mu);
            o.put("gp.tolerance", *tolerance);
            o.put("gp.max_iterations", *max_iterations);
            (common, Command::Gp)
        }
        Sub::Jellium {
            common,
            rho,
            rs,
            rel_tol,
            q_max,
        } => {
            let mut command = Command::Jellium;
            range_or_value(&mut o, Command::Jellium, "rho", rho.as_ref(), &mut command)?;
            o.put("jellium.rs", *rs);
            o.put("jellium.rel_tol", *rel_tol);
            o.put("jellium.q_max", *q_max);
            (common, command)
        }
        Sub::Sweep {
            common,
            target,
            variable,
            scale,
            start,
            stop,
            count,
        } => {
            o.put("sweep.target", target.clone());
            o.put("sweep.variable", variable.clone());
            o.put("sweep.scale", scale.clone());
            o.put("sweep.start", *start);
            o.put("sweep.stop", *stop);
            o.put("sweep.count", *count);
            (common, Command::Sweep)
        }
    };
    let mut table = match &common.config {
        Some(p) => load(p)?,
        None => Table::new(),
    };
    if let Some(Value::String(c)) = table.get("command") {
        // Sweeps accept any base config; other commands need their own.
        if command != Command::Sweep && c != command.name() {
            return Err(CliError::Parse(format!("config is for `{c}`, not `{}`", command.name())));
        }
    }
    set_value(&mut table, "command", Value::from(command.name()))?;
    o.put("output.format", common.out.clone());
    o.put("output.path", common.output.as_ref().map(|p| p.display().to_string()));
    o.put("seed", common.seed.map(|s| s as i64));
    o.put("precision", common.precision.clone());
    for (k, v) in o.0 {
        set_value(&mut table, &k, v)?;
    }
    RunConfig::from_table(table)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let config = build(&cli.command)?;
    let artifact = commands::run(&config)?;
    let text = match config.output.format {
        Format::Json => json_text(&artifact.json),
        Format::Csv => artifact.table.to_csv(),
    };
    match &config.output.path {
        Some(p) => write_atomic(p, &text)?,
        None => {
            use std::io::Write;
            match std::io::stdout().write_all(text.as_bytes()) {
                // A closed reader (`| head`) is not a failed run.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => return Ok(()),
                r => r?,
            }
        }
    }
    eprintln!("{}", artifact.summary);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let version: &'static str = Box::leak(version().into_boxed_str());
    let matches = Cli::command().version(version).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let result = match cli.jobs {
        Some(0) => Err(CliError::Parse("--jobs must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(CliError::Parse(format!("cannot start {n} threads: {e}"))),
        },
        None => execute(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
