//! Run configuration: a TOML document with one section per subcommand.
//!
//! Command-line flags are written into the same document under their config
//! keys before deserialization, so a flag and its key always mean the same
//! thing.

use std::path::PathBuf;

use bosegas::bounds::{Constants, GapConvention};
use bosegas::gp::GridSpec;
use bosegas::potentials::Walls;
use bosegas::scattering::SoftPotential;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Scatter,
    Bounds,
    Gp,
    Jellium,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Scatter => "scatter",
            Command::Bounds => "bounds",
            Command::Gp => "gp",
            Command::Jellium => "jellium",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    /// Doubles, switching to double-double where the bound needs it.
    #[default]
    Double,
    /// Double-double throughout the lower-bound composition.
    Extended,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    /// Target file; standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default)]
    pub output: Output,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatter: Option<ScatterConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gp: Option<GpConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jellium: Option<JelliumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

fn one() -> f64 {
    1.0
}

fn three() -> u8 {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Zero,
    HardCore {
        radius: f64,
    },
    SquareWell {
        height: f64,
        range: f64,
    },
    Tabulated {
        r: Vec<f64>,
        v: Vec<f64>,
    },
    PowerTail {
        core: Box<PotentialConfig>,
        amplitude: f64,
        eps: f64,
        tail_start: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DysonConfig {
    pub profiles: usize,
    pub r1: f64,
    pub soft: SoftPotential,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterConfig {
    #[serde(default = "three")]
    pub dimension: u8,
    #[serde(default = "one")]
    pub mu: f64,
    pub potential: PotentialConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dyson: Option<DysonConfig>,
}

fn standard_exponents() -> String {
    "1/17,6/17,3/17".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    #[serde(rename = "Y")]
    pub y: f64,
    #[serde(default = "standard_exponents")]
    pub exponents: String,
    /// Ansatz constants; unit constants when absent and not optimizing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<Constants>,
    /// Tune the constants on the requested `Y` values first.
    #[serde(default)]
    pub optimize: bool,
    #[serde(default)]
    pub gap_convention: GapConvention,
    #[serde(default = "one")]
    pub r0_over_a: f64,
    /// Side of a finite box in units of `a`; enables the box-size check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_length: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrapConfig {
    Harmonic {
        omega: Vec<f64>,
    },
    Box {
        side: f64,
        #[serde(default = "dirichlet")]
        walls: Walls,
    },
    TabulatedRadial {
        r: Vec<f64>,
        v: Vec<f64>,
    },
}

fn dirichlet() -> Walls {
    Walls::Dirichlet
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum GpMode {
    /// Full functional; log coupling in 2D.
    #[default]
    #[serde(rename = "gp")]
    Gp,
    #[serde(rename = "tf")]
    Tf,
    #[serde(rename = "2dlog")]
    Log2d,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitScanConfig {
    #[serde(rename = "Na")]
    pub na: f64,
    #[serde(rename = "N")]
    pub n: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpConfig {
    #[serde(default = "three")]
    pub dimension: u8,
    pub trap: TrapConfig,
    #[serde(rename = "N")]
    pub n: f64,
    pub a: f64,
    #[serde(default)]
    pub mode: GpMode,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "one")]
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    /// Replace the single solve by a fixed-`Na` scan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_scan: Option<LimitScanConfig>,
}

fn g_lo() -> f64 {
    1e-4
}

fn g_hi() -> f64 {
    1e4
}

fn g_points() -> usize {
    81
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JelliumConfig {
    /// Exactly one of `rho` and `rs`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_max: Option<f64>,
    /// Range of `p^4 / rho` for the CSV table of `G`.
    #[serde(default = "g_lo")]
    pub g_lo: f64,
    #[serde(default = "g_hi")]
    pub g_hi: f64,
    #[serde(default = "g_points")]
    pub g_points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Geometric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Subcommand whose section supplies the fixed bindings.
    pub target: Command,
    /// Key within that section, dotted for nested keys (`potential.radius`).
    pub variable: String,
    pub scale: Scale,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.target == Command::Sweep {
            return Err(CliError::Parse("sweep.target cannot be sweep".into()));
        }
        if self.count < 2 {
            return Err(CliError::Parse("sweep.count must be at least 2".into()));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(CliError::Parse("sweep endpoints must be finite".into()));
        }
        if self.scale == Scale::Geometric && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(CliError::Parse("geometric sweeps need positive endpoints".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    return self.stop;
                }
                let t = i as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => self.start + t * (self.stop - self.start),
                    Scale::Geometric => self.start * (self.stop / self.start).powf(t),
                }
            })
            .collect()
    }
}

impl RunConfig {
    pub fn from_table(table: Table) -> Result<Self, CliError> {
        let config: RunConfig = Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Parse(e.message().to_string()))?;
        config.check_sections()?;
        Ok(config)
    }

    #[cfg(test)]
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| CliError::Parse(e.to_string()))?;
        Self::from_table(table)
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }

    fn check_sections(&self) -> Result<(), CliError> {
        let missing = |name: &str| CliError::Parse(format!("missing [{name}] section"));
        match self.command {
            Command::Scatter if self.scatter.is_none() => Err(missing("scatter")),
            Command::Bounds if self.bounds.is_none() => Err(missing("bounds")),
            Command::Gp if self.gp.is_none() => Err(missing("gp")),
            Command::Jellium if self.jellium.is_none() => Err(missing("jellium")),
            Command::Sweep => {
                let spec = self.sweep.as_ref().ok_or_else(|| missing("sweep"))?;
                spec.validate()
            }
            _ => Ok(()),
        }
    }

    /// The config with `section.key = value`; integers stay integers.
    pub fn with_binding(&self, section: Command, key: &str, value: f64) -> Result<Self, CliError> {
        let mut table = match Value::try_from(self).map_err(|e| CliError::Parse(e.to_string()))? {
            Value::Table(t) => t,
            _ => unreachable!("configs serialize to tables"),
        };
        let path: Vec<&str> = std::iter::once(section.name()).chain(key.split('.')).collect();
        set_path(&mut table, &path, value, true)?;
        Self::from_table(table)
    }
}

/// Write `value` at `path`, creating intermediate tables. With `numeric`, an
/// existing integer slot keeps its type.
fn set_path(table: &mut Table, path: &[&str], value: f64, numeric: bool) -> Result<(), CliError> {
    let (last, parents) = path.split_last().expect("nonempty path");
    let mut t = table;
    for p in parents {
        let entry = t.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        t = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Parse(format!("{p} is not a section")))?;
    }
    let v = match t.get(*last) {
        Some(Value::Integer(_)) if numeric => {
            if value.fract() != 0.0 || value < 0.0 {
                return Err(CliError::Parse(format!("{last} takes nonnegative integers, got {value}")));
            }
            Value::Integer(value as i64)
        }
        Some(Value::Table(_) | Value::Array(_)) => {
            return Err(CliError::Parse(format!("{} is not a scalar parameter", path.join("."))));
        }
        _ => Value::Float(value),
    };
    t.insert(last.to_string(), v);
    Ok(())
}

/// Insert a flag value under a dotted key.
pub fn set_value(table: &mut Table, dotted: &str, value: Value) -> Result<(), CliError> {
    let path: Vec<&str> = dotted.split('.').collect();
    let (last, parents) = path.split_last().expect("nonempty key");
    let mut t = table;
    for p in parents {
        let entry = t.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        t = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Parse(format!("{p} is not a section")))?;
    }
    t.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_named() {
        let err = RunConfig::parse("command = \"bounds\"\n[bounds]\nY = 1e-20\nbogus = 3\n").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let err = RunConfig::parse(
            "command = \"scatter\"\n[scatter.potential]\nkind = \"hard_core\"\nradius = 1\nheight = 2\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("height"), "{err}");
    }

    #[test]
    fn empty_config_is_rejected() {
        assert!(matches!(RunConfig::parse(""), Err(CliError::Parse(_))));
    }

    #[test]
    fn bindings_keep_integer_slots() {
        let c = RunConfig::parse(
            "command = \"scatter\"\n[scatter]\npoints = 400\n[scatter.potential]\nkind = \"hard_core\"\nradius = 1\n",
        )
        .unwrap();
        let d = c.with_binding(Command::Scatter, "points", 800.0).unwrap();
        assert_eq!(d.scatter.unwrap().points, Some(800));
        let e = c.with_binding(Command::Scatter, "potential.radius", 2.0).unwrap();
        assert_eq!(e.scatter.unwrap().potential, PotentialConfig::HardCore { radius: 2.0 });
        assert!(c.with_binding(Command::Scatter, "nonsense", 1.0).is_err());
    }

    #[test]
    fn sweep_values() {
        let s = SweepSpec {
            target: Command::Bounds,
            variable: "Y".into(),
            scale: Scale::Geometric,
            start: 1e-24,
            stop: 1e-16,
            count: 9,
        };
        let v = s.values();
        assert_eq!(v.len(), 9);
        assert!((v[1] / 1e-23 - 1.0).abs() < 1e-12);
        assert_eq!(v[8], 1e-16);
        assert!(SweepSpec { count: 1, ..s.clone() }.validate().is_err());
        assert!(SweepSpec { start: -1.0, ..s }.validate().is_err());
    }

    mod round_trip {
        use super::*;
        use bosegas::gp::GridGeometry;
        use proptest::prelude::*;

        fn pos() -> impl Strategy<Value = f64> {
            (-30i32..30, 1.0f64..10.0).prop_map(|(e, m)| m * 10f64.powi(e))
        }

        fn potential() -> impl Strategy<Value = PotentialConfig> {
            let leaf = prop_oneof![
                Just(PotentialConfig::Zero),
                pos().prop_map(|radius| PotentialConfig::HardCore { radius }),
                (pos(), pos()).prop_map(|(height, range)| PotentialConfig::SquareWell { height, range }),
                proptest::collection::vec((pos(), pos()), 2..6).prop_map(|pts| {
                    let (r, v) = pts.into_iter().unzip();
                    PotentialConfig::Tabulated { r, v }
                }),
            ];
            leaf.prop_recursive(2, 4, 1, |inner| {
                (inner, pos(), pos(), pos()).prop_map(|(core, amplitude, eps, tail_start)| {
                    PotentialConfig::PowerTail { core: Box::new(core), amplitude, eps, tail_start }
                })
            })
        }

        fn section() -> impl Strategy<Value = RunConfig> {
            let base = (any::<u64>(), any::<bool>(), any::<bool>()).prop_map(|(seed, ext, csv)| RunConfig {
                command: Command::Bounds,
                seed: seed >> 1,
                precision: if ext { Precision::Extended } else { Precision::Double },
                output: Output { path: None, format: if csv { Format::Csv } else { Format::Json } },
                scatter: None,
                bounds: None,
                gp: None,
                jellium: None,
                sweep: None,
            });
            prop_oneof![
                (base.clone(), pos(), any::<bool>(), proptest::option::of((pos(), pos(), pos())), proptest::option::of(pos()))
                    .prop_map(|(mut c, y, optimize, k, box_length)| {
                        c.bounds = Some(BoundsConfig {
                            y,
                            exponents: standard_exponents(),
                            constants: k.map(|(c_eps, c_ell, c_r)| Constants { c_eps, c_ell, c_r }),
                            optimize,
                            gap_convention: if optimize { GapConvention::PiSquared } else { GapConvention::Pi },
                            r0_over_a: 1.0,
                            box_length,
                        });
                        c
                    }),
                (base.clone(), potential(), proptest::option::of(1usize..5000), pos()).prop_map(|(mut c, potential, points, mu)| {
                    c.command = Command::Scatter;
                    c.scatter = Some(ScatterConfig { dimension: 3, mu, potential, r_max: None, points, dyson: None });
                    c
                }),
                (base.clone(), pos(), pos(), 1usize..6, any::<bool>()).prop_map(|(mut c, n, a, k, boxed)| {
                    c.command = Command::Gp;
                    let trap = if boxed {
                        TrapConfig::Box { side: a, walls: Walls::Neumann }
                    } else {
                        TrapConfig::Harmonic { omega: vec![n; k] }
                    };
                    c.gp = Some(GpConfig {
                        dimension: 3,
                        trap,
                        n,
                        a,
                        mode: GpMode::Tf,
                        grid: GridSpec { geometry: GridGeometry::Tensor, points: Some(k * 8), extent: Some(a) },
                        mu: 0.5,
                        tolerance: Some(a),
                        max_iterations: None,
                        limit_scan: Some(LimitScanConfig { na: a, n: vec![n, 2.0 * n] }),
                    });
                    c
                }),
                (base, pos(), pos(), 2usize..50, any::<bool>()).prop_map(|(mut c, lo, hi, count, rs)| {
                    c.command = Command::Sweep;
                    c.jellium = Some(JelliumConfig {
                        rho: (!rs).then_some(lo),
                        rs: rs.then_some(lo),
                        rel_tol: None,
                        q_max: Some(hi),
                        g_lo: lo,
                        g_hi: hi,
                        g_points: count,
                    });
                    c.sweep = Some(SweepSpec {
                        target: Command::Jellium,
                        variable: "rho".into(),
                        scale: Scale::Geometric,
                        start: lo,
                        stop: hi,
                        count,
                    });
                    c
                }),
            ]
        }

        proptest! {
            #[test]
            fn parse_inverts_serialize(c in section()) {
                let text = c.to_toml();
                prop_assert_eq!(RunConfig::parse(&text).unwrap(), c, "{}", text);
            }
        }
    }
}
