//! Pair potentials and trap potentials.
//!
//! Pair potentials are nonnegative and spherically symmetric. Hard cores are
//! represented by [`PotentialValue::Infinite`] rather than by a large finite
//! number; solvers start at the core edge with a vanishing wave function.

use serde::{Deserialize, Serialize};

use crate::error::{require_nonnegative, require_positive, Error, Result};
use crate::units::Units;

/// Value of a pair potential at a given radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PotentialValue {
    Finite(f64),
    Infinite,
}

impl PotentialValue {
    pub fn is_infinite(self) -> bool {
        matches!(self, PotentialValue::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            PotentialValue::Finite(v) => Some(v),
            PotentialValue::Infinite => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    /// `v = 0` everywhere.
    Zero,
    /// `v = infinity` for `r < radius`, zero otherwise.
    HardCore { radius: f64 },
    /// Repulsive step of height `height` on `[0, range)`.
    SquareWell { height: f64, range: f64 },
    /// Linear interpolation of samples; constant below the first sample and
    /// zero beyond the last.
    Tabulated { r: Vec<f64>, v: Vec<f64> },
    /// A finite-range part plus `amplitude * r^-(3+eps)` for `r >= tail_start`.
    PowerTail {
        core: Box<PairPotential>,
        amplitude: f64,
        eps: f64,
        tail_start: f64,
    },
}

/// A nonnegative, spherically symmetric two-body potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialKind", into = "PotentialKind")]
pub struct PairPotential {
    kind: PotentialKind,
}

impl TryFrom<PotentialKind> for PairPotential {
    type Error = Error;

    fn try_from(kind: PotentialKind) -> Result<Self> {
        match kind {
            PotentialKind::Zero => Ok(PairPotential::zero()),
            PotentialKind::HardCore { radius } => PairPotential::hard_core(radius),
            PotentialKind::SquareWell { height, range } => PairPotential::square_well(height, range),
            PotentialKind::Tabulated { r, v } => PairPotential::tabulated(r, v),
            PotentialKind::PowerTail {
                core,
                amplitude,
                eps,
                tail_start,
            } => PairPotential::power_tail(*core, amplitude, eps, tail_start),
        }
    }
}

impl From<PairPotential> for PotentialKind {
    fn from(p: PairPotential) -> Self {
        p.kind
    }
}

impl PairPotential {
    pub fn zero() -> Self {
        PairPotential {
            kind: PotentialKind::Zero,
        }
    }

    pub fn hard_core(radius: f64) -> Result<Self> {
        require_positive("radius", radius)?;
        Ok(PairPotential {
            kind: PotentialKind::HardCore { radius },
        })
    }

    pub fn square_well(height: f64, range: f64) -> Result<Self> {
        require_nonnegative("height", height)?;
        require_positive("range", range)?;
        Ok(PairPotential {
            kind: PotentialKind::SquareWell { height, range },
        })
    }

    pub fn tabulated(r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if r.len() != v.len() || r.len() < 2 {
            return Err(Error::invalid(
                "tabulated",
                "needs at least two samples and equal-length r and v",
            ));
        }
        if r[0] < 0.0 || !r.iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("tabulated.r", "radii must be finite and >= 0"));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("tabulated.r", "grid must be strictly increasing"));
        }
        if let Some(&bad) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::invalid(
                "tabulated.v",
                format!("samples must be finite and >= 0, found {bad}"),
            ));
        }
        Ok(PairPotential {
            kind: PotentialKind::Tabulated { r, v },
        })
    }

    pub fn power_tail(core: PairPotential, amplitude: f64, eps: f64, tail_start: f64) -> Result<Self> {
        require_nonnegative("amplitude", amplitude)?;
        require_positive("eps", eps)?;
        require_positive("tail_start", tail_start)?;
        if matches!(core.kind, PotentialKind::PowerTail { .. }) {
            return Err(Error::invalid("core", "must have finite range"));
        }
        Ok(PairPotential {
            kind: PotentialKind::PowerTail {
                core: Box::new(core),
                amplitude,
                eps,
                tail_start,
            },
        })
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    /// Smallest radius beyond which `v = 0`; infinite for power tails.
    pub fn range(&self) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::HardCore { radius } => *radius,
            PotentialKind::SquareWell { height, range } => {
                if *height > 0.0 {
                    *range
                } else {
                    0.0
                }
            }
            PotentialKind::Tabulated { r, v } => match v.iter().rposition(|&x| x > 0.0) {
                None => 0.0,
                Some(i) if i + 1 < r.len() => r[i + 1],
                Some(i) => r[i],
            },
            PotentialKind::PowerTail { core, amplitude, .. } => {
                if *amplitude > 0.0 {
                    f64::INFINITY
                } else {
                    core.range()
                }
            }
        }
    }

    /// Radius of the hard core, if any.
    pub fn hard_core_radius(&self) -> Option<f64> {
        match &self.kind {
            PotentialKind::HardCore { radius } => Some(*radius),
            PotentialKind::PowerTail { core, .. } => core.hard_core_radius(),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.range() == 0.0
    }

    /// Radii where `v` or its derivative is discontinuous.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = match &self.kind {
            PotentialKind::Zero => vec![],
            PotentialKind::HardCore { radius } => vec![*radius],
            PotentialKind::SquareWell { range, .. } => vec![*range],
            PotentialKind::Tabulated { r, .. } => r.clone(),
            PotentialKind::PowerTail { core, tail_start, .. } => {
                let mut p = core.breakpoints();
                p.push(*tail_start);
                p
            }
        };
        pts.retain(|&x| x > 0.0);
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup();
        pts
    }

    /// `v(r)`. Negative or NaN radii are rejected.
    pub fn evaluate(&self, r: f64) -> Result<PotentialValue> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::invalid("r", format!("must be >= 0, got {r}")));
        }
        if let Some(core) = self.hard_core_radius() {
            if r < core {
                return Ok(PotentialValue::Infinite);
            }
        }
        Ok(PotentialValue::Finite(self.value_outside_core(r)))
    }

    /// `v(r)` for radii outside any hard core (zero contribution from the core).
    pub(crate) fn value_outside_core(&self, r: f64) -> f64 {
        match &self.kind {
            PotentialKind::Zero | PotentialKind::HardCore { .. } => 0.0,
            PotentialKind::SquareWell { height, range } => {
                if r < *range {
                    *height
                } else {
                    0.0
                }
            }
            PotentialKind::Tabulated { r: rs, v } => interpolate_zero_beyond(rs, v, r),
            PotentialKind::PowerTail {
                core,
                amplitude,
                eps,
                tail_start,
            } => {
                let tail = if r >= *tail_start {
                    amplitude * r.powf(-(3.0 + eps))
                } else {
                    0.0
                };
                core.value_outside_core(r) + tail
            }
        }
    }
}

fn interpolate_zero_beyond(rs: &[f64], v: &[f64], r: f64) -> f64 {
    let n = rs.len();
    if r <= rs[0] {
        return v[0];
    }
    if r > rs[n - 1] {
        return 0.0;
    }
    let i = rs.partition_point(|&x| x <= r).min(n - 1).max(1);
    let t = (r - rs[i - 1]) / (rs[i] - rs[i - 1]);
    v[i - 1] + t * (v[i] - v[i - 1])
}

/// `v(r)` as in [`PairPotential::evaluate`].
pub fn evaluate_potential(p: &PairPotential, r: f64) -> Result<PotentialValue> {
    p.evaluate(r)
}

/// Boundary condition on the walls of a box trap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Walls {
    /// Infinite walls: the wave function vanishes on the boundary.
    Dirichlet,
    /// Reflecting walls: no flux through the boundary.
    Neumann,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum TrapKind {
    /// `V(x) = sum_i omega_i^2 x_i^2 / (4 mu)`, the oscillator with `hbar = 1`
    /// and `m = 1/(2 mu)`. One frequency per axis; a single entry means
    /// isotropic.
    Harmonic { omega: Vec<f64> },
    /// `V = 0` inside `[0, side]^d`, walls outside.
    Box { side: f64, walls: Walls },
    /// Radial samples, linearly interpolated; infinite beyond the last sample.
    TabulatedRadial { r: Vec<f64>, v: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapPotential {
    kind: TrapKind,
    confining: bool,
}

impl TrapPotential {
    pub fn harmonic(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() || omega.len() > 3 {
            return Err(Error::invalid("omega", "need 1 to 3 frequencies"));
        }
        for &w in &omega {
            require_positive("omega", w)?;
        }
        Ok(TrapPotential {
            kind: TrapKind::Harmonic { omega },
            confining: true,
        })
    }

    pub fn isotropic(omega: f64) -> Result<Self> {
        Self::harmonic(vec![omega])
    }

    pub fn hard_box(side: f64, walls: Walls) -> Result<Self> {
        require_positive("side", side)?;
        Ok(TrapPotential {
            kind: TrapKind::Box { side, walls },
            confining: true,
        })
    }

    pub fn tabulated_radial(r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if r.len() != v.len() || r.len() < 2 {
            return Err(Error::invalid("trap.r", "need at least two samples"));
        }
        if r[0] != 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("trap.r", "grid must start at 0 and increase strictly"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("trap.v", "samples must be finite"));
        }
        Ok(TrapPotential {
            kind: TrapKind::TabulatedRadial { r, v },
            confining: true,
        })
    }

    pub fn kind(&self) -> &TrapKind {
        &self.kind
    }

    pub fn is_confining(&self) -> bool {
        self.confining
    }

    /// True when `V` depends on `|x|` only.
    pub fn is_radial(&self) -> bool {
        match &self.kind {
            TrapKind::Harmonic { omega } => omega.windows(2).all(|w| w[0] == w[1]),
            TrapKind::Box { .. } => false,
            TrapKind::TabulatedRadial { .. } => true,
        }
    }

    /// Per-axis frequency for `dim` axes (harmonic traps only).
    pub fn frequencies(&self, dim: usize) -> Option<Vec<f64>> {
        match &self.kind {
            TrapKind::Harmonic { omega } if omega.len() == 1 => Some(vec![omega[0]; dim]),
            TrapKind::Harmonic { omega } if omega.len() == dim => Some(omega.clone()),
            _ => None,
        }
    }

    /// Ground-state energy of `-mu Laplacian + V`, where known in closed form.
    pub fn linear_ground_energy(&self, dim: usize, units: &Units) -> Option<f64> {
        match &self.kind {
            TrapKind::Harmonic { .. } => self.frequencies(dim).map(|w| 0.5 * w.iter().sum::<f64>()),
            TrapKind::Box { side, walls } => Some(match walls {
                Walls::Neumann => 0.0,
                Walls::Dirichlet => {
                    dim as f64 * units.mu() * std::f64::consts::PI.powi(2) / (side * side)
                }
            }),
            TrapKind::TabulatedRadial { .. } => None,
        }
    }

    /// Oscillator lengths `sqrt(2 mu / omega_i)` of a harmonic trap.
    pub fn oscillator_lengths(&self, dim: usize, units: &Units) -> Option<Vec<f64>> {
        self.frequencies(dim)
            .map(|w| w.iter().map(|&o| (2.0 * units.mu() / o).sqrt()).collect())
    }

    /// `V(r)` for radial traps.
    pub fn radial_value(&self, r: f64, units: &Units) -> f64 {
        match &self.kind {
            TrapKind::Harmonic { omega } => omega[0] * omega[0] * r * r / (4.0 * units.mu()),
            TrapKind::TabulatedRadial { r: rs, v } => {
                let n = rs.len();
                if r > rs[n - 1] {
                    f64::INFINITY
                } else {
                    let i = rs.partition_point(|&x| x <= r).min(n - 1).max(1);
                    let t = (r - rs[i - 1]) / (rs[i] - rs[i - 1]);
                    v[i - 1] + t * (v[i] - v[i - 1])
                }
            }
            TrapKind::Box { .. } => 0.0,
        }
    }

    /// `V(x)` at a Cartesian point.
    pub fn value(&self, x: &[f64], units: &Units) -> f64 {
        match &self.kind {
            TrapKind::Harmonic { omega } => x
                .iter()
                .enumerate()
                .map(|(i, xi)| {
                    let w = if omega.len() == 1 { omega[0] } else { omega[i] };
                    w * w * xi * xi / (4.0 * units.mu())
                })
                .sum(),
            TrapKind::Box { side, .. } => {
                if x.iter().all(|&xi| (0.0..=*side).contains(&xi)) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            TrapKind::TabulatedRadial { .. } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                self.radial_value(r, units)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hard_core_values() {
        let p = PairPotential::hard_core(1.0).unwrap();
        assert_eq!(p.evaluate(0.5).unwrap(), PotentialValue::Infinite);
        assert_eq!(p.evaluate(2.0).unwrap(), PotentialValue::Finite(0.0));
        assert_eq!(p.range(), 1.0);
    }

    #[test]
    fn square_well_value_inside() {
        let p = PairPotential::square_well(3.5, 2.0).unwrap();
        assert_eq!(p.evaluate(1.0).unwrap(), PotentialValue::Finite(3.5));
        assert_eq!(p.evaluate(2.5).unwrap(), PotentialValue::Finite(0.0));
    }

    #[test]
    fn negative_radius_rejected() {
        let p = PairPotential::square_well(1.0, 1.0).unwrap();
        assert!(p.evaluate(-0.1).is_err());
        assert!(p.evaluate(f64::NAN).is_err());
    }

    #[test]
    fn constructors_enforce_invariants() {
        assert!(PairPotential::square_well(-1.0, 1.0).is_err());
        assert!(PairPotential::tabulated(vec![0.0, 1.0], vec![1.0, -0.5]).is_err());
        assert!(PairPotential::tabulated(vec![1.0, 0.5], vec![1.0, 0.5]).is_err());
        assert!(PairPotential::power_tail(PairPotential::zero(), 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn tabulated_interpolates_and_vanishes() {
        let p = PairPotential::tabulated(vec![0.0, 1.0, 2.0], vec![2.0, 1.0, 0.0]).unwrap();
        assert_eq!(p.evaluate(0.5).unwrap().finite(), Some(1.5));
        assert_eq!(p.evaluate(3.0).unwrap().finite(), Some(0.0));
        assert_eq!(p.range(), 2.0);
    }

    #[test]
    fn power_tail_has_infinite_range() {
        let core = PairPotential::square_well(1.0, 1.0).unwrap();
        let p = PairPotential::power_tail(core, 0.5, 1.0, 1.0).unwrap();
        assert!(p.range().is_infinite());
        let v = p.evaluate(2.0).unwrap().finite().unwrap();
        assert!((v - 0.5 * 2f64.powi(-4)).abs() < 1e-15);
    }

    #[test]
    fn serde_rejects_invalid_potentials() {
        let bad = PotentialKind::SquareWell {
            height: -1.0,
            range: 1.0,
        };
        assert!(PairPotential::try_from(bad).is_err());
    }

    #[test]
    fn harmonic_ground_energy() {
        let t = TrapPotential::isotropic(1.0).unwrap();
        let u = Units::default();
        assert_eq!(t.linear_ground_energy(3, &u), Some(1.5));
        assert_eq!(t.value(&[2.0, 0.0, 0.0], &u), 1.0);
    }

    #[test]
    fn confining_traps_grow() {
        let u = Units::default();
        let t = TrapPotential::isotropic(2.0).unwrap();
        let far = t.value(&[1e3, 0.0, 0.0], &u);
        assert!(far > 1e5);
        let b = TrapPotential::hard_box(1.0, Walls::Dirichlet).unwrap();
        assert!(b.value(&[2.0, 0.5, 0.5], &u).is_infinite());
    }

    proptest::proptest! {
        #[test]
        fn potentials_are_nonnegative(h in 0.0f64..100.0, range in 0.01f64..10.0, r in 0.0f64..50.0) {
            let p = PairPotential::square_well(h, range).unwrap();
            match p.evaluate(r).unwrap() {
                PotentialValue::Finite(v) => proptest::prop_assert!(v >= 0.0),
                PotentialValue::Infinite => {}
            }
            if r > range {
                proptest::prop_assert_eq!(p.evaluate(r).unwrap(), PotentialValue::Finite(0.0));
            }
        }
    }
}
