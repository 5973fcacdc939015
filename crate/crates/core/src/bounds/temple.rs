//! The soft-potential expectation in a single cell and the Temple factor.

use serde::{Deserialize, Serialize};

use crate::error::{require_nonnegative, require_positive, Error, Result};
use crate::extended::Real;
use crate::units::{Convention, Units};

/// Lowest excitation of the free Neumann cell used in Temple's inequality.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapConvention {
    /// `eps pi mu / ell^2`.
    #[default]
    Pi,
    /// `eps pi^2 mu / ell^2`, the first nonzero Neumann eigenvalue.
    PiSquared,
}

impl GapConvention {
    /// Multiplier of `eps ell^-2` in the Temple denominator.
    pub fn scale(self) -> f64 {
        match self {
            GapConvention::Pi => 1.0,
            GapConvention::PiSquared => std::f64::consts::PI,
        }
    }
}

/// Bounds `(lower, upper)` on `<W_R>_0 / n` for `n` particles in a cell of
/// side `ell`, with `rho = n / ell^3`.
pub fn first_order_expectation(n: f64, ell: f64, r: f64, r0: f64) -> Result<(f64, f64)> {
    require_positive("n", n)?;
    require_positive("ell", ell)?;
    require_nonnegative("R0", r0)?;
    if r <= r0 {
        return Err(Error::invalid("R", "must exceed R0"));
    }
    if 2.0 * r >= ell {
        return Err(Error::OutOfRange(format!("2R = {} must be below ell = {ell}", 2.0 * r)));
    }
    let rho = n / ell.powi(3);
    let pairs = 1.0 - 1.0 / n;
    let upper = 4.0 * std::f64::consts::PI * rho * pairs;
    let geometry = (1.0 - 2.0 * r / ell).powi(3);
    let density = 1.0 / (1.0 + 4.0 * std::f64::consts::PI * rho * pairs * (r.powi(3) - r0.powi(3)) / 3.0);
    Ok((upper * geometry * density, upper))
}

/// The four factors of `K(n, ell)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TempleFactors {
    /// `1 - eps`.
    pub kinetic: f64,
    /// `(1 - 2R/ell)^3`.
    pub geometry: f64,
    /// `(1 + (4 pi/3) rho (1 - 1/n)(R^3 - R0^3))^-1` with `rho = n/ell^3`.
    pub density: f64,
    /// The Temple variance correction.
    pub temple: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TempleK {
    /// `K`, or 0 when invalid.
    pub value: f64,
    pub factors: TempleFactors,
    /// `eps s / ell^2 - 4 a n (n-1) / ell^3`.
    pub denominator: f64,
    /// Denominator positive and every factor nonnegative.
    pub valid: bool,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct CellGeometry {
    pub n: f64,
    pub ell: f64,
    pub r: f64,
    pub r0: f64,
    pub eps: f64,
    pub a: f64,
}

impl CellGeometry {
    fn check(&self) -> Result<()> {
        require_positive("n", self.n)?;
        require_positive("ell", self.ell)?;
        require_nonnegative("R0", self.r0)?;
        require_nonnegative("a", self.a)?;
        if self.r <= self.r0 {
            return Err(Error::invalid("R", "must exceed R0"));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::invalid("epsilon", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

pub(crate) fn cube<T: Real>(x: T) -> T {
    x * x * x
}

/// `K(n, ell)` in the arithmetic `T`. The input geometry is exact in `f64`;
/// only the composition is carried out in `T`.
pub(crate) fn temple_k_in<T: Real>(g: &CellGeometry, gap: GapConvention) -> Result<TempleK> {
    g.check()?;
    let one = T::from_f64(1.0);
    let n = T::from_f64(g.n);
    let ell = T::from_f64(g.ell);
    let r = T::from_f64(g.r);
    let r0 = T::from_f64(g.r0);
    let eps = T::from_f64(g.eps);
    let a = T::from_f64(g.a);
    let pi = T::pi();

    let dr3 = cube(r) - cube(r0);
    let kinetic = one - eps;
    let geometry = cube(one - T::from_f64(2.0) * r / ell);
    let rho = n / cube(ell);
    let density = one / (one + T::from_f64(4.0) * pi / T::from_f64(3.0) * rho * (one - one / n) * dr3);
    let denominator = eps * T::from_f64(gap.scale()) / (ell * ell) - T::from_f64(4.0) * a * n * (n - one) / cube(ell);
    let temple = one - T::from_f64(3.0) / pi * a * n / (dr3 * denominator);

    let factors = TempleFactors {
        kinetic: kinetic.to_f64(),
        geometry: geometry.to_f64(),
        density: density.to_f64(),
        temple: temple.to_f64(),
    };
    let d = denominator.to_f64();
    let valid = d > 0.0
        && factors.kinetic >= 0.0
        && factors.geometry >= 0.0
        && factors.density >= 0.0
        && factors.temple >= 0.0
        && 2.0 * g.r < g.ell;
    let value = if valid {
        (kinetic * geometry * density * temple).to_f64()
    } else {
        0.0
    };
    Ok(TempleK {
        value,
        factors,
        denominator: d,
        valid,
    })
}

/// `K(n, ell)` for `n` particles in a Neumann cell of side `ell` with
/// kinetic split `eps`, soft-potential radius `r` and potential range `r0`.
/// Invalid parameter sets return `valid = false` and `value = 0`.
#[allow(clippy::too_many_arguments)]
pub fn temple_k(
    n: f64,
    ell: f64,
    r: f64,
    r0: f64,
    eps: f64,
    a: f64,
    units: &Units,
    gap: GapConvention,
) -> Result<TempleK> {
    units.require(Convention::Dilute)?;
    temple_k_in::<f64>(&CellGeometry { n, ell, r, r0, eps, a }, gap)
}
