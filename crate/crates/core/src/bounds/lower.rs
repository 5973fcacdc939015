//! The composed lower bound
//! `e0 / (4 pi mu rho a) >= (1 - 1/(rho ell^3)) K(4 rho ell^3, ell)`
//! for the ansatz `eps = c_eps Y^alpha`, `a/ell = c_ell Y^beta`,
//! `(R^3 - R0^3)/ell^3 = c_R Y^gamma`.

use serde::{Deserialize, Serialize};

use super::optimize::Exponents;
use super::temple::{cube, temple_k_in, CellGeometry, GapConvention, TempleFactors};
use super::{upper_bound_ratio, GasParameter};
use crate::error::{require_positive, Error, Result};
use crate::extended::{DoubleDouble, Real};
use crate::scattering::Dimension;
use crate::units::{Convention, Units};

/// Below this gas parameter the composition runs in double-double.
pub const EXTENDED_PRECISION_BELOW: f64 = 1e-16;

/// Proportionality constants of the ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c_eps: f64,
    pub c_ell: f64,
    pub c_r: f64,
}

impl Constants {
    pub fn unit() -> Self {
        Constants {
            c_eps: 1.0,
            c_ell: 1.0,
            c_r: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ansatz {
    pub exponents: Exponents,
    pub constants: Constants,
    /// Potential range in units of `a`; 1 for hard spheres.
    pub r0_over_a: f64,
    pub gap: GapConvention,
    pub precision: Precision,
}

/// Arithmetic used to compose the lower bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    /// Double-double at or below [`EXTENDED_PRECISION_BELOW`].
    #[default]
    Auto,
    Double,
    Extended,
}

impl Ansatz {
    pub fn new(exponents: Exponents, constants: Constants) -> Self {
        Ansatz {
            exponents,
            constants,
            r0_over_a: 1.0,
            gap: GapConvention::Pi,
            precision: Precision::Auto,
        }
    }
}

/// Cell parameters at one `Y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CellParameters {
    pub epsilon: f64,
    pub r: f64,
    pub r0: f64,
    pub ell: f64,
    /// Particles per cell, `4 rho ell^3`.
    pub n: f64,
    pub c_eps: f64,
    pub c_ell: f64,
    pub c_r: f64,
}

/// Multiplicative factors of the composed bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LowerFactors {
    /// `1 - 1/(rho ell^3)`.
    pub pairs: f64,
    #[serde(flatten)]
    pub temple: TempleFactors,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    #[serde(rename = "Y")]
    pub y: f64,
    pub upper: f64,
    pub lower: f64,
    pub params: CellParameters,
    pub factors: LowerFactors,
    pub valid: bool,
}

/// Evaluate the ansatz at `gas`, checking the admissibility ordering
/// `a < R < rho^(-1/3) < ell < (rho a)^(-1/2)` and `0 < eps < 1`.
pub fn cell_parameters(gas: &GasParameter, ansatz: &Ansatz) -> Result<CellParameters> {
    if gas.dimension() != Dimension::Three {
        return Err(Error::invalid("dimension", "the cell bound is three-dimensional"));
    }
    let Constants { c_eps, c_ell, c_r } = ansatz.constants;
    require_positive("c_eps", c_eps)?;
    require_positive("c_ell", c_ell)?;
    require_positive("c_R", c_r)?;
    let (alpha, beta, gamma) = ansatz.exponents.as_f64();
    let (y, a, rho) = (gas.y(), gas.a(), gas.rho());
    let epsilon = c_eps * y.powf(alpha);
    let ell = a / (c_ell * y.powf(beta));
    let r0 = ansatz.r0_over_a * a;
    let r = (r0.powi(3) + c_r * y.powf(gamma) * ell.powi(3)).cbrt();
    let n = 4.0 * rho * ell.powi(3);

    let fail = |what: &str| Err(Error::Inadmissible(what.to_string()));
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return fail(&format!("0 < epsilon < 1 violated (epsilon = {epsilon})"));
    }
    if r <= r0 {
        return fail("R > R0 violated");
    }
    if ell <= 2.0 * r {
        return fail(&format!("ell > 2R violated (ell = {ell}, R = {r})"));
    }
    let spacing = rho.powf(-1.0 / 3.0);
    let healing = (rho * a).powf(-0.5);
    if a >= r {
        return fail(&format!("a < R violated (R = {r})"));
    }
    if r >= spacing {
        return fail(&format!("R < rho^(-1/3) violated (R = {r}, rho^(-1/3) = {spacing})"));
    }
    if spacing >= ell {
        return fail(&format!("rho^(-1/3) < ell violated (ell = {ell}, rho^(-1/3) = {spacing})"));
    }
    if ell >= healing {
        return fail(&format!("ell < (rho a)^(-1/2) violated (ell = {ell}, (rho a)^(-1/2) = {healing})"));
    }
    Ok(CellParameters {
        epsilon,
        r,
        r0,
        ell,
        n,
        c_eps,
        c_ell,
        c_r,
    })
}

fn compose<T: Real>(gas: &GasParameter, p: &CellParameters, gap: GapConvention) -> Result<(f64, LowerFactors, bool)> {
    let geometry = CellGeometry {
        n: p.n,
        ell: p.ell,
        r: p.r,
        r0: p.r0,
        eps: p.epsilon,
        a: gas.a(),
    };
    let k = temple_k_in::<T>(&geometry, gap)?;
    let one = T::from_f64(1.0);
    let pairs = one - one / (T::from_f64(gas.rho()) * cube(T::from_f64(p.ell)));
    let pairs_f = pairs.to_f64();
    let valid = k.valid && pairs_f >= 0.0;
    let lower = if valid { (pairs * T::from_f64(k.value)).to_f64() } else { 0.0 };
    Ok((
        lower,
        LowerFactors {
            pairs: pairs_f,
            temple: k.factors,
        },
        valid,
    ))
}

/// Lower bound on `e0 / (4 pi mu rho a)` in the thermodynamic limit.
pub fn lower_bound(gas: &GasParameter, ansatz: &Ansatz) -> Result<BoundReport> {
    let y = gas.y();
    if y >= 1.0 {
        return Err(Error::OutOfRange(format!("gas parameter Y = {y} must be below 1")));
    }
    let params = cell_parameters(gas, ansatz)?;
    let extended = match ansatz.precision {
        Precision::Auto => y <= EXTENDED_PRECISION_BELOW,
        Precision::Double => false,
        Precision::Extended => true,
    };
    let (lower, factors, valid) = if extended {
        compose::<DoubleDouble>(gas, &params, ansatz.gap)?
    } else {
        compose::<f64>(gas, &params, ansatz.gap)?
    };
    Ok(BoundReport {
        y,
        upper: upper_bound_ratio(y)?,
        lower,
        params,
        factors,
        valid,
    })
}

/// Lower bound for `n` particles in a box of side `l`. The box must satisfy
/// `l / a > c_box Y^(-beta)`; `c_box = None` uses `1 / c_ell`.
pub fn lower_bound_finite_box(
    n: f64,
    l: f64,
    gas: &GasParameter,
    ansatz: &Ansatz,
    units: &Units,
    c_box: Option<f64>,
) -> Result<BoundReport> {
    units.require(Convention::Dilute)?;
    require_positive("N", n)?;
    require_positive("L", l)?;
    let rho = n / l.powi(3);
    if (rho - gas.rho()).abs() > 1e-9 * gas.rho() {
        return Err(Error::invalid("N, L", format!("N/L^3 = {rho} differs from rho = {}", gas.rho())));
    }
    let c_box = c_box.unwrap_or(1.0 / ansatz.constants.c_ell);
    let (_, beta, _) = ansatz.exponents.as_f64();
    let threshold = c_box * gas.y().powf(-beta);
    if l / gas.a() <= threshold {
        return Err(Error::Inadmissible(format!(
            "L/a > C' Y^(-beta) violated (L/a = {}, threshold {threshold})",
            l / gas.a()
        )));
    }
    lower_bound(gas, ansatz)
}
