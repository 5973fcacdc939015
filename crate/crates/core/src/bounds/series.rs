//! Low-density expansions.

use std::f64::consts::PI;

use crate::error::{require_positive, Error, Result};
use crate::units::{Convention, Units};

/// Coefficient of `x^(1/2)`: `128 / (15 sqrt(pi))`.
pub const LHY_SQRT_COEFF: f64 = 4.814_417_779_607_521;

/// Coefficient of `x ln x`: `8 (4 pi / 3 - sqrt 3)`.
pub const LHY_LOG_COEFF: f64 = 19.653_915_177_740_107;

/// `e0 / (4 pi mu rho a)` through the logarithmic term, with `x = rho a^3`.
pub fn lhy_expansion(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::OutOfRange(format!("x = {x} must lie in (0, 1)")));
    }
    Ok(1.0 + LHY_SQRT_COEFF * x.sqrt() + LHY_LOG_COEFF * x * x.ln())
}

/// Energy per particle `4 pi mu rho / |ln(rho a^2)|` of the 2D gas.
pub fn schick_2d(rho: f64, a: f64, units: &Units) -> Result<f64> {
    units.require(Convention::Dilute)?;
    require_positive("rho", rho)?;
    require_positive("a", a)?;
    let y = rho * a * a;
    if y >= 1.0 {
        return Err(Error::OutOfRange(format!("rho a^2 = {y} must be below 1")));
    }
    Ok(4.0 * PI * units.mu() * rho / y.ln().abs())
}

/// `4 pi mu rho / ln(L^2 / a^2)`: what summing the two-body energy over
/// all pairs in a box of side `L` would give. Unlike [`schick_2d`] it
/// depends on the box.
pub fn pairwise_rule_2d(rho: f64, a: f64, l: f64, units: &Units) -> Result<f64> {
    units.require(Convention::Dilute)?;
    require_positive("rho", rho)?;
    require_positive("a", a)?;
    if l <= a {
        return Err(Error::invalid("L", "must exceed a"));
    }
    Ok(4.0 * PI * units.mu() * rho / (l * l / (a * a)).ln())
}
