//! Upper bounds from the Dyson-type trial state.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::require_dilute;
use crate::error::{require_nonnegative, require_positive, Error, Result};
use crate::units::{Convention, Units};

/// Thermodynamic upper bound on `e0 / (4 pi mu rho a)`:
/// `(1 - x + x^2 - Y/2) / (1 - x)^8` with `x = Y^(1/3)`.
pub fn upper_bound_ratio(y: f64) -> Result<f64> {
    require_dilute(y)?;
    let x = y.cbrt();
    Ok((1.0 - x + x * x - 0.5 * y) / (1.0 - x).powi(8))
}

/// Which finite-box formula to use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum UpperForm {
    /// Valid for any nonnegative potential with `b > a`.
    General,
    /// Improved form for potentials of range `r0 < b`.
    FiniteRange { r0: f64 },
}

/// Finite-box upper bound.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FiniteBoxUpper {
    pub rho1: f64,
    pub b: f64,
    /// The rational function of `a/b`.
    pub ratio: f64,
    pub energy_per_particle: f64,
}

/// `E0(N, L)/N <= 4 pi mu rho1 a f(a/b)` with `rho1 = (N-1)/L^3` and
/// `b = (4 pi rho1 / 3)^(-1/3)`. For Dirichlet walls pass
/// `dirichlet = Some(c)` to add `c / L^2`; the constant is not known in
/// closed form.
pub fn upper_bound_finite_box(
    n: u64,
    l: f64,
    a: f64,
    units: &Units,
    form: UpperForm,
    dirichlet: Option<f64>,
) -> Result<FiniteBoxUpper> {
    units.require(Convention::Dilute)?;
    if n < 2 {
        return Err(Error::invalid("N", "need at least two particles"));
    }
    require_positive("L", l)?;
    require_nonnegative("a", a)?;
    let rho1 = (n - 1) as f64 / l.powi(3);
    let b = (4.0 * PI * rho1 / 3.0).powf(-1.0 / 3.0);
    if b <= a {
        return Err(Error::OutOfRange(format!("b = {b} must exceed a = {a}")));
    }
    let x = a / b;
    let ratio = match form {
        UpperForm::General => (1.0 - x + x * x + 0.5 * x.powi(3)) / (1.0 - x).powi(8),
        UpperForm::FiniteRange { r0 } => {
            if b <= r0 {
                return Err(Error::OutOfRange(format!("b = {b} must exceed the range {r0}")));
            }
            (1.0 - x * x + 0.5 * x.powi(3)) / (1.0 - x).powi(4)
        }
    };
    let mut e = 4.0 * PI * units.mu() * rho1 * a * ratio;
    if let Some(c) = dirichlet {
        if c == 0.0 {
            log::warn!("Dirichlet correction constant is 0; the bound is then only heuristic");
        }
        e += c / (l * l);
    }
    Ok(FiniteBoxUpper {
        rho1,
        b,
        ratio,
        energy_per_particle: e,
    })
}

/// Dyson's hard-sphere bounds on `e0 / (4 pi mu rho a)`:
/// `1/(10 sqrt 2)` below and `(1 + 2x)/(1 - x)^2` above, `x = Y^(1/3)`.
pub fn dyson_bounds_hard_sphere(y: f64) -> Result<(f64, f64)> {
    require_dilute(y)?;
    let x = y.cbrt();
    Ok((1.0 / (10.0 * 2f64.sqrt()), (1.0 + 2.0 * x) / (1.0 - x).powi(2)))
}

/// `A / R^3 - B / (rho R^6)`, the fixed-`R` geometric bound on the soft
/// potential energy per particle. The constants are user inputs.
pub fn dyson_fixed_r_bound(a_const: f64, b_const: f64, r: f64, rho: f64) -> Result<f64> {
    require_positive("R", r)?;
    require_positive("rho", rho)?;
    Ok(a_const / r.powi(3) - b_const / (rho * r.powi(6)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extended::DoubleDouble;

    fn ratio_dd(y: f64) -> f64 {
        // x = 1/10 for Y = 1e-3 exactly.
        let x = DoubleDouble::from(1.0) / DoubleDouble::from(10.0);
        let one = DoubleDouble::ONE;
        let num = one - x + x * x - DoubleDouble::from(0.5) * DoubleDouble::from(y);
        (num / (one - x).powi(8)).to_f64()
    }

    #[test]
    fn thermodynamic_values() {
        assert_eq!(upper_bound_ratio(0.0).unwrap(), 1.0);
        let r = upper_bound_ratio(1e-3).unwrap();
        assert!((r - ratio_dd(1e-3)).abs() < 1e-13);
        assert!((r - 0.9095 / 0.9f64.powi(8)).abs() < 1e-12);
        assert!(upper_bound_ratio(0.999_999).unwrap() > 1e20);
        assert!(upper_bound_ratio(1.0).is_err());
    }

    #[test]
    fn finite_box_forms() {
        let u = Units::default();
        // Pick L so that a/b = 0.1 with a = 1, N = 1001.
        let n = 1001u64;
        let b = 10.0f64;
        let l = ((n - 1) as f64 * 4.0 * PI * b.powi(3) / 3.0).cbrt();
        let g = upper_bound_finite_box(n, l, 1.0, &u, UpperForm::General, None).unwrap();
        assert!((g.b - 10.0).abs() < 1e-12);
        assert!((g.ratio - 0.9105 / 0.9f64.powi(8)).abs() < 1e-12);
        let f = upper_bound_finite_box(n, l, 1.0, &u, UpperForm::FiniteRange { r0: 1.0 }, None).unwrap();
        assert!((f.ratio - 0.9905 / 0.9f64.powi(4)).abs() < 1e-12);
        assert!((g.energy_per_particle - 4.0 * PI * g.rho1 * g.ratio).abs() < 1e-15);
        let d = upper_bound_finite_box(n, l, 1.0, &u, UpperForm::General, Some(3.0)).unwrap();
        assert!((d.energy_per_particle - g.energy_per_particle - 3.0 / (l * l)).abs() < 1e-15);
        assert!(upper_bound_finite_box(2, 1.0, 1.0, &u, UpperForm::General, None).is_err());
    }

    #[test]
    fn small_a_over_b_approaches_one() {
        let g = upper_bound_finite_box(2, 1e6, 1e-3, &Units::default(), UpperForm::General, None).unwrap();
        assert!((g.ratio - 1.0).abs() < 1e-6);
    }

    #[test]
    fn dyson_pair() {
        let (lo, hi) = dyson_bounds_hard_sphere(1e-3).unwrap();
        assert_eq!(lo, 1.0 / (10.0 * 2f64.sqrt()));
        assert!((hi - 1.2 / 0.81).abs() < 1e-12);
        assert_eq!(dyson_bounds_hard_sphere(0.0).unwrap().1, 1.0);
        assert!(dyson_bounds_hard_sphere(1.5).is_err());
    }

    #[test]
    fn fixed_r_bound() {
        assert!((dyson_fixed_r_bound(2.0, 1.0, 1.0, 0.5).unwrap() - 0.0).abs() < 1e-15);
    }
}
