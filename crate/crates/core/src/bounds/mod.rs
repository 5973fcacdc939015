//! Explicit bounds on the ground-state energy per particle of the dilute
//! Bose gas, in units of `4 pi mu rho a`.
//!
//! * [`upper`]: trial-function upper bounds and Dyson's hard-sphere pair.
//! * [`temple`]: first-order expectation of the soft potential and the
//!   Temple factor `K(n, ell)` for a single Neumann cell.
//! * [`cells`]: distributing particles among cells.
//! * [`lower`]: the composed lower bound for a parameter ansatz.
//! * [`optimize`]: tuning the ansatz constants.
//! * [`series`]: the Lee-Huang-Yang expansion and the 2D formula.

pub mod cells;
pub mod lower;
pub mod optimize;
pub mod series;
pub mod temple;
pub mod upper;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::scattering::Dimension;

pub use cells::{cell_occupancy_minimize, superadditivity_check, CellMode, SuperadditivityReport};
pub use lower::{lower_bound, lower_bound_finite_box, Ansatz, BoundReport, CellParameters, Constants, Precision};
pub use optimize::{error_constant, optimize_error_constant, Exponents, OptimizeOptions, Optimized};
pub use series::{lhy_expansion, pairwise_rule_2d, schick_2d, LHY_LOG_COEFF, LHY_SQRT_COEFF};
pub use temple::{first_order_expectation, temple_k, GapConvention, TempleK};
pub use upper::{dyson_bounds_hard_sphere, dyson_fixed_r_bound, upper_bound_finite_box, upper_bound_ratio, UpperForm};

/// Density and scattering length with the gas parameter `Y`:
/// `4 pi rho a^3 / 3` in 3D, `rho a^2` in 2D.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GasParameter {
    rho: f64,
    a: f64,
    y: f64,
    dimension: Dimension,
}

impl GasParameter {
    pub fn new(rho: f64, a: f64, dimension: Dimension) -> Result<Self> {
        require_positive("rho", rho)?;
        require_positive("a", a)?;
        let y = match dimension {
            Dimension::Three => 4.0 * PI * rho * a.powi(3) / 3.0,
            Dimension::Two => rho * a * a,
        };
        Ok(GasParameter { rho, a, y, dimension })
    }

    pub fn from_y(y: f64, a: f64, dimension: Dimension) -> Result<Self> {
        require_positive("Y", y)?;
        require_positive("a", a)?;
        let rho = match dimension {
            Dimension::Three => 3.0 * y / (4.0 * PI * a.powi(3)),
            Dimension::Two => y / (a * a),
        };
        Ok(GasParameter { rho, a, y, dimension })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }
}

fn require_dilute(y: f64) -> Result<()> {
    if !(0.0..1.0).contains(&y) {
        return Err(Error::OutOfRange(format!("gas parameter Y = {y} must lie in [0, 1)")));
    }
    Ok(())
}
