//! Unit conventions.
//!
//! Two conventions exist. The dilute-gas modules keep `mu = hbar^2 / 2m`
//! explicit (default `mu = 1`). The charged-gas module fixes
//! `hbar = m = 1`, so the kinetic operator is `-1/2 Laplacian` and
//! `mu = 1/2`. Converting a result between two values of `mu` at fixed
//! lengths is a multiplicative rescaling of kinetic energies by the ratio of
//! the two `mu`; nothing else in the crate converts units.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `mu = hbar^2/2m` kept as a free parameter.
    Dilute,
    /// `hbar = m = 1`, kinetic term `-1/2 Laplacian`.
    Charged,
}

impl Convention {
    pub fn name(self) -> &'static str {
        match self {
            Convention::Dilute => "dilute (mu = hbar^2/2m explicit)",
            Convention::Charged => "charged (hbar = m = 1, kinetic -1/2 Laplacian)",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Units {
    mu: f64,
    convention: Convention,
}

impl Units {
    pub fn dilute(mu: f64) -> Result<Self> {
        Ok(Units {
            mu: require_positive("mu", mu)?,
            convention: Convention::Dilute,
        })
    }

    pub fn charged() -> Self {
        Units {
            mu: 0.5,
            convention: Convention::Charged,
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Fail unless `self` uses `expected`.
    pub fn require(&self, expected: Convention) -> Result<()> {
        if self.convention == expected {
            Ok(())
        } else {
            Err(Error::MixedConventions {
                expected: expected.name(),
                found: self.convention.name(),
            })
        }
    }

    /// Rescale a kinetic energy computed with `self.mu` to `target.mu`.
    pub fn rescale_kinetic(&self, energy: f64, target: &Units) -> f64 {
        energy * target.mu / self.mu
    }
}

impl Default for Units {
    fn default() -> Self {
        Units {
            mu: 1.0,
            convention: Convention::Dilute,
        }
    }
}
