//! Numerics for the dilute Bose gas.
//!
//! The crate turns the classical low-density results for interacting bosons
//! into computable objects:
//!
//! * [`scattering`]: zero-energy scattering solutions and scattering lengths
//!   in two and three dimensions, plus numerical checks of the
//!   partial-integration identity and of Dyson's lemma.
//! * [`bounds`]: explicit upper bounds, the Temple-inequality lower bound
//!   with the cell decomposition, optimization of the `Y^{1/17}` error
//!   constant, and the classical expansions (Lee-Huang-Yang, Dyson, Schick).
//! * [`gp`]: Gross-Pitaevskii and Thomas-Fermi ground states in traps.
//! * [`jellium`]: Bogolubov pairing theory for Foldy's charged Bose gas.
//!
//! Unless noted otherwise energies use `mu = hbar^2 / 2m` with `mu = 1`
//! (see [`units`]).

pub mod bounds;
mod error;
pub mod exec;
pub mod extended;
pub mod gp;
pub mod jellium;
pub mod potentials;
pub mod quadrature;
pub mod scattering;
pub mod units;

pub use error::{Error, Result};
pub use exec::Exec;
pub use potentials::{PairPotential, PotentialValue, TrapPotential};
pub use units::{Convention, Units};

/// Library version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
