//! Trapping potentials derived from intensity volumes.

mod convert;
mod depth;
mod harmonic;
mod interp;

pub use convert::{
    default_ground_polarizability, dipole_coefficient, dipole_potential, ponderomotive_coefficient,
    ponderomotive_potential,
};
pub use depth::{trap_depth, TrapDepth};
pub use harmonic::{characterize, harmonic_frequencies, locate_minimum, TrapCharacterization};
pub use interp::{energy_at, force_at};

use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::scalar::Real;

/// Which light-matter coupling produced a potential.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Species {
    /// Ground-state atom in a red-detuned beam, `U ≤ 0`.
    GroundDipole,
    /// Quasi-free Rydberg electron, `U ≥ 0`.
    RydbergPonderomotive,
}

/// Potential energy (J) on a 3D grid, zero where the light is off.
#[derive(Clone, Debug, PartialEq)]
pub struct TrapPotential<T> {
    pub grid: Grid3<T>,
    pub species: Species,
}

impl<T: Real> TrapPotential<T> {
    pub fn new(grid: Grid3<T>, species: Species) -> Result<Self> {
        let ok = match species {
            Species::GroundDipole => grid.values.iter().all(|&v| v <= T::zero()),
            Species::RydbergPonderomotive => grid.values.iter().all(|&v| v >= T::zero()),
        };
        if !ok {
            return Err(Error::InvalidParameter(format!("potential sign inconsistent with {species:?}")));
        }
        Ok(Self { grid, species })
    }

    /// Same potential with every value multiplied by `s > 0` (a power change).
    pub fn scaled(&self, s: T) -> Self {
        Self { grid: self.grid.map(|v| v * s), species: self.species }
    }
}
