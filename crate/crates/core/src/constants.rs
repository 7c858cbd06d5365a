//! CODATA 2018 constants (SI units).

/// Immutable set of physical constants used by the potential and rate models.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    /// Elementary charge (C).
    pub elementary_charge: f64,
    /// Electron mass (kg).
    pub electron_mass: f64,
    /// Vacuum permittivity (F/m).
    pub vacuum_permittivity: f64,
    /// Speed of light (m/s).
    pub speed_of_light: f64,
    /// Planck constant (J s).
    pub planck: f64,
    /// Reduced Planck constant (J s).
    pub reduced_planck: f64,
    /// Boltzmann constant (J/K).
    pub boltzmann: f64,
    /// Mass of a ⁸⁷Rb atom (kg).
    pub rb87_mass: f64,
    /// Rydberg constant for infinite nuclear mass (1/m).
    pub rydberg_infinity: f64,
}

pub const CODATA: PhysicalConstants = PhysicalConstants {
    elementary_charge: 1.602_176_634e-19,
    electron_mass: 9.109_383_701_5e-31,
    vacuum_permittivity: 8.854_187_812_8e-12,
    speed_of_light: 299_792_458.0,
    planck: 6.626_070_15e-34,
    reduced_planck: 1.054_571_817e-34,
    boltzmann: 1.380_649e-23,
    rb87_mass: 86.909_180_527 * 1.660_539_066_60e-27,
    rydberg_infinity: 10_973_731.568_160,
};

impl PhysicalConstants {
    /// Rydberg frequency `R c` corrected for the finite ⁸⁷Rb nuclear mass (Hz).
    pub fn rb_rydberg_frequency(&self) -> f64 {
        self.rydberg_infinity * self.speed_of_light / (1.0 + self.electron_mass / self.rb87_mass)
    }

    /// Converts an energy in joules to a temperature in microkelvin.
    pub fn joules_to_microkelvin(&self, energy: f64) -> f64 {
        energy / self.boltzmann * 1e6
    }
}
