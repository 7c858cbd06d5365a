use super::{Species, TrapPotential};
use crate::constants::CODATA;
use crate::error::{Error, Result};
use crate::optics::{IntensityVolume, TWEEZER_WAIST};
use crate::scalar::Real;

/// `e² / (2 ε₀ c m_e ω²)` in J per W/m².
pub fn ponderomotive_coefficient(wavelength: f64) -> f64 {
    let c = &CODATA;
    let omega = std::f64::consts::TAU * c.speed_of_light / wavelength;
    c.elementary_charge.powi(2) / (2.0 * c.vacuum_permittivity * c.speed_of_light * c.electron_mass * omega * omega)
}

/// `α / (2 ε₀ c)` in J per W/m².
pub fn dipole_coefficient(polarizability: f64) -> f64 {
    polarizability / (2.0 * CODATA.vacuum_permittivity * CODATA.speed_of_light)
}

/// Ground-state polarizability (SI, C·m²/V) that makes a 2.6 mW beam focused
/// to a 1.2 µm waist exactly 1 mK deep.
pub fn default_ground_polarizability() -> f64 {
    let power = 2.6e-3;
    let peak = 2.0 * power / (std::f64::consts::PI * TWEEZER_WAIST * TWEEZER_WAIST);
    let depth = CODATA.boltzmann * 1e-3;
    2.0 * CODATA.vacuum_permittivity * CODATA.speed_of_light * depth / peak
}

pub fn ponderomotive_potential<T: Real>(volume: &IntensityVolume<T>, wavelength: T) -> Result<TrapPotential<T>> {
    if !(wavelength > T::zero()) {
        return Err(Error::InvalidParameter("wavelength must be positive".into()));
    }
    let k = T::of(ponderomotive_coefficient(wavelength.as_f64()));
    TrapPotential::new(volume.grid.map(|i| k * i), Species::RydbergPonderomotive)
}

pub fn dipole_potential<T: Real>(volume: &IntensityVolume<T>, polarizability: T) -> Result<TrapPotential<T>> {
    if !(polarizability > T::zero()) {
        return Err(Error::InvalidParameter("polarizability must be positive".into()));
    }
    let k = T::of(dipole_coefficient(polarizability.as_f64()));
    TrapPotential::new(volume.grid.map(|i| -(k * i)), Species::GroundDipole)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid3;

    fn uniform(i: f64) -> IntensityVolume<f64> {
        let grid = Grid3::new([2, 2, 2], [1e-7; 3], [0.0; 3], vec![i; 8]).unwrap();
        IntensityVolume { grid, wavelength: 820e-9, total_power: 1e-3 }
    }

    #[test]
    fn ponderomotive_coefficient_value() {
        // e²/(2ε₀ c m_e ω²) at 820 nm, by hand
        let u = ponderomotive_coefficient(820e-9) * 1e9;
        let uk = CODATA.joules_to_microkelvin(u);
        assert!((uk - 72.857).abs() < 0.01, "{uk}");
    }

    #[test]
    fn dark_volume_gives_zero_potential() {
        let p = ponderomotive_potential(&uniform(0.0), 820e-9).unwrap();
        assert!(p.grid.values.iter().all(|&v| v == 0.0));
        let d = dipole_potential(&uniform(0.0), default_ground_polarizability()).unwrap();
        assert!(d.grid.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn signs_follow_species() {
        let p = ponderomotive_potential(&uniform(1e9), 820e-9).unwrap();
        assert!(p.grid.values[0] > 0.0);
        let d = dipole_potential(&uniform(1e9), 1e-38).unwrap();
        assert!(d.grid.values[0] < 0.0);
        assert!(dipole_potential(&uniform(1e9), -1.0).is_err());
        assert!(ponderomotive_potential(&uniform(1e9), 0.0).is_err());
    }

    #[test]
    fn default_polarizability_reproduces_one_millikelvin() {
        let peak = 2.0 * 2.6e-3 / (std::f64::consts::PI * 1.2e-6f64.powi(2));
        let u = dipole_coefficient(default_ground_polarizability()) * peak;
        assert!((CODATA.joules_to_microkelvin(u) - 1000.0).abs() < 1e-9);
    }
}
