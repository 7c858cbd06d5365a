//! Classical Monte-Carlo motion of atoms in optical traps.
//!
//! Every atom draws from its own ChaCha8 stream (the run seed selects the
//! key, the atom index selects the stream), so results do not depend on how
//! the work is scheduled across threads.

mod fields;
mod integrate;
mod oscillation;
mod recapture;

pub use fields::{Displaced, ForceField, GaussianTweezer, HarmonicTrap, Scaled};
pub use integrate::{evolve, free_flight, integrate_trajectory, Trajectory};
pub use oscillation::{bob_oscillation_experiment, OscillationConfig};
pub use recapture::{hold_recapture, release_recapture, rms_drift_time, RecoilKick, ReleaseRecaptureConfig};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::constants::CODATA;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Point atom in phase space.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomSample<T> {
    pub position: [T; 3],
    pub velocity: [T; 3],
    /// kg.
    pub mass: T,
}

impl<T: Real> AtomSample<T> {
    pub fn at_rest(position: [T; 3], mass: T) -> Self {
        Self { position, velocity: [T::zero(); 3], mass }
    }

    pub fn kinetic_energy(&self) -> T {
        let v2 = self.velocity.iter().map(|&v| v * v).sum::<T>();
        T::of(0.5) * self.mass * v2
    }
}

/// Thermal state of atoms in a harmonic trap.
#[derive(Clone, Debug, PartialEq)]
pub struct ThermalSpec<T> {
    /// Kelvin; 0 puts every atom at rest at the center.
    pub temperature: T,
    /// (ν_x, ν_y, ν_z), hertz.
    pub frequencies: [T; 3],
    pub center: [T; 3],
    pub mass: T,
}

impl<T: Real> ThermalSpec<T> {
    /// ⁸⁷Rb atoms.
    pub fn rb87(temperature: T, frequencies: [T; 3], center: [T; 3]) -> Self {
        Self { temperature, frequencies, center, mass: T::of(CODATA.rb87_mass) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= T::zero()) || !self.temperature.is_finite() {
            return Err(Error::InvalidParameter("temperature must be non-negative".into()));
        }
        if self.frequencies.iter().any(|&f| !(f > T::zero()) || !f.is_finite()) {
            return Err(Error::InvalidParameter("trap frequencies must be positive".into()));
        }
        if !(self.mass > T::zero()) {
            return Err(Error::InvalidParameter("mass must be positive".into()));
        }
        Ok(())
    }

    /// Per-axis velocity spread `√(k_B T / m)`.
    pub fn velocity_sigma(&self) -> T {
        (T::of(CODATA.boltzmann) * self.temperature / self.mass).sqrt()
    }

    /// Per-axis position spreads `σ_v / (2π ν_q)`.
    pub fn position_sigma(&self) -> [T; 3] {
        let sv = self.velocity_sigma();
        self.frequencies.map(|f| sv / (T::TAU() * f))
    }

    /// Atom `index` of the ensemble drawn with `seed`.
    pub fn sample(&self, seed: u64, index: u64) -> AtomSample<T> {
        let z = unit_normals(seed, index);
        let sq = self.position_sigma();
        let sv = self.velocity_sigma();
        AtomSample {
            position: [0, 1, 2].map(|a| self.center[a] + sq[a] * T::of(z[a])),
            velocity: [0, 1, 2].map(|a| sv * T::of(z[3 + a])),
            mass: self.mass,
        }
    }
}

/// Random stream of atom `index` under run `seed`.
pub fn atom_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// The six standard normals behind one thermal atom.
fn unit_normals(seed: u64, index: u64) -> [f64; 6] {
    let mut rng = atom_rng(seed, index);
    let mut z = [0.0; 6];
    for v in z.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    z
}

/// `n` thermal atoms: Gaussian positions with `σ_q = √(k_B T/m)/(2π ν_q)`
/// and Gaussian velocities with `σ_v = √(k_B T/m)` per axis.
pub fn sample_thermal<T: Real>(spec: &ThermalSpec<T>, n: usize, seed: u64) -> Result<Vec<AtomSample<T>>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one atom".into()));
    }
    Ok((0..n as u64).map(|i| spec.sample(seed, i)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_temperature_atoms_sit_at_center() {
        let s = ThermalSpec::rb87(0.0, [100e3, 100e3, 20e3], [1e-6, 0.0, -2e-6]);
        for a in sample_thermal(&s, 10, 3).unwrap() {
            assert_eq!(a.position, [1e-6, 0.0, -2e-6]);
            assert_eq!(a.velocity, [0.0; 3]);
        }
    }

    #[test]
    fn samples_are_reproducible_and_distinct() {
        let s = ThermalSpec::rb87(10e-6, [100e3, 100e3, 20e3], [0.0; 3]);
        let a = sample_thermal(&s, 5, 42).unwrap();
        let b = sample_thermal(&s, 5, 42).unwrap();
        let c = sample_thermal(&s, 5, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn velocity_sigma_at_seven_microkelvin() {
        let s = ThermalSpec::rb87(7e-6, [1.0; 3], [0.0; 3]);
        // √(k_B·7 µK / m_Rb) by hand
        let expected = (1.380649e-23f64 * 7e-6 / (86.909180527 * 1.66053906660e-27)).sqrt();
        assert!((s.velocity_sigma() - expected).abs() < 1e-15);
    }
}
