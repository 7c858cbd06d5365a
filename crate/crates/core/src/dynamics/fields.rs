use crate::constants::CODATA;
use crate::potentials::{dipole_coefficient, TrapPotential};
use crate::scalar::Real;

/// Conservative force field. `None` marks positions outside its domain,
/// which an integrator treats as escape.
pub trait ForceField<T: Real>: Sync {
    fn force(&self, r: &[T; 3]) -> Option<[T; 3]>;

    fn energy(&self, r: &[T; 3]) -> Option<T>;
}

impl<T: Real, F: ForceField<T> + ?Sized> ForceField<T> for &F {
    fn force(&self, r: &[T; 3]) -> Option<[T; 3]> {
        (**self).force(r)
    }

    fn energy(&self, r: &[T; 3]) -> Option<T> {
        (**self).energy(r)
    }
}

impl<T: Real> ForceField<T> for TrapPotential<T> {
    fn force(&self, r: &[T; 3]) -> Option<[T; 3]> {
        crate::potentials::force_at(self, r).ok()
    }

    fn energy(&self, r: &[T; 3]) -> Option<T> {
        crate::potentials::energy_at(self, r).ok()
    }
}

/// `U = ½ Σ k_q (r_q − c_q)²`, optionally bounded by an escape sphere or
/// truncated at a depth.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicTrap<T> {
    pub center: [T; 3],
    /// N/m per axis.
    pub stiffness: [T; 3],
    pub escape_radius: Option<T>,
    /// Joules; positions where `U` exceeds it are outside the trap.
    pub depth: Option<T>,
}

impl<T: Real> HarmonicTrap<T> {
    pub fn from_frequencies(frequencies: [T; 3], mass: T, center: [T; 3]) -> Self {
        Self { center, stiffness: frequencies.map(|f| mass * (T::TAU() * f).powi(2)), escape_radius: None, depth: None }
    }

    pub fn with_escape_radius(mut self, r: T) -> Self {
        self.escape_radius = Some(r);
        self
    }

    pub fn with_depth(mut self, depth: T) -> Self {
        self.depth = Some(depth);
        self
    }

    fn potential(&self, d: &[T; 3]) -> T {
        (0..3).map(|a| T::of(0.5) * self.stiffness[a] * d[a] * d[a]).sum()
    }

    fn inside(&self, d: &[T; 3]) -> bool {
        self.escape_radius.is_none_or(|r| d.iter().map(|&v| v * v).sum::<T>() <= r * r)
            && self.depth.is_none_or(|u| self.potential(d) <= u)
    }
}

impl<T: Real> ForceField<T> for HarmonicTrap<T> {
    fn force(&self, r: &[T; 3]) -> Option<[T; 3]> {
        let d = [0, 1, 2].map(|a| r[a] - self.center[a]);
        self.inside(&d).then(|| [0, 1, 2].map(|a| -self.stiffness[a] * d[a]))
    }

    fn energy(&self, r: &[T; 3]) -> Option<T> {
        let d = [0, 1, 2].map(|a| r[a] - self.center[a]);
        self.inside(&d).then(|| self.potential(&d))
    }
}

/// Attractive Gaussian-beam dipole trap propagating along `z`,
/// `U = −U₀ (w₀/w(z))² exp(−2ρ²/w(z)²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianTweezer<T> {
    /// Joules, positive.
    pub depth: T,
    pub waist: T,
    pub wavelength: T,
    pub center: [T; 3],
}

impl<T: Real> GaussianTweezer<T> {
    /// Trap formed by `power` watts focused to `waist` on an atom of the given
    /// polarizability.
    pub fn from_power(power: T, waist: T, wavelength: T, polarizability: T) -> Self {
        let peak = T::of(2.0) * power / (T::PI() * waist * waist);
        let depth = T::of(dipole_coefficient(polarizability.as_f64())) * peak;
        Self { depth, waist, wavelength, center: [T::zero(); 3] }
    }

    pub fn rayleigh_range(&self) -> T {
        T::PI() * self.waist * self.waist / self.wavelength
    }

    /// Harmonic frequencies at the bottom of the trap (ν_r, ν_r, ν_z), hertz.
    pub fn harmonic_frequencies(&self, mass: T) -> [T; 3] {
        let zr = self.rayleigh_range();
        let nr = (T::of(4.0) * self.depth / (mass * self.waist * self.waist)).sqrt() / T::TAU();
        let nz = (T::of(2.0) * self.depth / (mass * zr * zr)).sqrt() / T::TAU();
        [nr, nr, nz]
    }

    pub fn depth_microkelvin(&self) -> f64 {
        CODATA.joules_to_microkelvin(self.depth.as_f64())
    }

    #[inline]
    fn parts(&self, r: &[T; 3]) -> ([T; 3], T, T) {
        let d = [0, 1, 2].map(|a| r[a] - self.center[a]);
        let zr = self.rayleigh_range();
        let q = T::one() + (d[2] / zr).powi(2);
        let rho2 = d[0] * d[0] + d[1] * d[1];
        let u = -self.depth / q * (-(T::of(2.0) * rho2) / (self.waist * self.waist * q)).exp();
        (d, q, u)
    }
}

impl<T: Real> ForceField<T> for GaussianTweezer<T> {
    fn force(&self, r: &[T; 3]) -> Option<[T; 3]> {
        let (d, q, u) = self.parts(r);
        let w2 = self.waist * self.waist;
        let zr = self.rayleigh_range();
        let rho2 = d[0] * d[0] + d[1] * d[1];
        let fr = u * T::of(4.0) / (w2 * q);
        let dq = T::of(2.0) * d[2] / (zr * zr);
        let du_dz = u * dq * (-T::one() / q + T::of(2.0) * rho2 / (w2 * q * q));
        Some([fr * d[0], fr * d[1], -du_dz])
    }

    fn energy(&self, r: &[T; 3]) -> Option<T> {
        Some(self.parts(r).2)
    }
}

/// `factor × U` (a power change of an intensity-derived trap).
#[derive(Clone, Debug)]
pub struct Scaled<F, T> {
    pub inner: F,
    pub factor: T,
}

impl<T: Real, F: ForceField<T>> ForceField<T> for Scaled<F, T> {
    fn force(&self, r: &[T; 3]) -> Option<[T; 3]> {
        self.inner.force(r).map(|f| f.map(|c| c * self.factor))
    }

    fn energy(&self, r: &[T; 3]) -> Option<T> {
        self.inner.energy(r).map(|e| e * self.factor)
    }
}

/// Field translated by `offset`.
#[derive(Clone, Debug)]
pub struct Displaced<F, T> {
    pub inner: F,
    pub offset: [T; 3],
}

impl<T: Real, F: ForceField<T>> ForceField<T> for Displaced<F, T> {
    fn force(&self, r: &[T; 3]) -> Option<[T; 3]> {
        self.inner.force(&[0, 1, 2].map(|a| r[a] - self.offset[a]))
    }

    fn energy(&self, r: &[T; 3]) -> Option<T> {
        self.inner.energy(&[0, 1, 2].map(|a| r[a] - self.offset[a]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tweezer_force_is_minus_gradient() {
        let t = GaussianTweezer::<f64> { depth: 1.38e-26, waist: 1.2e-6, wavelength: 820e-9, center: [0.1e-6, 0.0, 0.0] };
        let r = [0.5e-6, -0.3e-6, 1.7e-6];
        let f = t.force(&r).unwrap();
        for a in 0..3 {
            let h = 1e-11;
            let mut p = r;
            p[a] += h;
            let mut m = r;
            m[a] -= h;
            let g = (t.energy(&p).unwrap() - t.energy(&m).unwrap()) / (2.0 * h);
            assert!((f[a] + g).abs() < 1e-6 * f[a].abs().max(1e-22), "{a}: {} vs {}", f[a], -g);
        }
    }

    #[test]
    fn tweezer_frequencies_match_curvature() {
        let t = GaussianTweezer::<f64> { depth: 1.38e-26, waist: 1.2e-6, wavelength: 820e-9, center: [0.0; 3] };
        let m = CODATA.rb87_mass;
        let nu = t.harmonic_frequencies(m);
        let h = 1e-9;
        let kx = t.force(&[-h, 0.0, 0.0]).unwrap()[0] / h;
        assert!(((kx / m).sqrt() / std::f64::consts::TAU / nu[0] - 1.0).abs() < 1e-5);
        let kz = t.force(&[0.0, 0.0, -h]).unwrap()[2] / h;
        assert!(((kz / m).sqrt() / std::f64::consts::TAU / nu[2] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn harmonic_escape_sphere() {
        let h = HarmonicTrap::from_frequencies([1e3; 3], 1.0, [0.0; 3]).with_escape_radius(1.0);
        assert!(h.force(&[0.5, 0.0, 0.0]).is_some());
        assert!(h.force(&[1.5, 0.0, 0.0]).is_none());
    }

    #[test]
    fn harmonic_truncated_at_depth() {
        // k = 1 on x, 4 on z: U = 0.5 reached at x = 1 and z = 0.5
        let h = HarmonicTrap { center: [0.0; 3], stiffness: [1.0, 1.0, 4.0], escape_radius: None, depth: None }.with_depth(0.5);
        assert!(h.energy(&[0.9, 0.0, 0.0]).is_some());
        assert!(h.energy(&[0.0, 0.0, 0.6]).is_none());
        assert!(h.energy(&[1.1, 0.0, 0.0]).is_none());
    }
}
