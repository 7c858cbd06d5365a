use rayon::prelude::*;

use super::{evolve, free_flight, AtomSample, ForceField, GaussianTweezer, ThermalSpec};
use crate::error::{Error, Result};
use crate::fitting::Curve;
use crate::scalar::Real;

/// Momentum kick applied once during a protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoilKick<T> {
    /// m/s.
    pub speed: T,
    /// Unit vector.
    pub direction: [T; 3],
    /// Seconds after the protocol starts.
    pub time: T,
}

impl<T: Real> RecoilKick<T> {
    pub fn apply(&self, atom: &mut AtomSample<T>) {
        for a in 0..3 {
            atom.velocity[a] = atom.velocity[a] + self.speed * self.direction[a];
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.direction.iter().map(|&v| v * v).sum::<T>().sqrt();
        if (n - T::one()).abs() > T::of(1e-6) {
            return Err(Error::InvalidParameter("kick direction must be a unit vector".into()));
        }
        if !(self.time >= T::zero()) || !self.speed.is_finite() {
            return Err(Error::InvalidParameter("kick time must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReleaseRecaptureConfig<T> {
    /// Release durations τ, seconds, strictly increasing.
    pub off_times: Vec<T>,
    /// The trap that releases and recaptures.
    pub tweezer: GaussianTweezer<T>,
    pub atoms_per_point: usize,
    pub recoil: Option<RecoilKick<T>>,
    /// Uniform acceleration during the release, m/s².
    pub gravity: Option<[T; 3]>,
}

impl<T: Real> ReleaseRecaptureConfig<T> {
    /// Thermal state at `temperature` in the harmonic bottom of the tweezer.
    pub fn thermal_spec(&self, temperature: T, mass: T) -> ThermalSpec<T> {
        ThermalSpec {
            temperature,
            frequencies: self.tweezer.harmonic_frequencies(mass),
            center: self.tweezer.center,
            mass,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.off_times.is_empty() || self.off_times.iter().any(|&t| !(t >= T::zero())) {
            return Err(Error::InvalidParameter("release times must be non-negative".into()));
        }
        if self.off_times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("release times must be strictly increasing".into()));
        }
        if self.atoms_per_point == 0 {
            return Err(Error::InvalidParameter("need at least one atom per point".into()));
        }
        if !(self.tweezer.depth > T::zero()) || !(self.tweezer.waist > T::zero()) {
            return Err(Error::InvalidParameter("tweezer depth and waist must be positive".into()));
        }
        if let Some(k) = &self.recoil {
            k.validate()?;
        }
        Ok(())
    }
}

/// Bound in `field` (total energy below zero).
pub(crate) fn is_bound<T: Real, F: ForceField<T> + ?Sized>(atom: &AtomSample<T>, field: &F) -> bool {
    field.energy(&atom.position).is_some_and(|u| atom.kinetic_energy() + u < T::zero())
}

/// Binomial mean and standard error per point.
pub(crate) fn binomial_curve<T: Real>(x: Vec<T>, counts: &[usize], n: usize) -> Result<Curve<T>> {
    let nn = T::of_usize(n);
    let y: Vec<T> = counts.iter().map(|&k| T::of_usize(k) / nn).collect();
    let e = y.iter().map(|&p| (p * (T::one() - p) / nn).max(T::zero()).sqrt()).collect();
    Curve::new(x, y, e, vec![n; counts.len()])
}

/// Recapture probability after releasing thermal atoms for each τ.
///
/// The same atoms (common random numbers) are used at every τ; an atom is
/// recaptured when its energy in the restored tweezer is negative.
pub fn release_recapture<T: Real>(cfg: &ReleaseRecaptureConfig<T>, spec: &ThermalSpec<T>, seed: u64) -> Result<Curve<T>> {
    cfg.validate()?;
    spec.validate()?;
    let n = cfg.atoms_per_point;
    let taus = &cfg.off_times;
    let counts = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let start = spec.sample(seed, i);
            taus.iter()
                .map(|&tau| {
                    let mut a = start.clone();
                    match &cfg.recoil {
                        Some(k) if k.time <= tau => {
                            free_flight(&mut a, k.time, cfg.gravity);
                            k.apply(&mut a);
                            free_flight(&mut a, tau - k.time, cfg.gravity);
                        }
                        _ => free_flight(&mut a, tau, cfg.gravity),
                    }
                    usize::from(is_bound(&a, &cfg.tweezer))
                })
                .collect::<Vec<_>>()
        })
        .reduce(
            || vec![0; taus.len()],
            |mut acc, v| {
                for (a, b) in acc.iter_mut().zip(v) {
                    *a += b;
                }
                acc
            },
        );
    binomial_curve(taus.clone(), &counts, n)
}

/// Recapture probability after holding the atoms in `field` for each
/// duration. One trajectory per atom is followed through all durations;
/// leaving the field's domain counts as loss.
pub fn hold_recapture<T, F, W>(
    field: &F,
    tweezer: &W,
    spec: &ThermalSpec<T>,
    holds: &[T],
    atoms: usize,
    dt: T,
    seed: u64,
) -> Result<Curve<T>>
where
    T: Real,
    F: ForceField<T> + ?Sized,
    W: ForceField<T> + ?Sized,
{
    spec.validate()?;
    if holds.is_empty() || holds[0] < T::zero() || holds.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("hold times must be non-negative and strictly increasing".into()));
    }
    if atoms == 0 || !(dt > T::zero()) {
        return Err(Error::InvalidParameter("need atoms and a positive time step".into()));
    }
    let counts = (0..atoms as u64)
        .into_par_iter()
        .map(|i| {
            let mut out = vec![0usize; holds.len()];
            let mut atom = spec.sample(seed, i);
            let mut t = T::zero();
            for (j, &h) in holds.iter().enumerate() {
                if !evolve(&mut atom, field, dt, h - t) {
                    break;
                }
                t = h;
                out[j] = usize::from(is_bound(&atom, tweezer));
            }
            out
        })
        .reduce(
            || vec![0; holds.len()],
            |mut acc, v| {
                for (a, b) in acc.iter_mut().zip(v) {
                    *a += b;
                }
                acc
            },
        );
    binomial_curve(holds.to_vec(), &counts, atoms)
}

/// Time at which the r.m.s. distance of freely flying atoms from `center`
/// reaches `radius`. The ensemble moments are exact for the drawn sample:
/// `⟨|r₀ + v t − c|²⟩ = a + 2 b t + c t²`. Returns zero if the cloud starts
/// wider than `radius`.
pub fn rms_drift_time<T: Real>(atoms: &[AtomSample<T>], center: &[T; 3], radius: T) -> Result<T> {
    if atoms.is_empty() {
        return Err(Error::InvalidParameter("no atoms".into()));
    }
    let n = T::of_usize(atoms.len());
    let (mut a, mut b, mut c) = (T::zero(), T::zero(), T::zero());
    for at in atoms {
        for k in 0..3 {
            let d = at.position[k] - center[k];
            a = a + d * d;
            b = b + d * at.velocity[k];
            c = c + at.velocity[k] * at.velocity[k];
        }
    }
    let (a, b, c) = (a / n - radius * radius, b / n, c / n);
    if a >= T::zero() {
        return Ok(T::zero());
    }
    if !(c > T::zero()) {
        return Err(Error::InvalidParameter("atoms at rest never drift".into()));
    }
    Ok((-b + (b * b - c * a).sqrt()) / c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::CODATA;

    fn tweezer() -> GaussianTweezer<f64> {
        GaussianTweezer { depth: CODATA.boltzmann * 1e-3, waist: 1.2e-6, wavelength: 820e-9, center: [0.0; 3] }
    }

    fn cfg(taus: Vec<f64>, n: usize) -> ReleaseRecaptureConfig<f64> {
        ReleaseRecaptureConfig { off_times: taus, tweezer: tweezer(), atoms_per_point: n, recoil: None, gravity: None }
    }

    #[test]
    fn zero_release_recaptures_everything() {
        let c = cfg(vec![0.0], 2000);
        let spec = c.thermal_spec(7e-6, CODATA.rb87_mass);
        let curve = release_recapture(&c, &spec, 1).unwrap();
        assert_eq!(curve.y[0], 1.0);
    }

    #[test]
    fn recapture_is_deterministic_per_seed() {
        let c = cfg(vec![0.0, 20e-6, 40e-6, 80e-6], 500);
        let spec = c.thermal_spec(10e-6, CODATA.rb87_mass);
        assert_eq!(release_recapture(&c, &spec, 5).unwrap(), release_recapture(&c, &spec, 5).unwrap());
    }

    #[test]
    fn holding_in_the_tweezer_itself_keeps_every_atom() {
        let tw = tweezer();
        let c = cfg(vec![0.0], 1);
        let spec = c.thermal_spec(7e-6, CODATA.rb87_mass);
        let curve = hold_recapture(&tw, &tw, &spec, &[10e-6, 50e-6], 200, 2e-8, 3).unwrap();
        assert_eq!(curve.y, vec![1.0, 1.0]);
    }

    #[test]
    fn drift_time_of_a_cloud_at_rest_spreading() {
        let atoms = vec![
            AtomSample::<f64> { position: [0.0; 3], velocity: [1.0, 0.0, 0.0], mass: 1.0 },
            AtomSample { position: [0.0; 3], velocity: [0.0, -1.0, 0.0], mass: 1.0 },
        ];
        assert!((rms_drift_time(&atoms, &[0.0; 3], 2.0).unwrap() - 2.0).abs() < 1e-12);
    }
}
