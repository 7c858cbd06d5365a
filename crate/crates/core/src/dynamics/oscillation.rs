use rayon::prelude::*;

use super::recapture::{binomial_curve, is_bound};
use super::{evolve, free_flight, Displaced, ForceField, RecoilKick, ThermalSpec};
use crate::error::{Error, Result};
use crate::fitting::Curve;
use crate::scalar::Real;

/// Switch-off protocol probing the motion of atoms in a displaced bottle beam.
#[derive(Clone, Debug, PartialEq)]
pub struct OscillationConfig<T> {
    /// Bottle-beam center relative to the tweezer center, meters.
    pub bob_offset: [T; 3],
    /// Duration of the bottle-beam switch-off, seconds.
    pub off_window: T,
    /// Delays Δt from turn-on to switch-off, seconds, strictly increasing.
    pub delays: Vec<T>,
    /// Time τ between tweezer turn-off and recapture, seconds.
    pub total: T,
    pub atoms: usize,
    /// Integration step, seconds.
    pub dt: T,
    /// Excitation kick, applied at its `time` (normally 0).
    pub recoil: Option<RecoilKick<T>>,
}

impl<T: Real> OscillationConfig<T> {
    fn validate(&self) -> Result<()> {
        if !(self.off_window > T::zero()) {
            return Err(Error::InvalidParameter("off window must be positive".into()));
        }
        if self.delays.is_empty() || self.delays[0] < T::zero() || self.delays.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("delays must be non-negative and strictly increasing".into()));
        }
        if self.delays[self.delays.len() - 1] + self.off_window > self.total {
            return Err(Error::InvalidParameter("last switch-off window ends after τ".into()));
        }
        if self.atoms == 0 || !(self.dt > T::zero()) {
            return Err(Error::InvalidParameter("need atoms and a positive time step".into()));
        }
        if let Some(k) = &self.recoil {
            if !(k.time >= T::zero() && k.time <= self.delays[0]) {
                return Err(Error::InvalidParameter("kick must happen before the first switch-off".into()));
            }
        }
        Ok(())
    }
}

/// Recapture probability versus switch-off delay Δt.
///
/// Atoms are drawn from `spec` (the tweezer state) and evolve in the bottle
/// beam translated by `bob_offset` for Δt, fly freely for the off window,
/// evolve again until τ, and count as recaptured when bound in `tweezer`.
/// Leaving the bottle-beam domain counts as loss. Each atom follows one
/// trajectory up to every Δt and branches from there, so all delays share
/// the same random numbers.
pub fn bob_oscillation_experiment<T, B, W>(
    cfg: &OscillationConfig<T>,
    bob: &B,
    tweezer: &W,
    spec: &ThermalSpec<T>,
    seed: u64,
) -> Result<Curve<T>>
where
    T: Real,
    B: ForceField<T> + ?Sized,
    W: ForceField<T> + ?Sized,
{
    cfg.validate()?;
    spec.validate()?;
    let field = Displaced { inner: bob, offset: cfg.bob_offset };
    let nd = cfg.delays.len();
    let counts = (0..cfg.atoms as u64)
        .into_par_iter()
        .map(|i| {
            let mut out = vec![0usize; nd];
            let mut atom = spec.sample(seed, i);
            let mut t = T::zero();
            if let Some(k) = &cfg.recoil {
                if !evolve(&mut atom, &field, cfg.dt, k.time) {
                    return out;
                }
                k.apply(&mut atom);
                t = k.time;
            }
            for (j, &delay) in cfg.delays.iter().enumerate() {
                if !evolve(&mut atom, &field, cfg.dt, delay - t) {
                    return out;
                }
                t = delay;
                let mut branch = atom.clone();
                free_flight(&mut branch, cfg.off_window, None);
                if evolve(&mut branch, &field, cfg.dt, cfg.total - delay - cfg.off_window) && is_bound(&branch, tweezer) {
                    out[j] = 1;
                }
            }
            out
        })
        .reduce(
            || vec![0; nd],
            |mut acc, v| {
                for (a, b) in acc.iter_mut().zip(v) {
                    *a += b;
                }
                acc
            },
        );
    binomial_curve(cfg.delays.clone(), &counts, cfg.atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::CODATA;
    use crate::dynamics::{GaussianTweezer, HarmonicTrap};

    #[test]
    fn atoms_at_rest_on_center_give_a_flat_curve() {
        let m = CODATA.rb87_mass;
        let bob = HarmonicTrap::from_frequencies([15.8e3, 15.8e3, 7e3], m, [0.0; 3]).with_escape_radius(1e-6);
        let tw = GaussianTweezer { depth: CODATA.boltzmann * 1e-3, waist: 1.2e-6, wavelength: 820e-9, center: [0.0; 3] };
        let spec = ThermalSpec::rb87(0.0, [100e3, 100e3, 20e3], [0.0; 3]);
        let cfg = OscillationConfig {
            bob_offset: [0.0; 3],
            off_window: 15e-6,
            delays: (0..20).map(|k| 20e-6 + k as f64 * 5e-6).collect(),
            total: 210e-6,
            atoms: 50,
            dt: 1e-7,
            recoil: None,
        };
        let c = bob_oscillation_experiment(&cfg, &bob, &tw, &spec, 9).unwrap();
        assert!(c.y.iter().all(|&p| p == 1.0));
    }
}
