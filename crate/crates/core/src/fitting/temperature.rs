use super::{Curve, FitParam, FitResult};
use crate::dynamics::{release_recapture, ReleaseRecaptureConfig};
use crate::error::{Error, Result};
use crate::scalar::Real;

const NAME: &str = "mc_release_recapture";

/// Evenly spaced temperatures, kelvin.
#[derive(Clone, Debug, PartialEq)]
pub struct TemperatureGrid<T> {
    pub min: T,
    pub max: T,
    pub points: usize,
}

impl<T: Real> TemperatureGrid<T> {
    pub fn values(&self) -> Result<Vec<T>> {
        if self.points < 3 || !(self.min >= T::zero()) || !(self.max > self.min) {
            return Err(Error::InvalidParameter("temperature grid needs ≥ 3 points and 0 ≤ min < max".into()));
        }
        let step = (self.max - self.min) / T::of_usize(self.points - 1);
        Ok((0..self.points).map(|i| self.min + step * T::of_usize(i)).collect())
    }
}

/// χ² between `measured` and the simulated release-recapture curve at each
/// grid temperature. The simulation reuses `seed` for every temperature, so
/// the profile is smooth in T. Variances of data and simulation add.
pub fn temperature_chi2_profile<T: Real>(
    measured: &Curve<T>,
    cfg: &ReleaseRecaptureConfig<T>,
    grid: &TemperatureGrid<T>,
    mass: T,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>)> {
    if measured.x != cfg.off_times {
        return Err(Error::ShapeMismatch("measured abscissa must equal the configured release times".into()));
    }
    let temps = grid.values()?;
    let n = T::of_usize(cfg.atoms_per_point);
    let mut chi2 = Vec::with_capacity(temps.len());
    for &t in &temps {
        let sim = release_recapture(cfg, &cfg.thermal_spec(t, mass), seed)?;
        let mut c = T::zero();
        for i in 0..measured.len() {
            let p = sim.y[i];
            let floor = T::one() / (n * n);
            let var = measured.stderr[i] * measured.stderr[i] + sim.stderr[i] * sim.stderr[i];
            let d = measured.y[i] - p;
            c = c + d * d / var.max(floor);
        }
        chi2.push(c);
    }
    Ok((temps, chi2))
}

/// Temperature as the single free parameter of a Monte-Carlo release-recapture
/// model: χ² on a grid, parabola through the lowest point and its neighbours,
/// 1σ where χ² rises by one. A minimum on the grid edge is reported with
/// `converged = false`.
pub fn fit_temperature<T: Real>(
    measured: &Curve<T>,
    cfg: &ReleaseRecaptureConfig<T>,
    grid: &TemperatureGrid<T>,
    mass: T,
    seed: u64,
) -> Result<FitResult<T>> {
    let (temps, chi2) = temperature_chi2_profile(measured, cfg, grid, mass, seed)?;
    let k = (0..chi2.len()).fold(0, |b, i| if chi2[i] < chi2[b] { i } else { b });
    let dof = T::of_usize(measured.len().saturating_sub(1).max(1));
    let edge = |note: &str| FitResult {
        model: NAME.into(),
        params: vec![FitParam { name: "temperature".into(), value: temps[k], sigma: T::zero() }],
        chi2: chi2[k],
        reduced_chi2: chi2[k] / dof,
        converged: false,
        iterations: temps.len(),
        note: Some(note.into()),
    };
    if k == 0 || k + 1 == temps.len() {
        return Ok(edge("minimum at grid edge: temperature range too narrow"));
    }
    let h = temps[1] - temps[0];
    let (c0, c1, c2) = (chi2[k - 1], chi2[k], chi2[k + 1]);
    let curv = (c0 - T::of(2.0) * c1 + c2) / (h * h);
    if !(curv > T::zero()) {
        return Ok(edge("flat χ² profile"));
    }
    let shift = (c0 - c2) / (T::of(2.0) * h * curv);
    let t0 = temps[k] + shift;
    let a = curv / T::of(2.0);
    let cmin = c1 - a * shift * shift;
    Ok(FitResult {
        model: NAME.into(),
        params: vec![FitParam { name: "temperature".into(), value: t0, sigma: T::one() / a.sqrt() }],
        chi2: cmin,
        reduced_chi2: cmin / dof,
        converged: true,
        iterations: temps.len(),
        note: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::CODATA;
    use crate::dynamics::GaussianTweezer;

    fn cfg(n: usize) -> ReleaseRecaptureConfig<f64> {
        ReleaseRecaptureConfig {
            off_times: (0..16).map(|k| k as f64 * 8e-6).collect(),
            tweezer: GaussianTweezer { depth: CODATA.boltzmann * 1e-3, waist: 1.2e-6, wavelength: 820e-9, center: [0.0; 3] },
            atoms_per_point: n,
            recoil: None,
            gravity: None,
        }
    }

    #[test]
    fn grid_rejects_too_few_points() {
        assert!(TemperatureGrid { min: 1e-6, max: 2e-6, points: 2 }.values().is_err());
    }

    #[test]
    fn recovers_generating_temperature() {
        let c = cfg(2000);
        let m = CODATA.rb87_mass;
        let data = release_recapture(&c, &c.thermal_spec(10e-6, m), 101).unwrap();
        let grid = TemperatureGrid { min: 2e-6, max: 20e-6, points: 19 };
        let fit = fit_temperature(&data, &c, &grid, m, 7).unwrap();
        assert!(fit.converged, "{fit:?}");
        assert!((fit.value("temperature") - 10e-6).abs() < 1.5e-6, "{}", fit.value("temperature"));
    }
}
