//! Internal-state populations: the blackbody-coupled circular ladder,
//! site-resolved Rabi flopping and the optical detection chain.

mod detection;
mod rabi;
mod rates;

pub use detection::{normalize_to_first, DetectionModel};
pub use rabi::{collapse_revival, rabi_signal, CollapseRevival, RabiArrayModel, RabiSignal};
pub use rates::{build_rate_model, thermal_occupation, transition_frequency, RateModel, SpontaneousAnchor};

use crate::error::{Error, Result};
use crate::fitting::Curve;
use crate::scalar::Real;

/// Occupation of each ladder level followed by the sink.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationVector<T> {
    pub probabilities: Vec<T>,
}

impl<T: Real> PopulationVector<T> {
    /// All population in level `n`.
    pub fn pure(model: &RateModel<T>, n: u32) -> Result<Self> {
        let mut p = vec![T::zero(); model.levels() + 1];
        p[model.index(n)?] = T::one();
        Ok(Self { probabilities: p })
    }

    pub fn validate(&self) -> Result<()> {
        let eps = T::of(1e-9);
        if self.probabilities.iter().any(|&p| !(p >= -eps && p <= T::one() + eps)) {
            return Err(Error::InvalidParameter("populations must lie in [0, 1]".into()));
        }
        if (self.total() - T::one()).abs() > eps {
            return Err(Error::InvalidParameter("populations must sum to 1".into()));
        }
        Ok(())
    }

    pub fn total(&self) -> T {
        self.probabilities.iter().copied().sum()
    }
}

/// `P(t) = exp(M t) P(0)` for each time.
pub fn evolve_populations<T: Real>(
    model: &RateModel<T>,
    initial: &PopulationVector<T>,
    times: &[T],
) -> Result<Vec<PopulationVector<T>>> {
    initial.validate()?;
    if initial.probabilities.len() != model.levels() + 1 {
        return Err(Error::ShapeMismatch("population vector does not match the model".into()));
    }
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if !(t >= T::zero()) {
            return Err(Error::InvalidParameter("evolution times must be non-negative".into()));
        }
        let mut mt = model.matrix.clone();
        mt.data.iter_mut().for_each(|v| *v = *v * t);
        out.push(PopulationVector { probabilities: mt.expm().matvec(&initial.probabilities) });
    }
    Ok(out)
}

/// Time at which the population of `n`, starting pure, falls to 1/e.
pub fn one_over_e_time<T: Real>(model: &RateModel<T>, n: u32) -> Result<T> {
    let i = model.index(n)?;
    let p0 = PopulationVector::pure(model, n)?;
    let target = (-T::one()).exp();
    let at = |t: T| evolve_populations(model, &p0, &[t]).map(|v| v[0].probabilities[i]);
    let mut hi = model.lifetime(n)?;
    while at(hi)? > target {
        hi = hi * T::of(2.0);
        if hi > T::of(1e3) {
            return Err(Error::InvalidModel(format!("level {n} never reaches 1/e")));
        }
    }
    let mut lo = T::zero();
    for _ in 0..80 {
        let mid = (lo + hi) / T::of(2.0);
        if at(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::of(2.0))
}

/// Lifetime-limited recapture reference `anchor · P_n(τ − 2 T_e)` for an
/// atom prepared in level `n`. Every τ must be at least `tau_min`.
pub fn decay_reference_curve<T: Real>(
    model: &RateModel<T>,
    n: u32,
    taus: &[T],
    tau_min: T,
    transfer_time: T,
    anchor: T,
) -> Result<Curve<T>> {
    if let Some(t) = taus.iter().find(|&&t| !(t >= tau_min)) {
        return Err(Error::InvalidParameter(format!("τ = {} below τ_min", t.as_f64())));
    }
    let two_te = T::of(2.0) * transfer_time;
    if !(tau_min >= two_te) {
        return Err(Error::InvalidParameter("τ_min shorter than the two transfers".into()));
    }
    let i = model.index(n)?;
    let internal: Vec<T> = taus.iter().map(|&t| t - two_te).collect();
    let p = evolve_populations(model, &PopulationVector::pure(model, n)?, &internal)?;
    let y = p.iter().map(|v| anchor * v.probabilities[i]).collect();
    Curve::from_xy(taus.to_vec(), y)
}
