use crate::error::{Error, Result};
use crate::fitting::Curve;
use crate::scalar::Real;

/// Chain of efficiencies between a circular-state population and the
/// recapture probability measured on a loaded site.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionModel<T> {
    /// Probability that a site holds an atom. Recapture probabilities are
    /// conditioned on loading, so this enters only `unconditioned`.
    pub fill: T,
    pub preparation: T,
    pub purity: T,
    /// Optical π-pulse and recapture efficiency.
    pub optical: T,
    /// Recapture probability with no circular atom present.
    pub background: T,
}

impl<T: Real> Default for DetectionModel<T> {
    /// Fill 0.62, preparation 0.70, purity 0.9, optical factor set so the
    /// total efficiency is 0.35, background 3×10⁻⁴.
    fn default() -> Self {
        Self {
            fill: T::of(0.62),
            preparation: T::of(0.70),
            purity: T::of(0.9),
            optical: T::of(0.35 / (0.70 * 0.9)),
            background: T::of(3e-4),
        }
    }
}

impl<T: Real> DetectionModel<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("fill", self.fill),
            ("preparation", self.preparation),
            ("purity", self.purity),
            ("optical", self.optical),
            ("background", self.background),
        ] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::InvalidParameter(format!("detection factor {name} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn efficiency(&self) -> T {
        self.preparation * self.purity * self.optical
    }

    /// `P_recap = η P₅₂ + background`.
    pub fn predict(&self, p52: T) -> Result<T> {
        self.validate()?;
        if !(p52 >= T::zero() && p52 <= T::one()) {
            return Err(Error::InvalidParameter("population outside [0, 1]".into()));
        }
        let p = self.efficiency() * p52 + self.background;
        if p > T::one() {
            return Err(Error::InvalidModel("predicted recapture probability exceeds 1".into()));
        }
        Ok(p)
    }

    /// Population behind a measured recapture probability.
    pub fn invert(&self, p_recap: T) -> Result<T> {
        self.validate()?;
        let eta = self.efficiency();
        if !(eta > T::zero()) {
            return Err(Error::InvalidModel("zero detection efficiency".into()));
        }
        Ok((p_recap - self.background) / eta)
    }

    /// Per-site probability including the loading step.
    pub fn unconditioned(&self, p52: T) -> Result<T> {
        Ok(self.fill * self.predict(p52)?)
    }
}

/// `P(t) / P(t₀)` with errors scaled alike.
pub fn normalize_to_first<T: Real>(curve: &Curve<T>) -> Result<Curve<T>> {
    let p0 = *curve.y.first().ok_or_else(|| Error::InvalidParameter("empty curve".into()))?;
    if !(p0 > T::zero()) {
        return Err(Error::InvalidParameter("first point must be positive".into()));
    }
    Curve::new(
        curve.x.clone(),
        curve.y.iter().map(|&v| v / p0).collect(),
        curve.stderr.iter().map(|&v| v / p0).collect(),
        curve.n_samples.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_state_without_background_is_never_recaptured() {
        let d = DetectionModel { background: 0.0, ..DetectionModel::default() };
        assert_eq!(d.predict(0.0).unwrap(), 0.0);
    }

    #[test]
    fn default_chain_peaks_at_point_three_five() {
        let d = DetectionModel { background: 0.0, ..DetectionModel::<f64>::default() };
        assert!((d.predict(1.0).unwrap() - 0.35).abs() < 1e-15);
    }

    #[test]
    fn round_trip() {
        let d = DetectionModel { background: 0.0, ..DetectionModel::<f64>::default() };
        for p in [0.0, 0.13, 0.5, 0.97] {
            assert!((d.invert(d.predict(p).unwrap()).unwrap() - p).abs() < 1e-12);
        }
    }

    #[test]
    fn overflow_is_an_invalid_model() {
        let d = DetectionModel { preparation: 1.0, purity: 1.0, optical: 1.0, background: 0.01, fill: 1.0 };
        assert!(matches!(d.predict(1.0), Err(Error::InvalidModel(_))));
    }
}
