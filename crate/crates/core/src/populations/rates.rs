use std::fmt::Write as _;

use crate::constants::CODATA;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Radiative lifetime of one circular level, used to fix the n⁻⁵ scaling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpontaneousAnchor<T> {
    pub n: u32,
    /// Seconds.
    pub lifetime: T,
}

impl<T: Real> Default for SpontaneousAnchor<T> {
    /// n = 50, 30 ms.
    fn default() -> Self {
        Self { n: 50, lifetime: T::of(30e-3) }
    }
}

/// Circular-state ladder `n_min..=n_max` plus one absorbing sink.
///
/// `matrix` is the generator of `dP/dt = M P`: entry `(to, from)` is the
/// rate from `from` to `to` and every column sums to zero. Transitions that
/// would leave the ladder at either end go to the sink.
#[derive(Clone, Debug, PartialEq)]
pub struct RateModel<T> {
    pub n_min: u32,
    pub n_max: u32,
    /// Kelvin.
    pub temperature: T,
    /// s⁻¹ from every circular level to the sink.
    pub leak_rate: T,
    pub anchor: SpontaneousAnchor<T>,
    pub matrix: Matrix<T>,
}

/// Hydrogenic circular-to-circular frequency `n → n−1`, hertz.
pub fn transition_frequency<T: Real>(n: u32) -> T {
    let (a, b) = (f64::from(n - 1), f64::from(n));
    T::of(CODATA.rb_rydberg_frequency() * (1.0 / (a * a) - 1.0 / (b * b)))
}

/// Planck occupation `1/(exp(hν/k_B T) − 1)`; zero at T = 0.
pub fn thermal_occupation<T: Real>(frequency: T, temperature: T) -> T {
    if temperature <= T::zero() {
        return T::zero();
    }
    let x = T::of(CODATA.planck) * frequency / (T::of(CODATA.boltzmann) * temperature);
    T::one() / x.exp_m1()
}

impl<T: Real> RateModel<T> {
    pub fn levels(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    /// Index of the sink in population vectors.
    pub fn sink(&self) -> usize {
        self.levels()
    }

    pub fn index(&self, n: u32) -> Result<usize> {
        if n < self.n_min || n > self.n_max {
            return Err(Error::InvalidParameter(format!("level {n} outside {}..={}", self.n_min, self.n_max)));
        }
        Ok((n - self.n_min) as usize)
    }

    /// Spontaneous rate `n → n−1`, s⁻¹.
    pub fn spontaneous_rate(&self, n: u32) -> T {
        let r = T::of(f64::from(self.anchor.n) / f64::from(n));
        r.powi(5) / self.anchor.lifetime
    }

    /// Total rate out of level `n` (the inverse of its lifetime).
    pub fn departure_rate(&self, n: u32) -> Result<T> {
        let i = self.index(n)?;
        Ok(-self.matrix.at(i, i))
    }

    /// `1 / departure_rate`, seconds.
    pub fn lifetime(&self, n: u32) -> Result<T> {
        let g = self.departure_rate(n)?;
        if !(g > T::zero()) {
            return Err(Error::InvalidModel(format!("level {n} does not decay")));
        }
        Ok(T::one() / g)
    }

    /// Copy in which every transition out of `n` ends in the sink, so the
    /// population of `n` decays as a single exponential.
    pub fn without_returns(&self, n: u32) -> Result<Self> {
        let i = self.index(n)?;
        let mut out = self.clone();
        let s = self.sink();
        for r in 0..=s {
            if r != i && r != s {
                *out.matrix.at_mut(r, i) = T::zero();
            }
        }
        *out.matrix.at_mut(s, i) = -self.matrix.at(i, i);
        Ok(out)
    }

    /// `from,to,rate_per_s` rows for every non-zero off-diagonal entry; the
    /// sink is written as `sink`.
    pub fn to_csv(&self) -> String {
        let name = |k: usize| if k == self.sink() { "sink".to_string() } else { (self.n_min + k as u32).to_string() };
        let mut s = String::from("from,to,rate_per_s\n");
        for from in 0..=self.sink() {
            for to in 0..=self.sink() {
                let r = self.matrix.at(to, from);
                if to != from && r != T::zero() {
                    let _ = writeln!(s, "{},{},{:e}", name(from), name(to), r.as_f64());
                }
            }
        }
        s
    }
}

/// Blackbody-coupled circular ladder at `temperature`.
///
/// Spontaneous decay `n → n−1` follows `(anchor.n / n)⁵ / anchor.lifetime`.
/// Stimulated emission adds `Γ_sp n̄` downward and absorption `Γ_sp(n+1) n̄`
/// upward, with `n̄` the Planck occupation at the hydrogenic frequency.
pub fn build_rate_model<T: Real>(
    n_range: (u32, u32),
    temperature: T,
    anchor: SpontaneousAnchor<T>,
    leak_rate: T,
) -> Result<RateModel<T>> {
    let (n_min, n_max) = n_range;
    if n_min < 3 || n_max <= n_min {
        return Err(Error::InvalidParameter(format!("bad level range {n_min}..={n_max}")));
    }
    if !(temperature >= T::zero()) || !temperature.is_finite() {
        return Err(Error::InvalidParameter("environment temperature must be non-negative".into()));
    }
    if !(leak_rate >= T::zero()) || !leak_rate.is_finite() {
        return Err(Error::InvalidParameter("leak rate must be non-negative".into()));
    }
    if anchor.n < 2 || !(anchor.lifetime > T::zero()) {
        return Err(Error::InvalidParameter("spontaneous anchor needs n ≥ 2 and a positive lifetime".into()));
    }
    let levels = (n_max - n_min + 1) as usize;
    let mut model = RateModel { n_min, n_max, temperature, leak_rate, anchor, matrix: Matrix::zeros(levels + 1) };
    let sink = levels;
    let add = |m: &mut Matrix<T>, from: usize, to: usize, r: T| {
        *m.at_mut(to, from) = m.at(to, from) + r;
        *m.at_mut(from, from) = m.at(from, from) - r;
    };
    let mut m = Matrix::zeros(levels + 1);
    for n in n_min..=n_max {
        let i = (n - n_min) as usize;
        let down = model.spontaneous_rate(n) * (T::one() + thermal_occupation(transition_frequency(n), temperature));
        let up = model.spontaneous_rate(n + 1) * thermal_occupation(transition_frequency::<T>(n + 1), temperature);
        add(&mut m, i, if n > n_min { i - 1 } else { sink }, down);
        add(&mut m, i, if n < n_max { i + 1 } else { sink }, up);
        if leak_rate > T::zero() {
            add(&mut m, i, sink, leak_rate);
        }
    }
    model.matrix = m;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_temperature_anchor_is_exact() {
        let m = build_rate_model((40, 60), 0.0, SpontaneousAnchor::default(), 0.0).unwrap();
        assert_eq!(m.lifetime(50).unwrap(), 30e-3);
    }

    #[test]
    fn columns_sum_to_zero() {
        let m = build_rate_model((45, 58), 300.0, SpontaneousAnchor::default(), 200.0).unwrap();
        for j in 0..=m.sink() {
            let s: f64 = (0..=m.sink()).map(|i| m.matrix.at(i, j)).sum();
            assert!(s.abs() < 1e-9 * m.matrix.at(j, j).abs().max(1.0));
        }
    }

    #[test]
    fn occupation_at_the_hydrogenic_frequency() {
        let nu: f64 = transition_frequency(52);
        assert!((nu - 48.18e9).abs() < 0.01e9, "{nu}");
        // Planck law evaluated by hand at 300 K
        let x = 6.62607015e-34 * nu / (1.380649e-23 * 300.0);
        let expected = 1.0 / (x.exp() - 1.0);
        assert!((thermal_occupation(nu, 300.0) - expected).abs() < 1e-9 * expected);
        assert!((expected - 129.2).abs() < 0.1);
    }

    #[test]
    fn removing_returns_keeps_the_departure_rate() {
        let m = build_rate_model((45, 58), 300.0, SpontaneousAnchor::default(), 0.0).unwrap();
        let d = m.without_returns(52).unwrap();
        assert_eq!(d.departure_rate(52).unwrap(), m.departure_rate(52).unwrap());
        let i = d.index(52).unwrap();
        assert_eq!(d.matrix.at(i + 1, i), 0.0);
    }
}
