use super::lm::{levenberg_marquardt, LmOptions, Model};
use super::regression::linear_regression;
use super::{Curve, FitParam, FitResult};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Treatment of the constant floor `B` in `B + A e^{−t/τ_c}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Background<T> {
    Fixed(T),
    Free,
}

struct Decay<T> {
    floor: Option<T>,
}

impl<T: Real> Model<T> for Decay<T> {
    fn n_params(&self) -> usize {
        if self.floor.is_some() { 2 } else { 3 }
    }

    fn eval(&self, t: T, p: &[T]) -> T {
        let b = self.floor.unwrap_or_else(|| p[2]);
        b + p[0] * (-p[1] * t).exp()
    }

    fn gradient(&self, t: T, p: &[T], out: &mut [T]) {
        let e = (-p[1] * t).exp();
        out[0] = e;
        out[1] = -t * p[0] * e;
        if self.floor.is_none() {
            out[2] = T::one();
        }
    }
}

/// Weighted fit of `B + A e^{−t/τ_c}`. Reports `amplitude`, `rate`,
/// `decay_time` and `background` (with zero uncertainty when fixed).
pub fn fit_exponential<T: Real>(curve: &Curve<T>, background: Background<T>) -> Result<FitResult<T>> {
    const NAME: &str = "exponential";
    let n = curve.len();
    if n < 4 {
        return Err(Error::Fit(format!("exponential fit needs at least 4 points, got {n}")));
    }
    let (lo, hi) = curve.y.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), &y| (a.min(y), b.max(y)));
    let b0 = match background {
        Background::Fixed(b) => b,
        Background::Free => lo - T::of(0.05) * (hi - lo),
    };
    // log-linear starting point from the points above the floor
    let (mut xs, mut ls) = (Vec::new(), Vec::new());
    for (&x, &y) in curve.x.iter().zip(&curve.y) {
        if y > b0 {
            xs.push(x);
            ls.push((y - b0).ln());
        }
    }
    let (a0, k0) = match linear_regression(&xs, &ls, None) {
        Ok(line) if line.slope < T::zero() => (line.intercept.exp(), -line.slope),
        _ => {
            let span = curve.x[n - 1] - curve.x[0];
            ((hi - b0).max(T::min_positive_value()), T::one() / span)
        }
    };
    let floor = match background {
        Background::Fixed(b) => Some(b),
        Background::Free => None,
    };
    let model = Decay { floor };
    let mut p0 = vec![a0, k0];
    if floor.is_none() {
        p0.push(b0);
    }
    let w = curve.weights();
    let out = levenberg_marquardt(&model, &curve.x, &curve.y, &w, &p0, &LmOptions::default())?;
    let np = p0.len();
    let reduced = if n > np { out.chi2 / T::of_usize(n - np) } else { T::nan() };
    let scale = if curve.has_errors() { T::one() } else { reduced };
    let sig = |k: usize| out.covariance.as_ref().map_or(T::nan(), |c| (c.at(k, k) * scale).max(T::zero()).sqrt());
    let (a, k) = (out.params[0], out.params[1]);
    let (b, sb) = match floor {
        Some(b) => (b, T::zero()),
        None => (out.params[2], sig(2)),
    };
    let mut converged = out.converged;
    let mut note = if converged { None } else { Some("iteration limit reached".to_string()) };
    if !(k > T::zero()) || !(a > T::zero()) {
        converged = false;
        note = Some("data do not decay".to_string());
    }
    Ok(FitResult {
        model: NAME.into(),
        params: vec![
            FitParam { name: "amplitude".into(), value: a, sigma: sig(0) },
            FitParam { name: "rate".into(), value: k, sigma: sig(1) },
            FitParam { name: "decay_time".into(), value: T::one() / k, sigma: sig(1) / (k * k) },
            FitParam { name: "background".into(), value: b, sigma: sb },
        ],
        chi2: out.chi2,
        reduced_chi2: reduced,
        converged,
        iterations: out.iterations,
        note,
    })
}

/// Decay times fitted before and after perturbing the background estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct BackgroundSensitivity<T> {
    pub decay_time: T,
    pub shifted_decay_time: T,
    /// `(shifted − nominal) / nominal`.
    pub relative_shift: T,
}

/// Refits after moving the background estimate from `nominal` to
/// `nominal + delta`. `build` turns a background estimate into the curve to
/// fit (e.g. background-subtracted, normalized data).
pub fn background_sensitivity<T: Real>(
    build: impl Fn(T) -> Result<Curve<T>>,
    nominal: T,
    delta: T,
    background: Background<T>,
) -> Result<BackgroundSensitivity<T>> {
    let fit = |b: T| -> Result<T> {
        let r = fit_exponential(&build(b)?, background)?;
        if !r.converged {
            return Err(Error::Fit(r.note.unwrap_or_else(|| "exponential fit failed".into())));
        }
        Ok(r.value("decay_time"))
    };
    let t0 = fit(nominal)?;
    let t1 = fit(nominal + delta)?;
    Ok(BackgroundSensitivity { decay_time: t0, shifted_decay_time: t1, relative_shift: (t1 - t0) / t0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(b: f64) -> Curve<f64> {
        let x: Vec<f64> = (0..40).map(|i| i as f64 * 0.25e-3).collect();
        let y = x.iter().map(|&t| b + (-t / 5e-3).exp()).collect();
        Curve::from_xy(x, y).unwrap()
    }

    #[test]
    fn noiseless_fixed_background() {
        let fit = fit_exponential(&synthetic(0.0), Background::Fixed(0.0)).unwrap();
        assert!(fit.converged);
        assert!((fit.value("decay_time") / 5e-3 - 1.0).abs() < 1e-6);
        assert!((fit.value("amplitude") - 1.0).abs() < 1e-6);
    }

    #[test]
    fn noiseless_free_background() {
        let fit = fit_exponential(&synthetic(0.02), Background::Free).unwrap();
        assert!(fit.converged);
        assert!((fit.value("decay_time") / 5e-3 - 1.0).abs() < 1e-6);
        assert!((fit.value("background") - 0.02).abs() < 1e-8);
    }

    #[test]
    fn growing_data_do_not_converge() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y = x.iter().map(|&t| 0.1 * (0.2 * t).exp()).collect();
        let fit = fit_exponential(&Curve::from_xy(x, y).unwrap(), Background::Fixed(0.0)).unwrap();
        assert!(!fit.converged);
    }
}
