use num_complex::Complex;

use super::lm::{levenberg_marquardt, LmOptions, Model};
use super::{Curve, FitParam, FitResult};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `C + A e^{−γ t} cos(2π f t + φ)` with `p = [C, A, γ, f, φ]`.
pub fn damped_sine<T: Real>(t: T, p: &[T]) -> T {
    p[0] + p[1] * (-p[2] * t).exp() * (T::TAU() * p[3] * t + p[4]).cos()
}

struct DampedSine;

impl<T: Real> Model<T> for DampedSine {
    fn n_params(&self) -> usize {
        5
    }

    fn eval(&self, x: T, p: &[T]) -> T {
        damped_sine(x, p)
    }

    fn gradient(&self, t: T, p: &[T], out: &mut [T]) {
        let env = (-p[2] * t).exp();
        let arg = T::TAU() * p[3] * t + p[4];
        let (s, c) = arg.sin_cos();
        out[0] = T::one();
        out[1] = env * c;
        out[2] = -t * p[1] * env * c;
        out[3] = -p[1] * env * s * T::TAU() * t;
        out[4] = -p[1] * env * s;
    }
}

/// Starting point for [`fit_damped_sine`].
#[derive(Clone, Debug, PartialEq)]
pub struct DampedSineGuess<T> {
    pub offset: T,
    pub amplitude: T,
    pub decay_rate: T,
    pub frequency: T,
    pub phase: T,
}

/// Strongest Fourier component of the mean-subtracted curve, searched on a
/// 16× oversampled grid from half a cycle per span up to the mean-spacing
/// Nyquist frequency. Returns `(frequency, amplitude, phase)`, or `None` when
/// the peak does not stand out of the spectrum (peak < 3 × median).
pub fn dominant_frequency<T: Real>(curve: &Curve<T>) -> Option<(T, T, T)> {
    let n = curve.len();
    if n < 4 {
        return None;
    }
    let span = curve.x[n - 1] - curve.x[0];
    let mean_y = curve.y.iter().copied().sum::<T>() / T::of_usize(n);
    let spread = curve.y.iter().fold(T::zero(), |m, &y| m.max((y - mean_y).abs()));
    if !(spread > T::epsilon() * T::of(64.0) * (mean_y.abs() + T::min_positive_value())) {
        return None;
    }
    let fmax = T::of_usize(n - 1) / (T::of(2.0) * span);
    let df = T::one() / (T::of(16.0) * span);
    let fmin = T::of(0.5) / span;
    let m = ((fmax - fmin) / df).floor().to_usize().unwrap_or(0) + 1;
    if m < 3 {
        return None;
    }
    let spectrum = |f: T| -> Complex<T> {
        curve.x.iter().zip(&curve.y).fold(Complex::new(T::zero(), T::zero()), |acc, (&t, &y)| {
            acc + Complex::from_polar(y - mean_y, -T::TAU() * f * (t - curve.x[0]))
        })
    };
    let freqs: Vec<T> = (0..m).map(|k| fmin + df * T::of_usize(k)).collect();
    let mags: Vec<T> = freqs.iter().map(|&f| spectrum(f).norm()).collect();
    let best = (0..m).fold(0, |b, k| if mags[k] > mags[b] { k } else { b });
    let mut sorted = mags.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let median = sorted[m / 2];
    if !(mags[best] > T::of(3.0) * median) {
        return None;
    }
    let mut f = freqs[best];
    if best > 0 && best + 1 < m {
        let (a, b, c) = (mags[best - 1], mags[best], mags[best + 1]);
        let den = a - T::of(2.0) * b + c;
        if den < T::zero() {
            f = f + T::of(0.5) * (a - c) / den * df;
        }
    }
    let s = spectrum(f);
    // phase referred to t = 0 rather than the first sample
    let phase = s.arg() + T::TAU() * f * curve.x[0];
    Some((f, T::of(2.0) * s.norm() / T::of_usize(n), phase))
}

fn quartiles<T: Real>(y: &[T]) -> (T, T) {
    let mut s = y.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let q = |p: f64| {
        let pos = p * (s.len() - 1) as f64;
        let i = pos.floor() as usize;
        let fr = T::of(pos - i as f64);
        if i + 1 < s.len() { s[i] + (s[i + 1] - s[i]) * fr } else { s[i] }
    };
    (q(0.25), q(0.75))
}

fn automatic_guess<T: Real>(curve: &Curve<T>) -> Option<DampedSineGuess<T>> {
    let (f, _, phase) = dominant_frequency(curve)?;
    let (q1, q3) = quartiles(&curve.y);
    let span = curve.x[curve.len() - 1] - curve.x[0];
    Some(DampedSineGuess {
        offset: (q1 + q3) / T::of(2.0),
        amplitude: ((q3 - q1) / T::SQRT_2()).max(T::min_positive_value()),
        decay_rate: T::one() / span,
        frequency: f,
        phase,
    })
}

fn not_converged<T: Real>(model: &str, note: String) -> FitResult<T> {
    FitResult {
        model: model.into(),
        params: Vec::new(),
        chi2: T::nan(),
        reduced_chi2: T::nan(),
        converged: false,
        iterations: 0,
        note: Some(note),
    }
}

/// Weighted fit of `C + A e^{−γt} cos(2π f t + φ)`.
///
/// Parameters are reported as `offset`, `amplitude` (> 0), `decay_rate`,
/// `frequency` (> 0), `phase` (in [0, 2π)) and the derived `decay_time`.
/// Uncertainties come from the curve's standard errors when present, and
/// from the residual scatter otherwise.
pub fn fit_damped_sine<T: Real>(curve: &Curve<T>, guess: Option<&DampedSineGuess<T>>) -> Result<FitResult<T>> {
    const NAME: &str = "damped_sine";
    let n = curve.len();
    if n < 8 {
        return Err(Error::Fit(format!("damped-sine fit needs at least 8 points, got {n}")));
    }
    let g = match guess.cloned().or_else(|| automatic_guess(curve)) {
        Some(g) => g,
        None => return Ok(not_converged(NAME, "no spectral peak above the noise".into())),
    };
    let p0 = [g.offset, g.amplitude, g.decay_rate, g.frequency, g.phase];
    let w = curve.weights();
    let out = levenberg_marquardt(&DampedSine, &curve.x, &curve.y, &w, &p0, &LmOptions::default())?;
    let mut p = out.params.clone();
    if p[1] < T::zero() {
        p[1] = -p[1];
        p[4] = p[4] + T::PI();
    }
    if p[3] < T::zero() {
        p[3] = -p[3];
        p[4] = -p[4];
    }
    p[4] = p[4] - T::TAU() * (p[4] / T::TAU()).floor();
    if p[4] >= T::TAU() {
        p[4] = T::zero();
    }
    let dof = T::of_usize(n - 5);
    let reduced = out.chi2 / dof;
    let scale = if curve.has_errors() { T::one() } else { reduced };
    let sig: Vec<T> = (0..5)
        .map(|k| out.covariance.as_ref().map_or(T::nan(), |c| (c.at(k, k) * scale).max(T::zero()).sqrt()))
        .collect();
    let span = curve.x[n - 1] - curve.x[0];
    let mut note = None;
    let mut converged = out.converged;
    if !(p[3] * span >= T::one()) {
        converged = false;
        note = Some("fitted frequency spans less than one period".to_string());
    } else if !converged {
        note = Some("iteration limit reached".to_string());
    }
    let names = ["offset", "amplitude", "decay_rate", "frequency", "phase"];
    let mut params: Vec<FitParam<T>> = names
        .iter()
        .zip(p.iter().zip(&sig))
        .map(|(name, (&value, &sigma))| FitParam { name: (*name).into(), value, sigma })
        .collect();
    params.push(FitParam { name: "decay_time".into(), value: T::one() / p[2], sigma: sig[2] / (p[2] * p[2]) });
    Ok(FitResult {
        model: NAME.into(),
        params,
        chi2: out.chi2,
        reduced_chi2: reduced,
        converged,
        iterations: out.iterations,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(p: [f64; 5]) -> Curve<f64> {
        let x: Vec<f64> = (0..101).map(|i| i as f64 * 2e-6).collect();
        let y = x.iter().map(|&t| damped_sine(t, &p)).collect();
        Curve::from_xy(x, y).unwrap()
    }

    #[test]
    fn recovers_noiseless_parameters() {
        let truth = [0.15, 0.2, 1e4, 31.6e3, 0.0];
        let fit = fit_damped_sine(&synthetic(truth), None).unwrap();
        assert!(fit.converged, "{:?}", fit.note);
        for (name, t) in [("offset", 0.15), ("amplitude", 0.2), ("decay_rate", 1e4), ("frequency", 31.6e3)] {
            assert!((fit.value(name) / t - 1.0).abs() < 1e-6, "{name}: {}", fit.value(name));
        }
        assert!((fit.value("decay_time") / 100e-6 - 1.0).abs() < 1e-6);
        let phi = fit.value("phase");
        assert!(phi.min(std::f64::consts::TAU - phi) < 1e-6);
    }

    #[test]
    fn canonicalizes_sign_and_phase() {
        let a = fit_damped_sine(&synthetic([0.3, 0.1, 2e3, 20e3, 1.0]), None).unwrap();
        let b = fit_damped_sine(&synthetic([0.3, -0.1, 2e3, 20e3, 1.0 - std::f64::consts::PI]), None).unwrap();
        let c = fit_damped_sine(&synthetic([0.3, 0.1, 2e3, 20e3, 1.0 + std::f64::consts::TAU]), None).unwrap();
        for f in [&a, &b, &c] {
            assert!(f.value("amplitude") > 0.0);
            assert!((f.value("phase") - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn flat_curve_has_no_peak() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let fit = fit_damped_sine(&Curve::from_xy(x, vec![0.4; 20]).unwrap(), None).unwrap();
        assert!(!fit.converged);
    }

    #[test]
    fn too_few_points() {
        let x: Vec<f64> = (0..5).map(|i| i as f64).collect();
        assert!(fit_damped_sine(&Curve::from_xy(x, vec![0.0; 5]).unwrap(), None).is_err());
    }
}
