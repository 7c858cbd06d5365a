use crate::error::{Error, Result};
use crate::scalar::Real;

/// Straight-line fit `y = intercept + slope · x`.
#[derive(Clone, Debug, PartialEq)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    pub slope_sigma: T,
    pub intercept_sigma: T,
    pub chi2: T,
}

/// Weighted linear regression. With `sigma` the uncertainties are absolute;
/// without, unit weights are used and the uncertainties scaled by the
/// residual variance.
pub fn linear_regression<T: Real>(x: &[T], y: &[T], sigma: Option<&[T]>) -> Result<LineFit<T>> {
    let n = x.len();
    if y.len() != n || sigma.is_some_and(|s| s.len() != n) {
        return Err(Error::ShapeMismatch("regression inputs differ in length".into()));
    }
    if n < 2 {
        return Err(Error::Fit("a line needs at least two points".into()));
    }
    let w: Vec<T> = match sigma {
        Some(s) => {
            if s.iter().any(|&v| !(v > T::zero())) {
                return Err(Error::InvalidParameter("regression sigmas must be positive".into()));
            }
            s.iter().map(|&v| T::one() / (v * v)).collect()
        }
        None => vec![T::one(); n],
    };
    let sw: T = w.iter().copied().sum();
    let sx: T = (0..n).map(|i| w[i] * x[i]).sum();
    let sy: T = (0..n).map(|i| w[i] * y[i]).sum();
    let xm = sx / sw;
    let ym = sy / sw;
    let sxx: T = (0..n).map(|i| w[i] * (x[i] - xm) * (x[i] - xm)).sum();
    let sxy: T = (0..n).map(|i| w[i] * (x[i] - xm) * (y[i] - ym)).sum();
    if !(sxx > T::zero()) {
        return Err(Error::Fit("abscissa values are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let chi2: T = (0..n).map(|i| w[i] * (y[i] - intercept - slope * x[i]).powi(2)).sum();
    let scale = if sigma.is_some() || n <= 2 { T::one() } else { chi2 / T::of_usize(n - 2) };
    let slope_var = scale / sxx;
    let intercept_var = scale * (T::one() / sw + xm * xm / sxx);
    Ok(LineFit { slope, intercept, slope_sigma: slope_var.sqrt(), intercept_sigma: intercept_var.sqrt(), chi2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0f64, 1.0, 2.0, 4.0];
        let y = [1.0, 3.0, 5.0, 9.0];
        let f = linear_regression(&x, &y, Some(&[0.1, 0.2, 0.1, 0.3])).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!(f.chi2 < 1e-20);
    }

    #[test]
    fn weights_favour_precise_points() {
        let x = [0.0f64, 1.0, 2.0];
        let y = [0.0, 1.0, 3.0];
        let even = linear_regression(&x, &y, None).unwrap();
        let skew = linear_regression(&x, &y, Some(&[0.01, 0.01, 10.0])).unwrap();
        assert!((skew.slope - 1.0).abs() < 1e-3);
        assert!((even.slope - 1.5).abs() < 1e-12);
    }
}
