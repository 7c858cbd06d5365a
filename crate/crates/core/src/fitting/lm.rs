use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Parametric model `y = f(x; p)`.
pub trait Model<T: Real> {
    fn n_params(&self) -> usize;

    fn eval(&self, x: T, p: &[T]) -> T;

    /// `∂f/∂p_k` at `x`; central differences unless overridden.
    fn gradient(&self, x: T, p: &[T], out: &mut [T]) {
        let mut q = p.to_vec();
        for k in 0..p.len() {
            let h = T::epsilon().cbrt() * (p[k].abs() + T::one());
            q[k] = p[k] + h;
            let up = self.eval(x, &q);
            q[k] = p[k] - h;
            let down = self.eval(x, &q);
            q[k] = p[k];
            out[k] = (up - down) / (h + h);
        }
    }
}

#[derive(Clone, Debug)]
pub struct LmOptions<T> {
    pub max_iterations: usize,
    /// Stop once every step satisfies `|δp_k| ≤ xtol (|p_k| + xtol)`.
    pub xtol: T,
}

impl<T: Real> Default for LmOptions<T> {
    fn default() -> Self {
        Self { max_iterations: 500, xtol: T::of(1e-8) }
    }
}

#[derive(Clone, Debug)]
pub struct LmOutcome<T> {
    pub params: Vec<T>,
    /// `(Jᵀ W J)⁻¹` at the solution.
    pub covariance: Option<Matrix<T>>,
    pub chi2: T,
    pub iterations: usize,
    pub converged: bool,
}

fn chi2<T: Real, M: Model<T>>(model: &M, x: &[T], y: &[T], w: &[T], p: &[T]) -> T {
    x.iter()
        .zip(y)
        .zip(w)
        .map(|((&xi, &yi), &wi)| {
            let r = yi - model.eval(xi, p);
            wi * r * r
        })
        .sum()
}

/// Weighted nonlinear least squares by the Levenberg–Marquardt method with
/// Marquardt's diagonal scaling.
pub fn levenberg_marquardt<T: Real, M: Model<T>>(
    model: &M,
    x: &[T],
    y: &[T],
    w: &[T],
    p0: &[T],
    opts: &LmOptions<T>,
) -> Result<LmOutcome<T>> {
    let np = model.n_params();
    if p0.len() != np {
        return Err(Error::Fit(format!("{} initial values for {np} parameters", p0.len())));
    }
    if x.len() != y.len() || x.len() != w.len() {
        return Err(Error::ShapeMismatch("x, y and weights differ in length".into()));
    }
    if x.len() < np {
        return Err(Error::Fit(format!("{} points cannot determine {np} parameters", x.len())));
    }
    let mut p = p0.to_vec();
    let mut cost = chi2(model, x, y, w, &p);
    if !cost.is_finite() {
        return Err(Error::Fit("model is not finite at the initial guess".into()));
    }
    let mut lambda = T::of(1e-3);
    let mut grad = vec![T::zero(); np];
    let normal = |p: &[T], grad: &mut [T]| -> (Matrix<T>, Vec<T>) {
        let mut a = Matrix::zeros(np);
        let mut g = vec![T::zero(); np];
        for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
            model.gradient(xi, p, grad);
            let r = yi - model.eval(xi, p);
            for i in 0..np {
                g[i] = g[i] + wi * grad[i] * r;
                for j in 0..=i {
                    *a.at_mut(i, j) = a.at(i, j) + wi * grad[i] * grad[j];
                }
            }
        }
        for i in 0..np {
            for j in 0..i {
                *a.at_mut(j, i) = a.at(i, j);
            }
        }
        (a, g)
    };

    let mut converged = false;
    let mut iterations = 0;
    'outer: while iterations < opts.max_iterations {
        iterations += 1;
        let (a, g) = normal(&p, &mut grad);
        let dmax = (0..np).fold(T::zero(), |m, i| m.max(a.at(i, i)));
        loop {
            let mut damped = a.clone();
            for i in 0..np {
                let d = a.at(i, i).max(dmax * T::of(1e-12)).max(T::min_positive_value());
                *damped.at_mut(i, i) = a.at(i, i) + lambda * d;
            }
            let step = match damped.solve(&g) {
                Ok(s) => s,
                Err(_) => {
                    lambda = lambda * T::of(10.0);
                    if lambda > T::of(1e16) {
                        break 'outer;
                    }
                    continue;
                }
            };
            let trial: Vec<T> = p.iter().zip(&step).map(|(&a, &b)| a + b).collect();
            let new_cost = chi2(model, x, y, w, &trial);
            if new_cost.is_finite() && new_cost <= cost {
                let small = p
                    .iter()
                    .zip(&step)
                    .all(|(&pk, &dk)| dk.abs() <= opts.xtol * (pk.abs() + opts.xtol));
                p = trial;
                cost = new_cost;
                lambda = (lambda / T::of(10.0)).max(T::of(1e-12));
                if small || cost == T::zero() {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            lambda = lambda * T::of(10.0);
            if lambda > T::of(1e16) {
                // no downhill step left at working precision
                converged = true;
                break 'outer;
            }
        }
    }
    let (a, _) = normal(&p, &mut grad);
    let covariance = a.inverse().ok();
    Ok(LmOutcome { params: p, covariance, chi2: cost, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Line;

    impl Model<f64> for Line {
        fn n_params(&self) -> usize {
            2
        }
        fn eval(&self, x: f64, p: &[f64]) -> f64 {
            p[0] + p[1] * x
        }
    }

    #[test]
    fn fits_a_line_with_numeric_gradient() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| 1.5 - 0.25 * v).collect();
        let w = vec![1.0; 10];
        let out = levenberg_marquardt(&Line, &x, &y, &w, &[0.0, 0.0], &LmOptions::default()).unwrap();
        assert!(out.converged);
        assert!((out.params[0] - 1.5).abs() < 1e-9);
        assert!((out.params[1] + 0.25).abs() < 1e-9);
    }

    #[test]
    fn too_few_points_is_an_error() {
        assert!(levenberg_marquardt(&Line, &[1.0], &[1.0], &[1.0], &[0.0, 0.0], &LmOptions::default()).is_err());
    }
}
