//! Least-squares estimators: damped sines, exponential decays, weighted
//! straight lines and Monte-Carlo temperature fits.

mod curve;
mod exponential;
mod lm;
mod regression;
mod sine;
mod temperature;

pub use curve::Curve;
pub use exponential::{background_sensitivity, fit_exponential, Background, BackgroundSensitivity};
pub use lm::{levenberg_marquardt, LmOptions, LmOutcome, Model};
pub use regression::{linear_regression, LineFit};
pub use sine::{damped_sine, dominant_frequency, fit_damped_sine, DampedSineGuess};
pub use temperature::{fit_temperature, temperature_chi2_profile, TemperatureGrid};

use std::fmt::Write as _;

use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct FitParam<T> {
    pub name: String,
    pub value: T,
    /// 1σ uncertainty.
    pub sigma: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult<T> {
    /// Name of the fitted model.
    pub model: String,
    pub params: Vec<FitParam<T>>,
    pub chi2: T,
    pub reduced_chi2: T,
    pub converged: bool,
    pub iterations: usize,
    /// Why the fit did not converge, or a caveat such as a grid-edge minimum.
    pub note: Option<String>,
}

impl<T: Real> FitResult<T> {
    pub fn param(&self, name: &str) -> Option<&FitParam<T>> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Value of a named parameter; panics on an unknown name.
    pub fn value(&self, name: &str) -> T {
        self.param(name).unwrap_or_else(|| panic!("no fit parameter '{name}'")).value
    }

    pub fn sigma(&self, name: &str) -> T {
        self.param(name).unwrap_or_else(|| panic!("no fit parameter '{name}'")).sigma
    }

    /// `param,value,sigma` rows, header included.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("param,value,sigma\n");
        for p in &self.params {
            let _ = writeln!(s, "{},{:e},{:e}", p.name, p.value.as_f64(), p.sigma.as_f64());
        }
        s
    }

    /// Brace-delimited block for run reports.
    pub fn to_block(&self, label: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "fit {label} {{");
        let _ = writeln!(s, "  model = \"{}\"", self.model);
        let _ = writeln!(s, "  converged = {}", self.converged);
        let _ = writeln!(s, "  iterations = {}", self.iterations);
        let _ = writeln!(s, "  chi2 = {:.6e}", self.chi2.as_f64());
        let _ = writeln!(s, "  reduced_chi2 = {:.6e}", self.reduced_chi2.as_f64());
        if let Some(n) = &self.note {
            let _ = writeln!(s, "  note = \"{n}\"");
        }
        for p in &self.params {
            let _ = writeln!(s, "  {} = {{ value = {:.9e}, sigma = {:.3e} }}", p.name, p.value.as_f64(), p.sigma.as_f64());
        }
        s.push_str("}\n");
        s
    }
}
