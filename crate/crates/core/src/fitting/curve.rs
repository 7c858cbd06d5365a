use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sampled curve with optional per-point standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve<T> {
    /// Strictly increasing.
    pub x: Vec<T>,
    pub y: Vec<T>,
    /// Standard error of each `y`; zeros when unknown.
    pub stderr: Vec<T>,
    /// Trials behind each `y` (0 for non-Monte-Carlo data).
    pub n_samples: Vec<usize>,
}

impl<T: Real> Curve<T> {
    pub fn new(x: Vec<T>, y: Vec<T>, stderr: Vec<T>, n_samples: Vec<usize>) -> Result<Self> {
        let n = x.len();
        if y.len() != n || stderr.len() != n || n_samples.len() != n {
            return Err(Error::ShapeMismatch("curve columns differ in length".into()));
        }
        if x.iter().chain(&y).chain(&stderr).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("curve contains non-finite values".into()));
        }
        if stderr.iter().any(|&s| s < T::zero()) {
            return Err(Error::InvalidParameter("negative standard error".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("abscissa must be strictly increasing".into()));
        }
        Ok(Self { x, y, stderr, n_samples })
    }

    /// Curve without error information.
    pub fn from_xy(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        let n = x.len();
        Self::new(x, y, vec![T::zero(); n], vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Checks that the ordinate is a probability (allowing 5% overshoot).
    pub fn check_probability(&self) -> Result<()> {
        match self.y.iter().find(|&&v| v < T::zero() || v > T::of(1.05)) {
            Some(v) => Err(Error::InvalidParameter(format!("ordinate {} outside [0, 1.05]", v.as_f64()))),
            None => Ok(()),
        }
    }

    /// Points with `lo ≤ x ≤ hi`.
    pub fn window(&self, lo: T, hi: T) -> Self {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.x[i] >= lo && self.x[i] <= hi).collect();
        Self {
            x: keep.iter().map(|&i| self.x[i]).collect(),
            y: keep.iter().map(|&i| self.y[i]).collect(),
            stderr: keep.iter().map(|&i| self.stderr[i]).collect(),
            n_samples: keep.iter().map(|&i| self.n_samples[i]).collect(),
        }
    }

    /// Least-squares weights `1/σ²`. Zero errors are floored at `1/n` for
    /// Monte-Carlo points; with no error information every weight is 1.
    pub fn weights(&self) -> Vec<T> {
        let informative = (0..self.len()).any(|i| self.stderr[i] > T::zero() || self.n_samples[i] > 0);
        if !informative {
            return vec![T::one(); self.len()];
        }
        (0..self.len())
            .map(|i| {
                let floor = if self.n_samples[i] > 0 { T::one() / T::of_usize(self.n_samples[i]) } else { T::zero() };
                let s = self.stderr[i].max(floor);
                if s > T::zero() { T::one() / (s * s) } else { T::one() }
            })
            .collect()
    }

    pub fn has_errors(&self) -> bool {
        self.stderr.iter().any(|&s| s > T::zero()) || self.n_samples.iter().any(|&n| n > 0)
    }

    pub const CSV_HEADER: &'static str = "abscissa,mean,stderr,n_samples";

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(48 * (self.len() + 1));
        s.push_str(Self::CSV_HEADER);
        s.push('\n');
        for i in 0..self.len() {
            let _ = writeln!(
                s,
                "{:e},{:e},{:e},{}",
                self.x[i].as_f64(),
                self.y[i].as_f64(),
                self.stderr[i].as_f64(),
                self.n_samples[i]
            );
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == Self::CSV_HEADER => {}
            _ => return Err(Error::Parse(format!("expected header '{}'", Self::CSV_HEADER))),
        }
        let (mut x, mut y, mut e, mut n) = (vec![], vec![], vec![], vec![]);
        for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 4 {
                return Err(Error::Parse(format!("line {}: expected 4 fields", k + 2)));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|err| Error::Parse(format!("line {}: {err}", k + 2)));
            x.push(T::of(num(f[0])?));
            y.push(T::of(num(f[1])?));
            e.push(T::of(num(f[2])?));
            n.push(f[3].parse().map_err(|err| Error::Parse(format!("line {}: {err}", k + 2)))?);
        }
        Self::new(x, y, e, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted_abscissa() {
        assert!(Curve::from_xy(vec![0.0, 1.0, 1.0], vec![0.0; 3]).is_err());
        assert!(Curve::from_xy(vec![0.0, 1.0], vec![0.0]).is_err());
    }

    #[test]
    fn probability_range() {
        let c = Curve::from_xy(vec![0.0, 1.0], vec![0.5, 1.04]).unwrap();
        assert!(c.check_probability().is_ok());
        let c = Curve::from_xy(vec![0.0, 1.0], vec![-0.1, 0.5]).unwrap();
        assert!(c.check_probability().is_err());
    }

    #[test]
    fn weights_floor_zero_errors() {
        let c = Curve::<f64>::new(vec![0.0, 1.0], vec![1.0, 0.5], vec![0.0, 0.05], vec![100, 100]).unwrap();
        let w = c.weights();
        assert_eq!(w[0], 1e4);
        assert!((w[1] - 400.0).abs() < 1e-9);
    }
}
