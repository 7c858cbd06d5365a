use num_complex::Complex;
use rustfft::FftPlanner;

use super::{PhaseMask, PupilSpec};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Square complex field sampled on an `n × n` grid centred at index `n/2`.
/// Amplitudes are in √(W/m²), so `Σ|E|² · spacing²` is the plane power.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField<T> {
    pub n: usize,
    pub spacing: T,
    /// Plane position relative to focus, meters.
    pub plane_z: T,
    /// Row-major samples, `y` major.
    pub amplitude: Vec<Complex<T>>,
}

impl<T: Real> ComplexField<T> {
    pub fn new(n: usize, spacing: T, plane_z: T, amplitude: Vec<Complex<T>>) -> Result<Self> {
        if amplitude.len() != n * n {
            return Err(Error::ShapeMismatch(format!("{} samples for a {n}² field", amplitude.len())));
        }
        if !(spacing > T::zero()) {
            return Err(Error::InvalidParameter("field spacing must be positive".into()));
        }
        if amplitude.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidParameter("field contains non-finite samples".into()));
        }
        Ok(Self { n, spacing, plane_z, amplitude })
    }

    pub fn from_fn(n: usize, spacing: T, plane_z: T, f: impl Fn(T, T) -> Complex<T>) -> Result<Self> {
        let c = |i: usize| (T::of_usize(i) - T::of_usize(n / 2)) * spacing;
        let amplitude = (0..n * n).map(|k| f(c(k % n), c(k / n))).collect();
        Self::new(n, spacing, plane_z, amplitude)
    }

    #[inline]
    pub fn coord(&self, i: usize) -> T {
        (T::of_usize(i) - T::of_usize(self.n / 2)) * self.spacing
    }

    pub fn intensity(&self) -> Vec<T> {
        self.amplitude.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Plane-integrated power, watts.
    pub fn power(&self) -> T {
        self.amplitude.iter().map(|a| a.norm_sqr()).sum::<T>() * self.spacing * self.spacing
    }

    /// Intensity-weighted second moment along x, `⟨x²⟩ − ⟨x⟩²`.
    pub fn second_moment_x(&self) -> T {
        let mut w = T::zero();
        let mut m1 = T::zero();
        let mut m2 = T::zero();
        for iy in 0..self.n {
            for ix in 0..self.n {
                let i = self.amplitude[iy * self.n + ix].norm_sqr();
                let x = self.coord(ix);
                w = w + i;
                m1 = m1 + i * x;
                m2 = m2 + i * x * x;
            }
        }
        let mean = m1 / w;
        m2 / w - mean * mean
    }
}

/// In-place 2D FFT of an `n × n` row-major array. The inverse is unnormalised.
pub fn fft2<T: Real>(data: &mut [Complex<T>], n: usize, inverse: bool) {
    let mut planner = FftPlanner::<T>::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    fft.process(data);
    transpose(data, n);
    fft.process(data);
    transpose(data, n);
}

fn transpose<T: Copy>(data: &mut [T], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Gaussian illumination of the SLM carrying `mask`, scaled so that the power
/// inside `aperture` (the whole plane when `None`) equals `power × efficiency`.
pub fn pupil_field<T: Real>(
    pupil: &PupilSpec<T>,
    mask: &PhaseMask<T>,
    power: T,
    aperture: Option<T>,
) -> Result<ComplexField<T>> {
    pupil.validate()?;
    if mask.n != pupil.grid_size {
        return Err(Error::ShapeMismatch(format!("mask {} vs pupil {}", mask.n, pupil.grid_size)));
    }
    if !(power >= T::zero()) || !power.is_finite() {
        return Err(Error::InvalidParameter("beam power must be non-negative".into()));
    }
    let n = pupil.grid_size;
    let w2 = pupil.input_waist * pupil.input_waist;
    let mut amplitude = Vec::with_capacity(n * n);
    let mut inside = T::zero();
    for iv in 0..n {
        let v = pupil.coord(iv);
        for iu in 0..n {
            let u = pupil.coord(iu);
            let r2 = u * u + v * v;
            let a = (-r2 / w2).exp();
            if aperture.map_or(true, |r| r2 <= r * r) {
                inside = inside + a * a;
            }
            amplitude.push(Complex::from_polar(a, mask.at(iu, iv)));
        }
    }
    let px = pupil.pixel();
    let scale = (power * pupil.efficiency / (inside * px * px)).sqrt();
    for a in amplitude.iter_mut() {
        *a = *a * scale;
    }
    ComplexField::new(n, px, -pupil.focal_length, amplitude)
}
