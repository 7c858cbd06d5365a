//! Fourier optics for the trapping beams.
//!
//! The SLM plane (the "pupil") is mapped onto the focal plane of an ideal
//! lens by a scaled Fourier transform; planes around focus are reached by
//! applying the angular-spectrum transfer function, which for a lens is a
//! phase factor on the pupil field itself.

mod bob;
mod field;
mod io;
mod mask;
mod propagate;
mod spots;

pub use bob::{bob_center, bob_depth_at_ratio, bob_volume, optimize_bob_ratio, BobRatioOptimum, BobVolumeSpec};
pub use field::{fft2, pupil_field, ComplexField};
pub use io::{read_potential, read_volume, write_potential, write_slice_csv, write_volume, SliceAxis};
pub use mask::{compose_masks, make_bob_mask, make_tweezer_mask, ArrayGeometry, BobMaskParams, PhaseMask};
pub use propagate::{angular_spectrum_step, propagate_to_focus, FocalWindow, IntensityVolume};
pub use spots::{find_spots, Spot};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sampling and optical parameters of the SLM plane and focusing lens.
#[derive(Clone, Debug, PartialEq)]
pub struct PupilSpec<T> {
    /// Samples per axis (power of two, ≥ 64).
    pub grid_size: usize,
    /// Side length of the sampled SLM plane, meters.
    pub physical_extent: T,
    pub wavelength: T,
    pub focal_length: T,
    /// 1/e² radius of the Gaussian illumination on the SLM, meters.
    pub input_waist: T,
    /// Lumped SLM diffraction efficiency and pixelation loss.
    pub efficiency: T,
}

pub const WAVELENGTH: f64 = 820e-9;
pub const FOCAL_LENGTH: f64 = 16.3e-3;
pub const SLM_EXTENT: f64 = 12.8e-3;
pub const TWEEZER_WAIST: f64 = 1.2e-6;
pub const BOB_OUTER_RADIUS: f64 = 5.6e-3;
pub const BOB_INPUT_WAIST: f64 = 11.2e-3;

impl<T: Real> PupilSpec<T> {
    /// SLM1 settings: 1024² pixels of 12.5 µm, illumination sized for a
    /// 1.2 µm focal waist.
    pub fn tweezer_default() -> Self {
        let waist_in = FOCAL_LENGTH * WAVELENGTH / (std::f64::consts::PI * TWEEZER_WAIST);
        Self {
            grid_size: 1024,
            physical_extent: T::of(SLM_EXTENT),
            wavelength: T::of(WAVELENGTH),
            focal_length: T::of(FOCAL_LENGTH),
            input_waist: T::of(waist_in),
            efficiency: T::one(),
        }
    }

    /// SLM2 settings: the same panel sampled at 256² (50 µm cells), with a
    /// wide illumination that nearly fills the bottle-beam pupil.
    pub fn bob_default() -> Self {
        Self {
            grid_size: 256,
            physical_extent: T::of(SLM_EXTENT),
            wavelength: T::of(WAVELENGTH),
            focal_length: T::of(FOCAL_LENGTH),
            input_waist: T::of(BOB_INPUT_WAIST),
            efficiency: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 64 || !self.grid_size.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "grid_size {} must be a power of two ≥ 64",
                self.grid_size
            )));
        }
        for (name, v) in [
            ("physical_extent", self.physical_extent),
            ("wavelength", self.wavelength),
            ("focal_length", self.focal_length),
            ("input_waist", self.input_waist),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if !(self.efficiency > T::zero() && self.efficiency <= T::one()) {
            return Err(Error::InvalidParameter("efficiency must lie in (0, 1]".into()));
        }
        if self.physical_extent >= self.focal_length * T::of(2.0) {
            return Err(Error::Sampling("pupil wider than the lens can map".into()));
        }
        Ok(())
    }

    /// SLM pixel pitch.
    pub fn pixel(&self) -> T {
        self.physical_extent / T::of_usize(self.grid_size)
    }

    /// Focal-plane sample spacing of an unpadded FFT of the pupil.
    pub fn focal_sample(&self) -> T {
        self.wavelength * self.focal_length / self.physical_extent
    }

    /// Alias-free focal field of view `λ f / pixel`.
    pub fn field_of_view(&self) -> T {
        self.wavelength * self.focal_length / self.pixel()
    }

    /// Pupil coordinate of sample `i` (the optical axis sits at `grid_size/2`).
    #[inline]
    pub fn coord(&self, i: usize) -> T {
        (T::of_usize(i) - T::of_usize(self.grid_size / 2)) * self.pixel()
    }

    /// Largest phase gradient (rad/m) the pupil sampling represents without aliasing.
    pub fn max_phase_gradient(&self) -> T {
        T::PI() / self.pixel()
    }

    /// Phase gradient (rad/m) that steers light to focal offset `x`.
    pub fn gradient_for_offset(&self, x: T) -> T {
        T::of(2.0) * T::PI() * x / (self.wavelength * self.focal_length)
    }

    /// Focal offset produced by a pupil phase gradient.
    pub fn offset_for_gradient(&self, g: T) -> T {
        g * self.wavelength * self.focal_length / (T::of(2.0) * T::PI())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_pupils_are_valid() {
        PupilSpec::<f64>::tweezer_default().validate().unwrap();
        PupilSpec::<f64>::bob_default().validate().unwrap();
        PupilSpec::<f32>::bob_default().validate().unwrap();
    }

    #[test]
    fn default_field_of_view_covers_array() {
        let p = PupilSpec::<f64>::tweezer_default();
        assert!(p.field_of_view() >= 120e-6);
        let b = PupilSpec::<f64>::bob_default();
        assert!(b.field_of_view() >= 120e-6);
    }

    #[test]
    fn rejects_bad_grid() {
        let mut p = PupilSpec::<f64>::tweezer_default();
        p.grid_size = 100;
        assert!(p.validate().is_err());
        p.grid_size = 32;
        assert!(p.validate().is_err());
    }

    #[test]
    fn gradient_offset_round_trip() {
        let p = PupilSpec::<f64>::bob_default();
        let g = p.gradient_for_offset(7.5e-6);
        assert!((p.offset_for_gradient(g) - 7.5e-6).abs() < 1e-18);
    }
}
