use num_complex::Complex;
use rayon::prelude::*;

use super::field::fft2;
use super::{ComplexField, PupilSpec};
use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::scalar::Real;

/// Exact scalar free-space propagation by `dz` with the angular-spectrum
/// transfer function `exp(i k_z dz)`. Evanescent components are dropped.
pub fn angular_spectrum_step<T: Real>(field: &ComplexField<T>, dz: T, wavelength: T) -> Result<ComplexField<T>> {
    if !dz.is_finite() {
        return Err(Error::InvalidParameter("propagation distance must be finite".into()));
    }
    if !(wavelength > T::zero()) {
        return Err(Error::InvalidParameter("wavelength must be positive".into()));
    }
    let n = field.n;
    if dz == T::zero() {
        return Ok(field.clone());
    }
    let mut data = field.amplitude.clone();
    fft2(&mut data, n, false);
    let k = T::TAU() / wavelength;
    let df = T::one() / (T::of_usize(n) * field.spacing);
    let freq = |i: usize| {
        let s = if i < n.div_ceil(2) { T::of_usize(i) } else { T::of_usize(i) - T::of_usize(n) };
        T::TAU() * s * df
    };
    let norm = T::one() / T::of_usize(n * n);
    for iy in 0..n {
        let ky = freq(iy);
        for ix in 0..n {
            let kx = freq(ix);
            let kz2 = k * k - kx * kx - ky * ky;
            let slot = &mut data[iy * n + ix];
            *slot = if kz2 > T::zero() {
                *slot * Complex::from_polar(norm, kz2.sqrt() * dz)
            } else {
                Complex::new(T::zero(), T::zero())
            };
        }
    }
    fft2(&mut data, n, true);
    ComplexField::new(n, field.spacing, field.plane_z + dz, data)
}

/// Transverse sampling window of the focal region.
#[derive(Clone, Debug, PartialEq)]
pub struct FocalWindow<T> {
    /// Window centre (x, y), meters.
    pub center: [T; 2],
    pub spacing: T,
    /// Samples along (x, y).
    pub shape: [usize; 2],
}

impl<T: Real> FocalWindow<T> {
    pub fn square(center: [T; 2], spacing: T, n: usize) -> Self {
        Self { center, spacing, shape: [n, n] }
    }

    fn coords(&self, axis: usize) -> Vec<T> {
        let n = self.shape[axis];
        let half = T::of_usize(n - 1) / T::of(2.0);
        (0..n)
            .map(|i| self.center[axis] + (T::of_usize(i) - half) * self.spacing)
            .collect()
    }
}

/// Intensity samples around focus.
#[derive(Clone, Debug, PartialEq)]
pub struct IntensityVolume<T> {
    /// W/m² samples; `z` is the propagation axis.
    pub grid: Grid3<T>,
    pub wavelength: T,
    /// Power carried by the full beam, watts.
    pub total_power: T,
}

impl<T: Real> IntensityVolume<T> {
    /// Power crossing the sampled window of plane `iz`.
    pub fn plane_power(&self, iz: usize) -> T {
        self.grid.plane_integral(iz)
    }

    /// Same beam at a different power (intensity is linear in power).
    pub fn scaled_to_power(&self, power: T) -> Self {
        let s = power / self.total_power;
        Self { grid: self.grid.map(|v| v * s), wavelength: self.wavelength, total_power: power }
    }

    /// Intensity along the beam axis through the sample nearest `(x, y)`.
    pub fn axial_profile(&self, x: T, y: T) -> Option<Vec<T>> {
        let idx = self.grid.nearest(&[x, y, self.grid.origin[2]])?;
        Some((0..self.grid.shape[2]).map(|iz| self.grid.get(idx[0], idx[1], iz)).collect())
    }
}

/// Focal-region intensity of a pupil field.
///
/// The focal field is the scaled Fourier transform `E_f(x) = (1/λf) ∫ E_p(u)
/// exp(−2πi x·u/λf) d²u`, evaluated directly on the requested window. Each
/// plane `z` multiplies the pupil (the focal angular spectrum) by the
/// transfer function `exp(i (k_z − k) z)` before transforming. With pupil
/// amplitudes in √(W/m²), `|E_f|²` is the focal intensity in W/m².
pub fn propagate_to_focus<T: Real>(
    field: &ComplexField<T>,
    pupil: &PupilSpec<T>,
    window: &FocalWindow<T>,
    z_planes: &[T],
) -> Result<IntensityVolume<T>> {
    pupil.validate()?;
    if field.n != pupil.grid_size {
        return Err(Error::ShapeMismatch(format!("field {} vs pupil {}", field.n, pupil.grid_size)));
    }
    if ((field.spacing - pupil.pixel()) / pupil.pixel()).abs() > T::of(1e-6) {
        return Err(Error::ShapeMismatch("field spacing differs from the pupil pixel".into()));
    }
    if window.shape[0] == 0 || window.shape[1] == 0 || !(window.spacing > T::zero()) {
        return Err(Error::InvalidParameter("empty focal window".into()));
    }
    if z_planes.is_empty() {
        return Err(Error::InvalidParameter("no z planes requested".into()));
    }
    let dz = if z_planes.len() > 1 { z_planes[1] - z_planes[0] } else { window.spacing };
    for w in z_planes.windows(2) {
        if !(dz > T::zero()) || ((w[1] - w[0] - dz) / dz).abs() > T::of(1e-6) {
            return Err(Error::InvalidParameter("z planes must be ascending and uniformly spaced".into()));
        }
    }
    let xs = window.coords(0);
    let ys = window.coords(1);
    let half_fov = pupil.field_of_view() / T::of(2.0);
    let reach = |c: &[T]| c.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if reach(&xs) >= half_fov || reach(&ys) >= half_fov {
        return Err(Error::Aliasing("focal window extends beyond the pupil field of view".into()));
    }

    // Crop the pupil to the support of the field.
    let n = field.n;
    let peak = field.amplitude.iter().fold(T::zero(), |m, a| m.max(a.norm_sqr()));
    let floor = peak * T::of(1e-16);
    let (mut lo_u, mut hi_u, mut lo_v, mut hi_v) = (n, 0, n, 0);
    for iv in 0..n {
        for iu in 0..n {
            if field.amplitude[iv * n + iu].norm_sqr() > floor {
                lo_u = lo_u.min(iu);
                hi_u = hi_u.max(iu);
                lo_v = lo_v.min(iv);
                hi_v = hi_v.max(iv);
            }
        }
    }
    let total_power = field.power();
    let grid_shape = [xs.len(), ys.len(), z_planes.len()];
    let origin = [xs[0], ys[0], z_planes[0]];
    let spacing = [window.spacing, window.spacing, dz];
    if lo_u > hi_u {
        let grid = Grid3::new(grid_shape, spacing, origin, vec![T::zero(); grid_shape.iter().product()])?;
        return Ok(IntensityVolume { grid, wavelength: pupil.wavelength, total_power });
    }

    let lf = pupil.wavelength * pupil.focal_length;
    let k = T::TAU() / pupil.wavelength;
    let alpha = T::TAU() / lf;
    let px = pupil.pixel();

    // Angular-spectrum sampling bound: the defocus phase may not advance by
    // more than π between pupil samples anywhere on the support.
    let zmax = z_planes.iter().fold(T::zero(), |m, z| m.max(z.abs()));
    let rmax = [pupil.coord(lo_u), pupil.coord(hi_u), pupil.coord(lo_v), pupil.coord(hi_v)]
        .iter()
        .fold(T::zero(), |m, c| m.max(c.abs()))
        * T::SQRT_2();
    let kt = alpha * rmax;
    if kt >= k {
        return Err(Error::Sampling("pupil support maps onto evanescent waves".into()));
    }
    let slope = kt / (k * k - kt * kt).sqrt() * alpha;
    if zmax * slope * px >= T::PI() {
        return Err(Error::Sampling(format!(
            "plane at |z| = {:e} m violates the angular-spectrum sampling bound",
            zmax.as_f64()
        )));
    }

    let us: Vec<T> = (lo_u..=hi_u).map(|i| pupil.coord(i)).collect();
    let vs: Vec<T> = (lo_v..=hi_v).map(|i| pupil.coord(i)).collect();
    let (nu, nv) = (us.len(), vs.len());
    let kernel = |out: &[T], inp: &[T]| -> Vec<Complex<T>> {
        let mut m = Vec::with_capacity(out.len() * inp.len());
        for &o in out {
            for &i in inp {
                m.push(Complex::from_polar(T::one(), -alpha * o * i));
            }
        }
        m
    };
    let ax = kernel(&xs, &us);
    let ay = kernel(&ys, &vs);
    let mut cropped = Vec::with_capacity(nu * nv);
    let mut kz_minus_k = Vec::with_capacity(nu * nv);
    for (jv, &v) in vs.iter().enumerate() {
        for (ju, &u) in us.iter().enumerate() {
            cropped.push(field.amplitude[(lo_v + jv) * n + lo_u + ju]);
            let kt2 = alpha * alpha * (u * u + v * v);
            // k_z − k without cancellation
            kz_minus_k.push(-kt2 / ((k * k - kt2).sqrt() + k));
        }
    }
    let prefactor = px * px / lf;
    let (nx, ny) = (xs.len(), ys.len());

    let planes: Vec<Vec<T>> = z_planes
        .par_iter()
        .map(|&z| {
            // tmp[v][x] = Σ_u P_z[v][u] · ax[x][u]
            let mut tmp = vec![Complex::new(T::zero(), T::zero()); nv * nx];
            let mut row = vec![Complex::new(T::zero(), T::zero()); nu];
            for jv in 0..nv {
                for ju in 0..nu {
                    let i = jv * nu + ju;
                    row[ju] = cropped[i] * Complex::from_polar(T::one(), kz_minus_k[i] * z);
                }
                for ix in 0..nx {
                    let a = &ax[ix * nu..(ix + 1) * nu];
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for (p, q) in row.iter().zip(a) {
                        acc = acc + p * q;
                    }
                    tmp[jv * nx + ix] = acc;
                }
            }
            let mut out = vec![T::zero(); nx * ny];
            for iy in 0..ny {
                let a = &ay[iy * nv..(iy + 1) * nv];
                for ix in 0..nx {
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for jv in 0..nv {
                        acc = acc + a[jv] * tmp[jv * nx + ix];
                    }
                    out[iy * nx + ix] = (acc * prefactor).norm_sqr();
                }
            }
            out
        })
        .collect();

    let values = planes.into_iter().flatten().collect();
    let grid = Grid3::new(grid_shape, spacing, origin, values)?;
    Ok(IntensityVolume { grid, wavelength: pupil.wavelength, total_power })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{pupil_field, PhaseMask};

    fn gaussian(n: usize, dx: f64, w: f64) -> ComplexField<f64> {
        ComplexField::from_fn(n, dx, 0.0, |x, y| Complex::new((-(x * x + y * y) / (w * w)).exp(), 0.0)).unwrap()
    }

    #[test]
    fn zero_step_is_identity() {
        let f = gaussian(32, 1e-6, 5e-6);
        let g = angular_spectrum_step(&f, 0.0, 820e-9).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn non_finite_step_is_rejected() {
        let f = gaussian(32, 1e-6, 5e-6);
        assert!(angular_spectrum_step(&f, f64::NAN, 820e-9).is_err());
    }

    #[test]
    fn plane_wave_picks_up_kz_phase() {
        let n = 64;
        let dx = 0.5e-6;
        let lambda = 820e-9;
        let kx = std::f64::consts::TAU * 5.0 / (n as f64 * dx);
        // place the field on the FFT grid origin so the carrier is periodic
        let f = ComplexField::from_fn(n, dx, 0.0, |x, _| Complex::from_polar(1.0, kx * x)).unwrap();
        let dz = 3.3e-6;
        let g = angular_spectrum_step(&f, dz, lambda).unwrap();
        let k = std::f64::consts::TAU / lambda;
        let kz = (k * k - kx * kx).sqrt();
        for (a, b) in g.amplitude.iter().zip(&f.amplitude) {
            assert!((a.norm() - 1.0).abs() < 1e-12);
            let dphi = (a / b).arg();
            assert!((dphi - (kz * dz).sin().atan2((kz * dz).cos())).abs() < 1e-10);
        }
    }

    #[test]
    fn window_outside_field_of_view_is_aliasing() {
        let p = PupilSpec::<f64> { grid_size: 64, ..PupilSpec::bob_default() };
        let field = pupil_field(&p, &PhaseMask::zeros(64), 1e-3, None).unwrap();
        let w = FocalWindow::square([p.field_of_view(), 0.0], 1e-6, 4);
        assert!(matches!(propagate_to_focus(&field, &p, &w, &[0.0]), Err(Error::Aliasing(_))));
    }

    #[test]
    fn far_plane_violates_sampling_bound() {
        let p = PupilSpec::<f64> { grid_size: 64, ..PupilSpec::bob_default() };
        let field = pupil_field(&p, &PhaseMask::zeros(64), 1e-3, None).unwrap();
        let w = FocalWindow::square([0.0, 0.0], 1e-6, 4);
        assert!(matches!(propagate_to_focus(&field, &p, &w, &[5e-3]), Err(Error::Sampling(_))));
    }

    #[test]
    fn non_uniform_planes_are_rejected() {
        let p = PupilSpec::<f64> { grid_size: 64, ..PupilSpec::bob_default() };
        let field = pupil_field(&p, &PhaseMask::zeros(64), 1e-3, None).unwrap();
        let w = FocalWindow::square([0.0, 0.0], 1e-6, 4);
        assert!(propagate_to_focus(&field, &p, &w, &[0.0, 1e-6, 3e-6]).is_err());
    }
}
