use num_complex::Complex;

use super::PupilSpec;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// SLM phase pattern in radians, `grid_size²` samples stored row by row (`v`
/// major, `u` minor).
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseMask<T> {
    pub n: usize,
    pub values: Vec<T>,
}

fn wrap<T: Real>(phi: T) -> T {
    let two_pi = T::TAU();
    let w = phi % two_pi;
    let w = if w < T::zero() { w + two_pi } else { w };
    // `x % 2π` can round up to exactly 2π for tiny negative inputs
    if w >= two_pi {
        T::zero()
    } else {
        w
    }
}

impl<T: Real> PhaseMask<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, values: vec![T::zero(); n * n] }
    }

    pub fn from_values(n: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::ShapeMismatch(format!("{} values for a {n}² mask", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("mask contains non-finite phase".into()));
        }
        Ok(Self { n, values: values.into_iter().map(wrap).collect() })
    }

    #[inline]
    pub fn at(&self, iu: usize, iv: usize) -> T {
        self.values[iv * self.n + iu]
    }

    /// Elementwise `−φ` wrapped to `[0, 2π)`.
    pub fn negated(&self) -> Self {
        Self { n: self.n, values: self.values.iter().map(|&v| wrap(-v)).collect() }
    }

    /// Largest wrapped distance between two masks, in radians.
    pub fn max_phase_distance(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| {
                let d = wrap(a - b);
                d.min(T::TAU() - d)
            })
            .fold(T::zero(), T::max)
    }
}

/// Elementwise sum of masks wrapped to `[0, 2π)`.
pub fn compose_masks<T: Real>(masks: &[&PhaseMask<T>]) -> Result<PhaseMask<T>> {
    let first = masks
        .first()
        .ok_or_else(|| Error::InvalidParameter("no masks to compose".into()))?;
    let n = first.n;
    if let Some(bad) = masks.iter().find(|m| m.n != n) {
        return Err(Error::ShapeMismatch(format!("mask of size {} composed with size {}", bad.n, n)));
    }
    let values = (0..n * n)
        .map(|i| wrap(masks.iter().fold(T::zero(), |s, m| s + m.values[i])))
        .collect();
    Ok(PhaseMask { n, values })
}

/// Regular trap array in the focal plane, centred on the optical axis.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrayGeometry<T> {
    pub rows: usize,
    pub cols: usize,
    /// Site spacing, meters.
    pub pitch: T,
    /// Optional per-site transverse displacement (x, y), meters.
    pub offsets: Vec<[T; 2]>,
    /// Optional per-site focus shift along the beam, meters.
    pub focus_shifts: Vec<T>,
}

impl<T: Real> ArrayGeometry<T> {
    pub fn new(rows: usize, cols: usize, pitch: T) -> Self {
        Self { rows, cols, pitch, offsets: Vec::new(), focus_shifts: Vec::new() }
    }

    /// 3×6 sites at 15 µm.
    pub fn standard() -> Self {
        Self::new(3, 6, T::of(15e-6))
    }

    pub fn site_count(&self) -> usize {
        self.rows * self.cols
    }

    /// Same displacement applied to every site.
    pub fn with_uniform_offset(mut self, offset: [T; 2]) -> Self {
        self.offsets = vec![offset; self.site_count()];
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidParameter("array needs at least one site".into()));
        }
        if self.pitch < T::zero() || !self.pitch.is_finite() {
            return Err(Error::InvalidParameter("pitch must be non-negative".into()));
        }
        if self.site_count() > 1 && self.pitch == T::zero() {
            return Err(Error::InvalidParameter("multi-site array needs pitch > 0".into()));
        }
        let n = self.site_count();
        if !self.offsets.is_empty() && self.offsets.len() != n {
            return Err(Error::ShapeMismatch(format!("{} offsets for {n} sites", self.offsets.len())));
        }
        if !self.focus_shifts.is_empty() && self.focus_shifts.len() != n {
            return Err(Error::ShapeMismatch(format!("{} focus shifts for {n} sites", self.focus_shifts.len())));
        }
        if self.pitch > T::zero() {
            for o in &self.offsets {
                if o[0].hypot(o[1]) > self.pitch / T::of(4.0) {
                    return Err(Error::InvalidParameter("site offset must be small against the pitch".into()));
                }
            }
        }
        Ok(())
    }

    /// Site positions (x, y, z) in row-major order.
    pub fn sites(&self) -> Vec<[T; 3]> {
        let half = |k: usize| T::of_usize(k.saturating_sub(1)) / T::of(2.0);
        let mut out = Vec::with_capacity(self.site_count());
        for r in 0..self.rows {
            for c in 0..self.cols {
                let i = r * self.cols + c;
                let off = self.offsets.get(i).copied().unwrap_or([T::zero(); 2]);
                let dz = self.focus_shifts.get(i).copied().unwrap_or_else(T::zero);
                out.push([
                    (T::of_usize(c) - half(self.cols)) * self.pitch + off[0],
                    (T::of_usize(r) - half(self.rows)) * self.pitch + off[1],
                    dz,
                ]);
            }
        }
        out
    }
}

/// Gratings-and-lenses hologram: the phase of the coherent sum of one blazed
/// grating (plus defocus) per site.
pub fn make_tweezer_mask<T: Real>(pupil: &PupilSpec<T>, geom: &ArrayGeometry<T>) -> Result<PhaseMask<T>> {
    pupil.validate()?;
    geom.validate()?;
    let sites = geom.sites();
    let half_fov = pupil.field_of_view() / T::of(2.0);
    for s in &sites {
        if s[0].abs() >= half_fov || s[1].abs() >= half_fov {
            return Err(Error::Aliasing(format!(
                "site ({:e}, {:e}) m outside the ±{:e} m field of view",
                s[0].as_f64(),
                s[1].as_f64(),
                half_fov.as_f64()
            )));
        }
    }
    if sites.len() > 1 && geom.pitch < pupil.focal_sample() * T::of(2.0) {
        return Err(Error::Sampling(format!(
            "pitch {:e} m below two focal samples ({:e} m)",
            geom.pitch.as_f64(),
            pupil.focal_sample().as_f64()
        )));
    }
    let n = pupil.grid_size;
    let lf = pupil.wavelength * pupil.focal_length;
    let edge = pupil.coord(0).abs();
    for s in &sites {
        // defocus gradient at the pupil edge
        let g = T::of(2.0) * T::PI() * s[2].abs() * edge / (lf * pupil.focal_length);
        if g >= pupil.max_phase_gradient() {
            return Err(Error::Sampling("focus shift too large for the pupil sampling".into()));
        }
    }
    let count = T::of_usize(sites.len());
    // quadratic site phases keep the sum from degenerating for regular arrays
    let site_phase: Vec<T> = (0..sites.len())
        .map(|j| T::PI() * T::of_usize(j * j) / count)
        .collect();
    let mut values = Vec::with_capacity(n * n);
    for iv in 0..n {
        let v = pupil.coord(iv);
        for iu in 0..n {
            let u = pupil.coord(iu);
            let mut acc = Complex::new(T::zero(), T::zero());
            for (s, &theta) in sites.iter().zip(&site_phase) {
                let phase = T::TAU() * (s[0] * u + s[1] * v) / lf
                    + T::PI() * s[2] * (u * u + v * v) / (lf * pupil.focal_length)
                    + theta;
                acc = acc + Complex::from_polar(T::one(), phase);
            }
            values.push(if acc.norm_sqr() > T::zero() { wrap(acc.arg()) } else { T::zero() });
        }
    }
    Ok(PhaseMask { n, values })
}

/// Bottle-beam mask parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct BobMaskParams<T> {
    /// Radius of the π-phase disk, meters.
    pub inner_radius: T,
    /// Radius of the pupil, meters.
    pub outer_radius: T,
    /// In-pupil tilt (rad/m along x, y) separating the first order.
    pub inner_grad: [T; 2],
    /// Out-of-pupil tilt (rad/m) dumping the remaining light.
    pub outer_grad: [T; 2],
}

impl<T: Real> BobMaskParams<T> {
    /// Default pupil with the light outside it steered along y, 3/8 of the
    /// field of view away (100 µm for the default sampling).
    pub fn with_ratio(pupil: &PupilSpec<T>, ratio: T) -> Self {
        let outer = T::of(super::BOB_OUTER_RADIUS);
        let dump = pupil.field_of_view() * T::of(0.375);
        Self {
            inner_radius: outer * ratio,
            outer_radius: outer,
            inner_grad: [T::zero(); 2],
            outer_grad: [T::zero(), pupil.gradient_for_offset(dump)],
        }
    }

    pub fn ratio(&self) -> T {
        self.inner_radius / self.outer_radius
    }

    pub fn validate(&self, pupil: &PupilSpec<T>) -> Result<()> {
        if self.inner_radius < T::zero() || self.inner_radius >= self.outer_radius {
            return Err(Error::InvalidParameter(format!(
                "need 0 ≤ inner_radius < outer_radius (got {:e}, {:e})",
                self.inner_radius.as_f64(),
                self.outer_radius.as_f64()
            )));
        }
        if self.outer_radius > pupil.physical_extent / T::of(2.0) {
            return Err(Error::InvalidParameter("outer_radius exceeds half the pupil extent".into()));
        }
        let norm = |g: &[T; 2]| g[0].hypot(g[1]);
        let (a, b) = (norm(&self.inner_grad), norm(&self.outer_grad));
        let dot = self.inner_grad[0] * self.outer_grad[0] + self.inner_grad[1] * self.outer_grad[1];
        if dot.abs() > T::of(1e-9) * a * b {
            return Err(Error::InvalidParameter("inner and outer gradients must be orthogonal".into()));
        }
        if a >= pupil.max_phase_gradient() || b >= pupil.max_phase_gradient() {
            return Err(Error::Aliasing("phase gradient exceeds π per pupil sample".into()));
        }
        Ok(())
    }
}

/// π disk inside a 0-phase pupil, with the in-pupil and out-of-pupil tilts.
pub fn make_bob_mask<T: Real>(pupil: &PupilSpec<T>, params: &BobMaskParams<T>) -> Result<PhaseMask<T>> {
    pupil.validate()?;
    params.validate(pupil)?;
    let n = pupil.grid_size;
    let mut values = Vec::with_capacity(n * n);
    for iv in 0..n {
        let v = pupil.coord(iv);
        for iu in 0..n {
            let u = pupil.coord(iu);
            let r = u.hypot(v);
            let phi = if r <= params.outer_radius {
                let disk = if r < params.inner_radius { T::PI() } else { T::zero() };
                disk + params.inner_grad[0] * u + params.inner_grad[1] * v
            } else {
                params.outer_grad[0] * u + params.outer_grad[1] * v
            };
            values.push(wrap(phi));
        }
    }
    Ok(PhaseMask { n, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_pupil() -> PupilSpec<f64> {
        PupilSpec { grid_size: 64, ..PupilSpec::bob_default() }
    }

    #[test]
    fn single_site_gives_zero_mask() {
        let p = small_pupil();
        let m = make_tweezer_mask(&p, &ArrayGeometry::new(1, 1, 0.0)).unwrap();
        assert!(m.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn site_outside_field_of_view_is_aliasing() {
        let p = small_pupil();
        let geom = ArrayGeometry::new(1, 2, p.field_of_view());
        assert!(matches!(make_tweezer_mask(&p, &geom), Err(Error::Aliasing(_))));
    }

    #[test]
    fn pitch_below_focal_sampling_is_rejected() {
        let p = small_pupil();
        let geom = ArrayGeometry::new(1, 2, p.focal_sample());
        assert!(matches!(make_tweezer_mask(&p, &geom), Err(Error::Sampling(_))));
    }

    #[test]
    fn default_sites_are_centred() {
        let sites = ArrayGeometry::<f64>::standard().sites();
        assert_eq!(sites.len(), 18);
        let sx: f64 = sites.iter().map(|s| s[0]).sum();
        let sy: f64 = sites.iter().map(|s| s[1]).sum();
        assert!(sx.abs() < 1e-18 && sy.abs() < 1e-18);
        assert!((sites[1][0] - sites[0][0] - 15e-6).abs() < 1e-18);
        assert!((sites[6][1] - sites[0][1] - 15e-6).abs() < 1e-18);
    }

    #[test]
    fn bob_mask_regions() {
        let p = small_pupil();
        let mut params = BobMaskParams::with_ratio(&p, 0.5);
        params.outer_grad = [0.0, 0.0];
        let m = make_bob_mask(&p, &params).unwrap();
        let c = p.grid_size / 2;
        assert!((m.at(c, c) - std::f64::consts::PI).abs() < 1e-12);
        // between the radii
        let ring = (0.75 * params.outer_radius / p.pixel()) as usize;
        assert_eq!(m.at(c + ring, c), 0.0);
    }

    #[test]
    fn bob_mask_outer_tilt_only_outside_pupil() {
        let p = small_pupil();
        let params = BobMaskParams::with_ratio(&p, 0.5);
        let m = make_bob_mask(&p, &params).unwrap();
        let expected = |iv: usize| {
            let v = p.coord(iv);
            let g = params.outer_grad[1] * v;
            g.rem_euclid(std::f64::consts::TAU)
        };
        // corner sample lies outside the pupil
        assert!((m.at(0, 0) - expected(0)).abs() < 1e-9);
    }

    #[test]
    fn bob_mask_rejects_bad_radii_and_gradients() {
        let p = small_pupil();
        let mut params = BobMaskParams::with_ratio(&p, 0.5);
        params.inner_radius = params.outer_radius;
        assert!(make_bob_mask(&p, &params).is_err());
        let mut params = BobMaskParams::with_ratio(&p, 0.5);
        params.inner_grad = [0.0, 10.0];
        assert!(make_bob_mask(&p, &params).is_err());
        let mut params = BobMaskParams::with_ratio(&p, 0.5);
        params.outer_grad = [0.0, 2.0 * p.max_phase_gradient()];
        assert!(matches!(make_bob_mask(&p, &params), Err(Error::Aliasing(_))));
    }

    #[test]
    fn compose_identity_and_inverse() {
        let p = small_pupil();
        let m = make_bob_mask(&p, &BobMaskParams::with_ratio(&p, 0.6)).unwrap();
        let zero = PhaseMask::zeros(p.grid_size);
        let same = compose_masks(&[&m, &zero]).unwrap();
        assert!(same.max_phase_distance(&m) < 1e-12);
        let neg = m.negated();
        let sum = compose_masks(&[&m, &neg]).unwrap();
        assert!(sum.max_phase_distance(&zero) < 1e-12);
    }

    #[test]
    fn compose_rejects_mismatched_shapes() {
        let a = PhaseMask::<f64>::zeros(64);
        let b = PhaseMask::<f64>::zeros(128);
        assert!(matches!(compose_masks(&[&a, &b]), Err(Error::ShapeMismatch(_))));
    }

    fn arb_mask(n: usize) -> impl Strategy<Value = PhaseMask<f64>> {
        prop::collection::vec(-20.0f64..20.0, n * n).prop_map(move |v| PhaseMask::from_values(n, v).unwrap())
    }

    proptest! {
        #[test]
        fn composition_is_commutative_and_associative(a in arb_mask(8), b in arb_mask(8), c in arb_mask(8)) {
            let ab = compose_masks(&[&a, &b]).unwrap();
            let ba = compose_masks(&[&b, &a]).unwrap();
            prop_assert!(ab.max_phase_distance(&ba) < 1e-9);
            let ab_c = compose_masks(&[&ab, &c]).unwrap();
            let bc = compose_masks(&[&b, &c]).unwrap();
            let a_bc = compose_masks(&[&a, &bc]).unwrap();
            prop_assert!(ab_c.max_phase_distance(&a_bc) < 1e-9);
            prop_assert!(ab_c.values.iter().all(|&v| (0.0..std::f64::consts::TAU).contains(&v)));
        }
    }
}
