//! Bottle beams: focal volumes of the π-disk mask and the choice of its
//! radius ratio.

use super::{make_bob_mask, propagate_to_focus, pupil_field, BobMaskParams, FocalWindow, IntensityVolume, PupilSpec};
use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::potentials::{locate_minimum, ponderomotive_potential, trap_depth, Species, TrapDepth, TrapPotential};
use crate::scalar::Real;

/// Sampling of the volume around a single bottle beam, and its power.
#[derive(Clone, Debug, PartialEq)]
pub struct BobVolumeSpec<T> {
    /// Power inside the outer pupil radius, watts.
    pub power: T,
    pub half_width: T,
    pub transverse_spacing: T,
    pub half_length: T,
    pub axial_spacing: T,
}

impl<T: Real> Default for BobVolumeSpec<T> {
    fn default() -> Self {
        Self {
            power: T::of(20e-3),
            half_width: T::of(3e-6),
            transverse_spacing: T::of(0.1e-6),
            half_length: T::of(15e-6),
            axial_spacing: T::of(0.25e-6),
        }
    }
}

impl<T: Real> BobVolumeSpec<T> {
    /// Smaller box that still encloses the escape saddle; for scans.
    pub fn coarse() -> Self {
        Self {
            half_width: T::of(2e-6),
            half_length: T::of(8e-6),
            axial_spacing: T::of(0.4e-6),
            ..Self::default()
        }
    }

    fn samples(half: T, step: T) -> usize {
        2 * (half / step).round().to_usize().unwrap_or(0) + 1
    }

    pub fn window(&self) -> FocalWindow<T> {
        let n = Self::samples(self.half_width, self.transverse_spacing);
        FocalWindow::square([T::zero(); 2], self.transverse_spacing, n)
    }

    pub fn z_planes(&self) -> Vec<T> {
        let n = Self::samples(self.half_length, self.axial_spacing);
        let h = (n / 2) as f64;
        (0..n).map(|i| T::of(i as f64 - h) * self.axial_spacing).collect()
    }

    fn validate(&self) -> Result<()> {
        for v in [self.power, self.half_width, self.transverse_spacing, self.half_length, self.axial_spacing] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter("bottle-beam volume parameters must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Intensity volume of one bottle beam centred on the optical axis.
pub fn bob_volume<T: Real>(pupil: &PupilSpec<T>, params: &BobMaskParams<T>, spec: &BobVolumeSpec<T>) -> Result<IntensityVolume<T>> {
    spec.validate()?;
    let mask = make_bob_mask(pupil, params)?;
    let field = pupil_field(pupil, &mask, spec.power, Some(params.outer_radius))?;
    propagate_to_focus(&field, pupil, &spec.window(), &spec.z_planes())
}

/// Intensity minimum of the dark core nearest `guess`.
pub fn bob_center<T: Real>(volume: &IntensityVolume<T>, guess: &[T; 3]) -> Result<[T; 3]> {
    let as_potential = TrapPotential { grid: volume.grid.clone(), species: Species::RydbergPonderomotive };
    locate_minimum(&as_potential, guess)
}

/// Ponderomotive depth of the bottle beam with radius ratio `ratio`.
/// A ratio that leaves no closed shell gives depth 0 with the open flag.
pub fn bob_depth_at_ratio<T: Real>(pupil: &PupilSpec<T>, ratio: T, spec: &BobVolumeSpec<T>) -> Result<TrapDepth<T>> {
    let params = BobMaskParams::with_ratio(pupil, ratio);
    let volume = bob_volume(pupil, &params, spec)?;
    let pot = ponderomotive_potential(&volume, pupil.wavelength)?;
    let open = |g: &Grid3<T>| TrapDepth { depth: T::zero(), open: true, saddle: g.position([0, 0, 0]) };
    match bob_center(&volume, &[T::zero(); 3]) {
        Ok(c) => match trap_depth(&pot, &c) {
            Ok(d) => Ok(d),
            Err(Error::NotAnExtremum(_)) => Ok(open(&pot.grid)),
            Err(e) => Err(e),
        },
        Err(Error::NotATrap(_)) => Ok(open(&pot.grid)),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BobRatioOptimum<T> {
    pub ratio: T,
    /// Joules.
    pub depth: T,
    /// The coarse scan was not unimodal; `ratio` is the best sample found.
    pub multimodal: bool,
    pub evaluations: usize,
}

const SCAN_POINTS: usize = 9;
const RATIO_TOLERANCE: f64 = 1e-3;

/// Radius ratio maximizing the trap depth over `interval`: a coarse scan
/// brackets the best sample, golden-section search refines it.
pub fn optimize_bob_ratio<T: Real>(pupil: &PupilSpec<T>, interval: [T; 2], spec: &BobVolumeSpec<T>) -> Result<BobRatioOptimum<T>> {
    let [lo, hi] = interval;
    if !(lo > T::zero() && hi < T::one() && lo <= hi) {
        return Err(Error::InvalidParameter("ratio interval must lie inside (0, 1)".into()));
    }
    let mut evaluations = 0;
    let mut depth = |r: T| -> Result<T> {
        evaluations += 1;
        Ok(bob_depth_at_ratio(pupil, r, spec)?.depth)
    };
    if hi - lo <= T::of(RATIO_TOLERANCE) {
        let r = (lo + hi) / T::of(2.0);
        let d = depth(r)?;
        return Ok(BobRatioOptimum { ratio: r, depth: d, multimodal: false, evaluations: 1 });
    }

    let step = (hi - lo) / T::of_usize(SCAN_POINTS - 1);
    let xs: Vec<T> = (0..SCAN_POINTS).map(|i| lo + step * T::of_usize(i)).collect();
    let mut ys = Vec::with_capacity(SCAN_POINTS);
    for &x in &xs {
        ys.push(depth(x)?);
    }
    let best = (0..SCAN_POINTS).fold(0, |b, i| if ys[i] > ys[b] { i } else { b });
    let slack = ys[best] * T::of(1e-9);
    let rising = (1..=best).all(|i| ys[i] + slack >= ys[i - 1]);
    let falling = (best + 1..SCAN_POINTS).all(|i| ys[i] <= ys[i - 1] + slack);
    let multimodal = !(rising && falling);

    let (mut a, mut b) = (xs[best.saturating_sub(1)], xs[(best + 1).min(SCAN_POINTS - 1)]);
    let mut best_x = xs[best];
    let mut best_y = ys[best];
    let g = T::of((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = depth(c)?;
    let mut fd = depth(d)?;
    while b - a > T::of(RATIO_TOLERANCE) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = depth(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = depth(d)?;
        }
    }
    for (x, y) in [(c, fc), (d, fd)] {
        if y > best_y {
            best_x = x;
            best_y = y;
        }
    }
    Ok(BobRatioOptimum { ratio: best_x, depth: best_y, multimodal, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_sampling() {
        let s = BobVolumeSpec::<f64>::default();
        assert_eq!(s.window().shape, [61, 61]);
        let z = s.z_planes();
        assert_eq!(z.len(), 121);
        assert!(z[60].abs() < 1e-18);
    }

    #[test]
    fn interval_outside_unit_range_is_rejected() {
        let p = PupilSpec::<f64> { grid_size: 64, ..PupilSpec::bob_default() };
        let s = BobVolumeSpec::coarse();
        assert!(optimize_bob_ratio(&p, [0.0, 0.5], &s).is_err());
        assert!(optimize_bob_ratio(&p, [0.6, 0.5], &s).is_err());
    }
}
