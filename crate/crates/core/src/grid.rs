//! Regular 3D sample grids shared by intensity volumes and potentials.
//!
//! Samples are stored plane by plane along `z`, then row by row along `y`:
//! the flat index of `(ix, iy, iz)` is `(iz * ny + iy) * nx + ix`. By
//! convention `z` is the beam propagation axis.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct Grid3<T> {
    /// Number of samples along (x, y, z).
    pub shape: [usize; 3],
    /// Sample spacing along (x, y, z), meters.
    pub spacing: [T; 3],
    /// Position of sample (0, 0, 0), meters.
    pub origin: [T; 3],
    pub values: Vec<T>,
}

impl<T: Real> Grid3<T> {
    pub fn new(shape: [usize; 3], spacing: [T; 3], origin: [T; 3], values: Vec<T>) -> Result<Self> {
        let n = shape[0] * shape[1] * shape[2];
        if n == 0 {
            return Err(Error::InvalidParameter("grid shape has a zero dimension".into()));
        }
        if values.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} values for shape {:?}",
                values.len(),
                shape
            )));
        }
        if spacing.iter().any(|&d| !(d > T::zero()) || !d.is_finite()) {
            return Err(Error::InvalidParameter("grid spacing must be positive".into()));
        }
        Ok(Self { shape, spacing, origin, values })
    }

    /// Builds a grid by evaluating `f` at every sample position.
    pub fn from_fn(shape: [usize; 3], spacing: [T; 3], origin: [T; 3], mut f: impl FnMut([T; 3]) -> T) -> Result<Self> {
        let mut values = Vec::with_capacity(shape[0] * shape[1] * shape[2]);
        for iz in 0..shape[2] {
            for iy in 0..shape[1] {
                for ix in 0..shape[0] {
                    values.push(f([
                        origin[0] + spacing[0] * T::of_usize(ix),
                        origin[1] + spacing[1] * T::of_usize(iy),
                        origin[2] + spacing[2] * T::of_usize(iz),
                    ]));
                }
            }
        }
        Self::new(shape, spacing, origin, values)
    }

    /// Grid centred on `center` with `shape` samples per axis.
    pub fn centered(shape: [usize; 3], spacing: [T; 3], center: [T; 3]) -> Self {
        let half = |i: usize| spacing[i] * T::of_usize(shape[i] - 1) / T::of(2.0);
        let origin = [center[0] - half(0), center[1] - half(1), center[2] - half(2)];
        let n = shape[0] * shape[1] * shape[2];
        Self { shape, spacing, origin, values: vec![T::zero(); n] }
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (iz * self.shape[1] + iy) * self.shape[0] + ix
    }

    #[inline]
    pub fn get(&self, ix: usize, iy: usize, iz: usize) -> T {
        self.values[self.index(ix, iy, iz)]
    }

    #[inline]
    pub fn unravel(&self, flat: usize) -> [usize; 3] {
        let nx = self.shape[0];
        let ny = self.shape[1];
        [flat % nx, (flat / nx) % ny, flat / (nx * ny)]
    }

    #[inline]
    pub fn position(&self, idx: [usize; 3]) -> [T; 3] {
        [
            self.origin[0] + self.spacing[0] * T::of_usize(idx[0]),
            self.origin[1] + self.spacing[1] * T::of_usize(idx[1]),
            self.origin[2] + self.spacing[2] * T::of_usize(idx[2]),
        ]
    }

    /// Coordinates of the samples along one axis.
    pub fn axis(&self, axis: usize) -> Vec<T> {
        (0..self.shape[axis])
            .map(|i| self.origin[axis] + self.spacing[axis] * T::of_usize(i))
            .collect()
    }

    /// Fractional grid coordinates of a physical position.
    #[inline]
    pub fn fractional(&self, pos: &[T; 3]) -> [T; 3] {
        [
            (pos[0] - self.origin[0]) / self.spacing[0],
            (pos[1] - self.origin[1]) / self.spacing[1],
            (pos[2] - self.origin[2]) / self.spacing[2],
        ]
    }

    /// True when `pos` lies inside the sampled box (boundaries included, up
    /// to rounding of the sample positions).
    pub fn contains(&self, pos: &[T; 3]) -> bool {
        let f = self.fractional(pos);
        let tol = T::epsilon() * T::of(64.0) * T::of_usize(self.shape.iter().copied().max().unwrap_or(1));
        (0..3).all(|a| f[a] >= -tol && f[a] <= T::of_usize(self.shape[a] - 1) + tol)
    }

    /// Nearest sample index of `pos`, or `None` outside the box.
    pub fn nearest(&self, pos: &[T; 3]) -> Option<[usize; 3]> {
        if !self.contains(pos) {
            return None;
        }
        let f = self.fractional(pos);
        let r = |a: usize| f[a].round().to_usize().unwrap_or(0).min(self.shape[a] - 1);
        Some([r(0), r(1), r(2)])
    }

    pub fn is_boundary(&self, idx: [usize; 3]) -> bool {
        (0..3).any(|a| idx[a] == 0 || idx[a] + 1 == self.shape[a])
    }

    /// Indices of the up-to-six face neighbours of a sample.
    pub fn neighbours(&self, idx: [usize; 3]) -> impl Iterator<Item = [usize; 3]> + '_ {
        (0..6).filter_map(move |k| {
            let axis = k / 2;
            let mut n = idx;
            if k % 2 == 0 {
                if idx[axis] == 0 {
                    return None;
                }
                n[axis] -= 1;
            } else {
                if idx[axis] + 1 >= self.shape[axis] {
                    return None;
                }
                n[axis] += 1;
            }
            Some(n)
        })
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            shape: self.shape,
            spacing: self.spacing,
            origin: self.origin,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Sum of one z-plane times the transverse cell area.
    pub fn plane_integral(&self, iz: usize) -> T {
        let n = self.shape[0] * self.shape[1];
        let start = iz * n;
        let s: T = self.values[start..start + n].iter().copied().sum();
        s * self.spacing[0] * self.spacing[1]
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    /// Flat index of the largest sample.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn same_geometry(&self, other: &Self) -> bool {
        self.shape == other.shape && self.spacing == other.spacing && self.origin == other.origin
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let g = Grid3::<f64>::centered([4, 5, 6], [1.0, 1.0, 1.0], [0.0; 3]);
        for flat in 0..g.values.len() {
            let [ix, iy, iz] = g.unravel(flat);
            assert_eq!(g.index(ix, iy, iz), flat);
        }
    }

    #[test]
    fn centered_grid_is_symmetric() {
        let g = Grid3::<f64>::centered([5, 5, 3], [0.5, 0.5, 2.0], [1.0, 0.0, 0.0]);
        assert_eq!(g.position([2, 2, 1]), [1.0, 0.0, 0.0]);
        assert_eq!(g.nearest(&[1.1, 0.1, 0.4]), Some([2, 2, 1]));
        assert_eq!(g.nearest(&[10.0, 0.0, 0.0]), None);
    }

    #[test]
    fn neighbours_respect_boundaries() {
        let g = Grid3::<f64>::centered([3, 3, 3], [1.0; 3], [0.0; 3]);
        assert_eq!(g.neighbours([0, 0, 0]).count(), 3);
        assert_eq!(g.neighbours([1, 1, 1]).count(), 6);
        assert!(g.is_boundary([0, 1, 1]));
        assert!(!g.is_boundary([1, 1, 1]));
    }

    #[test]
    fn rejects_wrong_length() {
        assert!(Grid3::new([2, 2, 2], [1.0f64; 3], [0.0; 3], vec![0.0; 7]).is_err());
    }
}
