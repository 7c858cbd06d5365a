use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::scalar::Real;

/// Bright spot in one plane of an intensity grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Spot<T> {
    pub x: T,
    pub y: T,
    /// Peak intensity of the sample nearest the spot.
    pub peak: T,
}

/// Local maxima of plane `iz` brighter than `threshold × max`, located to
/// sub-sample precision by a three-point Gaussian (log-parabola) fit per axis.
/// Spots are returned sorted by `y`, then `x`.
pub fn find_spots<T: Real>(grid: &Grid3<T>, iz: usize, threshold: T) -> Result<Vec<Spot<T>>> {
    if iz >= grid.shape[2] {
        return Err(Error::InvalidParameter(format!("plane {iz} outside grid")));
    }
    let [nx, ny, _] = grid.shape;
    let at = |ix: usize, iy: usize| grid.get(ix, iy, iz);
    let mut top = T::zero();
    for iy in 0..ny {
        for ix in 0..nx {
            top = top.max(at(ix, iy));
        }
    }
    let floor = top * threshold;
    let mut spots = Vec::new();
    for iy in 1..ny.saturating_sub(1) {
        for ix in 1..nx.saturating_sub(1) {
            let v = at(ix, iy);
            if !(v > floor) {
                continue;
            }
            let mut is_max = true;
            for (dx, dy) in [(-1isize, -1isize), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)] {
                let w = at((ix as isize + dx) as usize, (iy as isize + dy) as usize);
                // ties resolved towards the lower index
                if w > v || (w == v && (dy < 0 || (dy == 0 && dx < 0))) {
                    is_max = false;
                    break;
                }
            }
            if !is_max {
                continue;
            }
            let refine = |m: T, c: T, p: T| {
                let (lm, lc, lp) = (m.max(T::min_positive_value()).ln(), c.ln(), p.max(T::min_positive_value()).ln());
                let den = lm - T::of(2.0) * lc + lp;
                if den < T::zero() {
                    (T::of(0.5) * (lm - lp) / den).max(-T::one()).min(T::one())
                } else {
                    T::zero()
                }
            };
            let sx = refine(at(ix - 1, iy), v, at(ix + 1, iy));
            let sy = refine(at(ix, iy - 1), v, at(ix, iy + 1));
            let p = grid.position([ix, iy, iz]);
            spots.push(Spot { x: p[0] + sx * grid.spacing[0], y: p[1] + sy * grid.spacing[1], peak: v });
        }
    }
    Ok(spots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_spot_is_located_between_samples() {
        let (x0, y0, w) = (0.237e-6, -0.411e-6, 1.0e-6);
        let g = Grid3::from_fn([41, 41, 1], [0.1e-6, 0.1e-6, 1e-6], [-2e-6, -2e-6, 0.0], |r: [f64; 3]| {
            (-2.0 * ((r[0] - x0).powi(2) + (r[1] - y0).powi(2)) / (w * w)).exp()
        })
        .unwrap();
        let s = find_spots(&g, 0, 0.5).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s[0].x - x0).abs() < 1e-12);
        assert!((s[0].y - y0).abs() < 1e-12);
    }
}
