use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{Species, TrapPotential};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Escape barrier of a trap.
#[derive(Clone, Debug, PartialEq)]
pub struct TrapDepth<T> {
    /// Joules, never negative.
    pub depth: T,
    /// No barrier separates the center from the edge of the grid.
    pub open: bool,
    /// Grid sample at which the lowest escape path peaks.
    pub saddle: [T; 3],
}

struct Entry<T> {
    value: T,
    flat: usize,
}

impl<T: PartialOrd> PartialEq for Entry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: PartialOrd> Eq for Entry<T> {}

impl<T: PartialOrd> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: PartialOrd> Ord for Entry<T> {
    // reversed: BinaryHeap pops the lowest value first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .value
            .partial_cmp(&self.value)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.flat.cmp(&self.flat))
    }
}

/// Depth of the trap around `center`.
///
/// Ponderomotive traps: the lowest barrier on any path from the center to the
/// grid boundary, found by priority flooding. A center sitting on a repulsive
/// hill yields depth 0 with the open flag. Dipole traps: `|U(center)|`.
pub fn trap_depth<T: Real>(pot: &TrapPotential<T>, center: &[T; 3]) -> Result<TrapDepth<T>> {
    let g = &pot.grid;
    let idx = g.nearest(center).ok_or(Error::OutOfBounds(center.map(|c| c.as_f64())))?;
    let u0 = g.get(idx[0], idx[1], idx[2]);
    let nb: Vec<T> = g.neighbours(idx).map(|n| g.get(n[0], n[1], n[2])).collect();
    let is_min = nb.iter().all(|&v| v >= u0);
    let is_max = nb.iter().all(|&v| v <= u0);
    let here = g.position(idx);

    match pot.species {
        Species::GroundDipole => {
            if !is_min {
                return Err(Error::NotAnExtremum(format!("{:?} is not a potential minimum", here.map(|c| c.as_f64()))));
            }
            Ok(TrapDepth { depth: u0.abs(), open: u0 == T::zero(), saddle: here })
        }
        Species::RydbergPonderomotive => {
            if !is_min {
                if is_max {
                    return Ok(TrapDepth { depth: T::zero(), open: true, saddle: here });
                }
                return Err(Error::NotAnExtremum(format!("{:?} is not a potential minimum", here.map(|c| c.as_f64()))));
            }
            let start = g.index(idx[0], idx[1], idx[2]);
            let mut seen = vec![false; g.values.len()];
            let mut heap = BinaryHeap::new();
            seen[start] = true;
            heap.push(Entry { value: u0, flat: start });
            let mut level = u0;
            let mut level_at = start;
            while let Some(Entry { value, flat }) = heap.pop() {
                if value > level {
                    level = value;
                    level_at = flat;
                }
                let p = g.unravel(flat);
                if g.is_boundary(p) {
                    let depth = level - u0;
                    let open = !(depth > T::zero());
                    return Ok(TrapDepth { depth: depth.max(T::zero()), open, saddle: g.position(g.unravel(level_at)) });
                }
                for n in g.neighbours(p) {
                    let f = g.index(n[0], n[1], n[2]);
                    if !seen[f] {
                        seen[f] = true;
                        heap.push(Entry { value: g.values[f], flat: f });
                    }
                }
            }
            unreachable!("flood fill always reaches the boundary")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid3;

    fn capped_bowl(cap: f64) -> TrapPotential<f64> {
        let g = Grid3::from_fn([21, 21, 21], [0.1e-6; 3], [-1e-6; 3], |r: [f64; 3]| {
            let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
            (1e-15 * r2 * 1e12 + 1e-30).min(cap)
        })
        .unwrap();
        TrapPotential::new(g, Species::RydbergPonderomotive).unwrap()
    }

    #[test]
    fn capped_bowl_depth() {
        let cap = 5e-16;
        let p = capped_bowl(cap);
        let d = trap_depth(&p, &[0.0; 3]).unwrap();
        assert!((d.depth - (cap - 1e-30)).abs() < 1e-24);
        assert!(!d.open);
    }

    #[test]
    fn repulsive_hill_is_open() {
        let g = Grid3::from_fn([11, 11, 11], [0.1e-6; 3], [-0.5e-6; 3], |r: [f64; 3]| {
            (-(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]) / 1e-12).exp() * 1e-27
        })
        .unwrap();
        let p = TrapPotential::new(g, Species::RydbergPonderomotive).unwrap();
        let d = trap_depth(&p, &[0.0; 3]).unwrap();
        assert_eq!(d.depth, 0.0);
        assert!(d.open);
    }

    #[test]
    fn slope_is_not_an_extremum() {
        let g = Grid3::from_fn([5, 5, 5], [1.0; 3], [0.0; 3], |r: [f64; 3]| 1.0 + r[0]).unwrap();
        let p = TrapPotential::new(g, Species::RydbergPonderomotive).unwrap();
        assert!(matches!(trap_depth(&p, &[2.0, 2.0, 2.0]), Err(Error::NotAnExtremum(_))));
        assert!(matches!(trap_depth(&p, &[9.0, 2.0, 2.0]), Err(Error::OutOfBounds(_))));
    }

    #[test]
    fn dipole_depth_is_center_value() {
        let g = Grid3::from_fn([5, 5, 5], [1.0; 3], [-2.0; 3], |r: [f64; 3]| -(-(r[0] * r[0] + r[1] * r[1] + r[2] * r[2])).exp())
            .unwrap();
        let p = TrapPotential::new(g, Species::GroundDipole).unwrap();
        assert_eq!(trap_depth(&p, &[0.0; 3]).unwrap().depth, 1.0);
    }
}
