//! Tricubic Catmull-Rom interpolation of a potential grid.
//!
//! The interpolant is C¹, reproduces quadratics exactly away from the grid
//! edges, and its analytic gradient gives a conservative force field.

use super::TrapPotential;
use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::scalar::Real;

#[inline]
fn weights<T: Real>(t: T) -> ([T; 4], [T; 4]) {
    let h = T::of(0.5);
    let t2 = t * t;
    let t3 = t2 * t;
    let (two, three, four, five) = (T::of(2.0), T::of(3.0), T::of(4.0), T::of(5.0));
    let w = [
        h * (-t3 + two * t2 - t),
        h * (three * t3 - five * t2 + two),
        h * (-three * t3 + four * t2 + t),
        h * (t3 - t2),
    ];
    let (eight, nine, ten) = (T::of(8.0), T::of(9.0), T::of(10.0));
    let dw = [
        h * (-three * t2 + four * t - T::one()),
        h * (nine * t2 - ten * t),
        h * (-nine * t2 + eight * t + T::one()),
        h * (three * t2 - two * t),
    ];
    (w, dw)
}

/// Sample value with linear extrapolation one step past each edge.
fn sample<T: Real>(g: &Grid3<T>, idx: [isize; 3]) -> T {
    for a in 0..3 {
        let n = g.shape[a] as isize;
        if idx[a] < 0 || idx[a] >= n {
            let (edge, inner) = if idx[a] < 0 { (0, 1) } else { (n - 1, n - 2) };
            let mut e = idx;
            e[a] = edge;
            let mut i = idx;
            i[a] = inner;
            return T::of(2.0) * sample(g, e) - sample(g, i);
        }
    }
    g.get(idx[0] as usize, idx[1] as usize, idx[2] as usize)
}

/// Interpolated value and gradient at `pos`.
pub(crate) fn value_and_gradient<T: Real>(g: &Grid3<T>, pos: &[T; 3]) -> Result<(T, [T; 3])> {
    if !g.contains(pos) {
        return Err(Error::OutOfBounds(pos.map(|c| c.as_f64())));
    }
    if g.shape.iter().any(|&n| n < 2) {
        return Err(Error::InvalidParameter("interpolation needs two samples per axis".into()));
    }
    let f = g.fractional(pos);
    let mut base = [0isize; 3];
    let mut w = [[T::zero(); 4]; 3];
    let mut dw = [[T::zero(); 4]; 3];
    for a in 0..3 {
        let fa = f[a].max(T::zero()).min(T::of_usize(g.shape[a] - 1));
        let i0 = fa.floor().to_isize().unwrap_or(0).clamp(0, g.shape[a] as isize - 2);
        base[a] = i0 - 1;
        let (wa, da) = weights(fa - T::of(i0 as f64));
        w[a] = wa;
        dw[a] = da;
    }
    let mut v = T::zero();
    let mut grad = [T::zero(); 3];
    for c in 0..4 {
        for b in 0..4 {
            for a in 0..4 {
                let s = sample(g, [base[0] + a as isize, base[1] + b as isize, base[2] + c as isize]);
                v = v + w[0][a] * w[1][b] * w[2][c] * s;
                grad[0] = grad[0] + dw[0][a] * w[1][b] * w[2][c] * s;
                grad[1] = grad[1] + w[0][a] * dw[1][b] * w[2][c] * s;
                grad[2] = grad[2] + w[0][a] * w[1][b] * dw[2][c] * s;
            }
        }
    }
    for a in 0..3 {
        grad[a] = grad[a] / g.spacing[a];
    }
    Ok((v, grad))
}

/// Force `−∇U` (N) of the interpolated potential.
pub fn force_at<T: Real>(pot: &TrapPotential<T>, pos: &[T; 3]) -> Result<[T; 3]> {
    let (_, g) = value_and_gradient(&pot.grid, pos)?;
    Ok([-g[0], -g[1], -g[2]])
}

/// Interpolated potential energy (J).
pub fn energy_at<T: Real>(pot: &TrapPotential<T>, pos: &[T; 3]) -> Result<T> {
    Ok(value_and_gradient(&pot.grid, pos)?.0)
}
