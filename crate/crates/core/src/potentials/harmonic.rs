use super::{trap_depth, TrapPotential};
use crate::constants::CODATA;
use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::linalg::{least_squares, Matrix};
use crate::scalar::Real;

const HALF: isize = 2;

/// Local quadratic model `U ≈ c + g·d + ½ dᵀ H d` around a grid node.
struct Quadratic<T> {
    node: [T; 3],
    gradient: [T; 3],
    hessian: Matrix<T>,
}

fn fit_quadratic<T: Real>(g: &Grid3<T>, idx: [usize; 3]) -> Result<Quadratic<T>> {
    if g.shape.iter().any(|&n| n < (2 * HALF + 1) as usize) {
        return Err(Error::InvalidParameter("quadratic fit needs 5 samples per axis".into()));
    }
    // keep the 5×5×5 block inside the grid
    let start: Vec<usize> = (0..3)
        .map(|a| (idx[a] as isize - HALF).clamp(0, g.shape[a] as isize - 2 * HALF - 1) as usize)
        .collect();
    let mut rows = Vec::with_capacity(125);
    let mut b = Vec::with_capacity(125);
    for k in 0..5 {
        for j in 0..5 {
            for i in 0..5 {
                let p = [start[0] + i, start[1] + j, start[2] + k];
                let s: Vec<T> = (0..3).map(|a| T::of(p[a] as f64 - idx[a] as f64)).collect();
                rows.push(vec![
                    T::one(),
                    s[0],
                    s[1],
                    s[2],
                    s[0] * s[0],
                    s[1] * s[1],
                    s[2] * s[2],
                    s[0] * s[1],
                    s[0] * s[2],
                    s[1] * s[2],
                ]);
                b.push(g.get(p[0], p[1], p[2]));
            }
        }
    }
    let c = least_squares(&rows, &b)?;
    let h = g.spacing;
    let mut hess = Matrix::zeros(3);
    for a in 0..3 {
        *hess.at_mut(a, a) = T::of(2.0) * c[4 + a] / (h[a] * h[a]);
    }
    for (k, (a, bb)) in [(0usize, 1usize), (0, 2), (1, 2)].into_iter().enumerate() {
        let v = c[7 + k] / (h[a] * h[bb]);
        *hess.at_mut(a, bb) = v;
        *hess.at_mut(bb, a) = v;
    }
    Ok(Quadratic {
        node: g.position(idx),
        gradient: [c[1] / h[0], c[2] / h[1], c[3] / h[2]],
        hessian: hess,
    })
}

/// Sub-grid position of the potential minimum nearest `guess`.
///
/// Walks downhill over the 26-neighbourhood to a grid minimum, then places
/// the stationary point of a local quadratic fit.
pub fn locate_minimum<T: Real>(pot: &TrapPotential<T>, guess: &[T; 3]) -> Result<[T; 3]> {
    let g = &pot.grid;
    let mut idx = g.nearest(guess).ok_or(Error::OutOfBounds(guess.map(|c| c.as_f64())))?;
    let max_steps = g.shape.iter().sum::<usize>();
    for _ in 0..max_steps {
        let mut best = idx;
        let mut best_v = g.get(idx[0], idx[1], idx[2]);
        for dz in -1isize..=1 {
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let n = [idx[0] as isize + dx, idx[1] as isize + dy, idx[2] as isize + dz];
                    if (0..3).any(|a| n[a] < 0 || n[a] >= g.shape[a] as isize) {
                        continue;
                    }
                    let n = [n[0] as usize, n[1] as usize, n[2] as usize];
                    let v = g.get(n[0], n[1], n[2]);
                    if v < best_v {
                        best = n;
                        best_v = v;
                    }
                }
            }
        }
        if best == idx {
            break;
        }
        idx = best;
    }
    if g.is_boundary(idx) {
        return Err(Error::NotATrap("potential keeps decreasing to the grid edge".into()));
    }
    let q = fit_quadratic(g, idx)?;
    let shift = q.hessian.solve(&q.gradient.map(|v| -v));
    let mut center = q.node;
    if let Ok(d) = shift {
        // keep the grid minimum as the nearest node
        if (0..3).all(|a| d[a].abs() <= g.spacing[a] * T::of(0.5)) {
            for a in 0..3 {
                center[a] = center[a] + d[a];
            }
        }
    }
    Ok(center)
}

/// Harmonic trap frequencies (Hz) at `center` for a particle of `mass` kg,
/// ordered by the axis each normal mode is mostly aligned with.
pub fn harmonic_frequencies<T: Real>(pot: &TrapPotential<T>, center: &[T; 3], mass: T) -> Result<[T; 3]> {
    if !(mass > T::zero()) {
        return Err(Error::InvalidParameter("mass must be positive".into()));
    }
    let g = &pot.grid;
    let idx = g.nearest(center).ok_or(Error::OutOfBounds(center.map(|c| c.as_f64())))?;
    let q = fit_quadratic(g, idx)?;
    let (vals, vecs) = q.hessian.symmetric_eigen();
    let mut out = [T::nan(); 3];
    let mut taken = [false; 3];
    let mut order: Vec<usize> = (0..3).collect();
    // assign the most axis-aligned modes first
    order.sort_by(|&i, &j| {
        let m = |c: usize| (0..3).fold(T::zero(), |m, a| m.max(vecs.at(a, c).abs()));
        m(j).partial_cmp(&m(i)).unwrap_or(std::cmp::Ordering::Equal)
    });
    for c in order {
        let k = vals[c];
        if !(k > T::zero()) {
            return Err(Error::NotATrap(format!("Hessian eigenvalue {:e} J/m² is not positive", k.as_f64())));
        }
        let axis = (0..3)
            .filter(|&a| !taken[a])
            .max_by(|&a, &b| vecs.at(a, c).abs().partial_cmp(&vecs.at(b, c).abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(0);
        taken[axis] = true;
        out[axis] = (k / mass).sqrt() / T::TAU();
    }
    Ok(out)
}

/// Summary of one trap site.
#[derive(Clone, Debug, PartialEq)]
pub struct TrapCharacterization<T> {
    pub center: [T; 3],
    /// Joules.
    pub depth: T,
    pub open: bool,
    /// (ν_x, ν_y, ν_z), hertz.
    pub frequencies: [T; 3],
}

impl<T: Real> TrapCharacterization<T> {
    pub fn depth_microkelvin(&self) -> f64 {
        CODATA.joules_to_microkelvin(self.depth.as_f64())
    }

    pub const CSV_HEADER: &'static str = "site_id,x,y,z,depth_uK,nu_x_kHz,nu_y_kHz,nu_z_kHz";

    pub fn csv_row(&self, site_id: usize) -> String {
        let c = self.center.map(|v| v.as_f64());
        let nu = self.frequencies.map(|v| v.as_f64() / 1e3);
        format!(
            "{site_id},{:.6e},{:.6e},{:.6e},{:.4},{:.4},{:.4},{:.4}",
            c[0],
            c[1],
            c[2],
            self.depth_microkelvin(),
            nu[0],
            nu[1],
            nu[2]
        )
    }
}

/// Center, depth and frequencies of the trap nearest `guess`.
pub fn characterize<T: Real>(pot: &TrapPotential<T>, guess: &[T; 3], mass: T) -> Result<TrapCharacterization<T>> {
    let center = locate_minimum(pot, guess)?;
    let depth = trap_depth(pot, &center)?;
    let frequencies = harmonic_frequencies(pot, &center, mass)?;
    Ok(TrapCharacterization { center, depth: depth.depth, open: depth.open, frequencies })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::Species;

    fn bowl(k: [f64; 3], r0: [f64; 3]) -> TrapPotential<f64> {
        let g = Grid3::from_fn([21, 21, 21], [0.1e-6, 0.1e-6, 0.25e-6], [-1e-6, -1e-6, -2.5e-6], |r: [f64; 3]| {
            (0..3).map(|a| 0.5 * k[a] * (r[a] - r0[a]).powi(2)).sum::<f64>()
        })
        .unwrap();
        TrapPotential::new(g, Species::RydbergPonderomotive).unwrap()
    }

    #[test]
    fn exact_quadratic_frequencies() {
        let m = CODATA.rb87_mass;
        let k = [8.0e-7, 1.2e-6, 2.0e-7];
        let p = bowl(k, [0.03e-6, -0.02e-6, 0.1e-6]);
        let c = locate_minimum(&p, &[0.0; 3]).unwrap();
        assert!((c[0] - 0.03e-6).abs() < 1e-12 && (c[2] - 0.1e-6).abs() < 1e-12);
        let nu = harmonic_frequencies(&p, &c, m).unwrap();
        for a in 0..3 {
            let exact = (k[a] / m).sqrt() / std::f64::consts::TAU;
            assert!((nu[a] / exact - 1.0).abs() < 1e-6, "{a}: {} vs {exact}", nu[a]);
        }
    }

    #[test]
    fn saddle_is_not_a_trap() {
        let g = Grid3::from_fn([11, 11, 11], [1.0; 3], [-5.0; 3], |r: [f64; 3]| 100.0 + r[0] * r[0] - r[1] * r[1] + r[2] * r[2])
            .unwrap();
        let p = TrapPotential::new(g, Species::RydbergPonderomotive).unwrap();
        assert!(matches!(harmonic_frequencies(&p, &[0.0; 3], 1.0), Err(Error::NotATrap(_))));
    }

    #[test]
    fn csv_row_layout() {
        let t = TrapCharacterization { center: [0.0, 1e-6, 0.0], depth: 1.380649e-27, open: false, frequencies: [15.8e3, 15.8e3, 7e3] };
        let row = t.csv_row(3);
        assert!(row.starts_with("3,"));
        assert_eq!(row.split(',').count(), TrapCharacterization::<f64>::CSV_HEADER.split(',').count());
        assert!(row.contains(",100.0000,15.8000,15.8000,7.0000"));
    }
}
