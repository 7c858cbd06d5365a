//! Small dense matrices (least-squares normal equations, Hessians, rate
//! matrices). Storage follows the crate scalar; the decompositions run in
//! `f64` through nalgebra.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.n + j]
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.at(i, j) * v[j]).sum())
            .collect()
    }

    fn to_na(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.at(i, j).as_f64())
    }

    fn from_na(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = T::of(m[(i, j)]);
            }
        }
        out
    }

    pub fn expm(&self) -> Self {
        Self::from_na(&self.to_na().exp())
    }

    /// Solves `self · x = b` by LU decomposition.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let a = self.to_na();
        let scale = a.amax();
        let lu = a.lu();
        let u = lu.u();
        let smallest = u.diagonal().iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
        if !(smallest > scale * f64::EPSILON * 1e-3) {
            return Err(Error::InvalidModel("singular matrix".into()));
        }
        let rhs = nalgebra::DVector::from_iterator(b.len(), b.iter().map(|v| v.as_f64()));
        let x = lu.solve(&rhs).ok_or_else(|| Error::InvalidModel("singular matrix".into()))?;
        Ok(x.iter().map(|&v| T::of(v)).collect())
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut out = Self::zeros(n);
        for j in 0..n {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            let col = self.solve(&e)?;
            for i in 0..n {
                out.data[i * n + j] = col[i];
            }
        }
        Ok(out)
    }

    /// Eigenvalues and eigenvectors (as columns) of a symmetric matrix.
    pub fn symmetric_eigen(&self) -> (Vec<T>, Self) {
        let e = self.to_na().symmetric_eigen();
        (e.eigenvalues.iter().map(|&v| T::of(v)).collect(), Self::from_na(&e.eigenvectors))
    }
}

/// Linear least squares `min ‖A x − b‖²`; `rows` holds one design row per
/// observation.
pub fn least_squares<T: Real>(rows: &[Vec<T>], b: &[T]) -> Result<Vec<T>> {
    let p = rows.first().map_or(0, |r| r.len());
    if p == 0 || rows.len() < p {
        return Err(Error::InvalidModel("underdetermined least-squares problem".into()));
    }
    let a = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j].as_f64());
    let rhs = nalgebra::DVector::from_iterator(b.len(), b.iter().map(|v| v.as_f64()));
    let svd = a.svd(true, true);
    let tol = svd.singular_values.max() * f64::EPSILON * (rows.len().max(p) as f64);
    if svd.singular_values.min() <= tol {
        return Err(Error::InvalidModel("rank-deficient least-squares problem".into()));
    }
    let x = svd.solve(&rhs, tol).map_err(|e| Error::InvalidModel(e.to_string()))?;
    Ok(x.iter().map(|&v| T::of(v)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn solve_recovers_known_vector() {
        let m = Matrix { n: 3, data: vec![4.0, 1.0, 0.5, 1.0, 3.0, -1.0, 0.5, -1.0, 2.0] };
        let x = [1.0, -2.0, 0.25];
        let b = m.matvec(&x);
        let got = m.solve(&b).unwrap();
        for (g, e) in got.iter().zip(x) {
            assert_relative_eq!(*g, e, epsilon = 1e-13);
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = Matrix { n: 2, data: vec![1.0, 2.0, 2.0, 4.0] };
        assert!(m.solve(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn expm_of_diagonal_matrix() {
        let mut m = Matrix::<f64>::zeros(2);
        *m.at_mut(0, 0) = -3.0;
        *m.at_mut(1, 1) = 40.0;
        let e = m.expm();
        assert_relative_eq!(e.at(0, 0), (-3.0f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(e.at(1, 1), 40.0f64.exp(), max_relative = 1e-11);
        assert_eq!(e.at(0, 1), 0.0);
    }

    #[test]
    fn expm_of_rotation_generator() {
        let m = Matrix { n: 2, data: vec![0.0, -1.3, 1.3, 0.0] };
        let e = m.expm();
        assert_relative_eq!(e.at(0, 0), 1.3f64.cos(), epsilon = 1e-14);
        assert_relative_eq!(e.at(1, 0), 1.3f64.sin(), epsilon = 1e-14);
    }

    #[test]
    fn jacobi_eigenvalues_of_symmetric_matrix() {
        let m = Matrix { n: 3, data: vec![2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 5.0] };
        let (mut vals, vecs) = m.symmetric_eigen();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(vals[0], 1.0, epsilon = 1e-13);
        assert_relative_eq!(vals[1], 3.0, epsilon = 1e-13);
        assert_relative_eq!(vals[2], 5.0, epsilon = 1e-13);
        // columns are orthonormal
        let vt_v: f64 = (0..3).map(|k| vecs.at(k, 0) * vecs.at(k, 1)).sum();
        assert!(vt_v.abs() < 1e-13);
    }

    #[test]
    fn least_squares_fits_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x]).collect();
        let b: Vec<f64> = xs.iter().map(|&x| 0.5 + 2.0 * x).collect();
        let p = least_squares(&rows, &b).unwrap();
        assert_relative_eq!(p[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(p[1], 2.0, epsilon = 1e-12);
    }
}
