//! Small dense linear algebra: orthogonal matrices, Gram-Schmidt and a
//! cyclic Jacobi eigensolver for symmetric matrices.
//!
//! Problem dimensions here are desk-scale (D <= a few hundred), so the
//! routines favour clarity and determinism over asymptotics.

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, RunRng};
use rand_distr::{Distribution, StandardNormal};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        SquareMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid_argument("matrix rows must be square"));
        }
        Ok(SquareMatrix {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.dim + col] = value;
    }

    /// y = M x
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "dimension mismatch");
        let mut y = vec![0.0; self.dim];
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        y
    }

    /// y = M^T x
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "dimension mismatch");
        let mut y = vec![0.0; self.dim];
        for (j, &xj) in x.iter().enumerate() {
            let row = &self.data[j * self.dim..(j + 1) * self.dim];
            for (yi, &m) in y.iter_mut().zip(row) {
                *yi += m * xj;
            }
        }
        y
    }

    /// max |(M^T M - I)_{ij}|
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut dot = 0.0;
                for k in 0..n {
                    dot += self.get(k, i) * self.get(k, j);
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// Determinant by LU decomposition with partial pivoting.
    pub fn determinant(&self) -> f64 {
        let n = self.dim;
        let mut lu = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let mut pivot = col;
            for row in col + 1..n {
                if lu[row * n + col].abs() > lu[pivot * n + col].abs() {
                    pivot = row;
                }
            }
            if lu[pivot * n + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for k in 0..n {
                    lu.swap(col * n + k, pivot * n + k);
                }
                det = -det;
            }
            let diag = lu[col * n + col];
            det *= diag;
            for row in col + 1..n {
                let factor = lu[row * n + col] / diag;
                for k in col..n {
                    lu[row * n + k] -= factor * lu[col * n + k];
                }
            }
        }
        det
    }
}

/// A square matrix with orthonormal columns.
///
/// Rotations of benchmark landscapes and eigenbases for crossover both use
/// this type; construction verifies M^T M = I.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalMatrix(SquareMatrix);

pub const ORTHOGONALITY_TOL: f64 = 1e-10;

impl OrthogonalMatrix {
    /// Wraps a matrix after checking the orthonormality invariant.
    pub fn new(m: SquareMatrix) -> Result<Self> {
        let defect = m.orthogonality_defect();
        if defect > ORTHOGONALITY_TOL {
            return Err(Error::invalid_argument(format!(
                "matrix is not orthogonal (defect {defect:.3e})"
            )));
        }
        Ok(OrthogonalMatrix(m))
    }

    pub fn identity(dim: usize) -> Self {
        OrthogonalMatrix(SquareMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// M x
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.0.mul_vec(x)
    }

    /// M^T x (the inverse rotation)
    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        self.0.tr_mul_vec(x)
    }

    pub fn as_matrix(&self) -> &SquareMatrix {
        &self.0
    }
}

/// Deterministic random rotation for a (dimension, seed) pair.
///
/// Orthonormalizes a matrix of i.i.d. standard normal entries; with the
/// positive-diagonal convention of Gram-Schmidt this samples uniformly
/// from the orthogonal group.
pub fn make_rotation(dimension: usize, seed: u64) -> Result<OrthogonalMatrix> {
    if dimension == 0 {
        return Err(Error::invalid_argument("rotation dimension must be >= 1"));
    }
    let mut rng = rng_from_seed(seed);
    loop {
        let cols: Vec<Vec<f64>> = (0..dimension)
            .map(|_| {
                (0..dimension)
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect()
            })
            .collect();
        if let Some(q) = orthonormalize_columns(&cols) {
            let mut m = SquareMatrix::zeros(dimension);
            for (j, col) in q.iter().enumerate() {
                for (i, &v) in col.iter().enumerate() {
                    m.set(i, j, v);
                }
            }
            // A degenerate draw (probability ~0) falls through and redraws.
            if let Ok(rot) = OrthogonalMatrix::new(m) {
                return Ok(rot);
            }
        }
    }
}

/// Modified Gram-Schmidt with a re-orthogonalization pass.
///
/// Returns `None` if some column is (numerically) linearly dependent on
/// its predecessors.
pub fn orthonormalize_columns(cols: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for col in cols {
        let mut v = col.clone();
        for _ in 0..2 {
            for prev in &q {
                let dot: f64 = v.iter().zip(prev).map(|(a, b)| a * b).sum();
                for (vi, pi) in v.iter_mut().zip(prev) {
                    *vi -= dot * pi;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let original: f64 = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-12 * original.max(1.0) {
            return None;
        }
        for vi in v.iter_mut() {
            *vi /= norm;
        }
        q.push(v);
    }
    Some(q)
}

/// Uniform random unit vector orthogonal to `against`, for slice bases.
pub fn random_orthogonal_unit(against: &[f64], rng: &mut RunRng) -> Vec<f64> {
    let d = against.len();
    assert!(d >= 2, "need at least two dimensions");
    loop {
        let candidate: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        if let Some(q) = orthonormalize_columns(&[against.to_vec(), candidate]) {
            return q[1].clone();
        }
        // collinear draw: resample
    }
}

/// Eigenvalues and eigenvectors of a symmetric matrix by cyclic Jacobi
/// rotations, sorted by descending eigenvalue. Eigenvectors are the
/// columns of the returned matrix.
///
/// Sweeps run until the off-diagonal Frobenius norm drops below 1e-10
/// (or a maximum sweep count is hit, which for symmetric input it is not
/// in practice: convergence is quadratic).
pub fn jacobi_eigen_symmetric(a: &SquareMatrix) -> (Vec<f64>, SquareMatrix) {
    const OFF_DIAG_TOL: f64 = 1e-10;
    const MAX_SWEEPS: usize = 64;

    let n = a.dim();
    let mut a = a.clone();
    let mut v = SquareMatrix::identity(n);

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a.get(i, j) * a.get(i, j);
                }
            }
        }
        if off.sqrt() < OFF_DIAG_TOL {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let eigenvalues: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    order.sort_by(|&i, &j| eigenvalues[j].partial_cmp(&eigenvalues[i]).unwrap());

    let sorted_values: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
    let mut sorted_vectors = SquareMatrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            sorted_vectors.set(row, new_col, v.get(row, old_col));
        }
    }
    (sorted_values, sorted_vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_is_orthogonal() {
        let m = make_rotation(5, 42).unwrap();
        assert!(m.as_matrix().orthogonality_defect() < 1e-10);
        assert!((m.as_matrix().determinant().abs() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rotation_is_deterministic() {
        let a = make_rotation(7, 99).unwrap();
        let b = make_rotation(7, 99).unwrap();
        assert_eq!(a.as_matrix(), b.as_matrix());
    }

    #[test]
    fn rotation_1d_is_sign() {
        for seed in 0..8 {
            let m = make_rotation(1, seed).unwrap();
            let v = m.as_matrix().get(0, 0);
            assert!((v.abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_dim_zero_rejected() {
        assert!(make_rotation(0, 1).is_err());
    }

    #[test]
    fn tr_mul_inverts_mul() {
        let m = make_rotation(6, 3).unwrap();
        let x = vec![1.0, -2.0, 0.5, 3.0, -1.5, 0.25];
        let y = m.apply(&x);
        let back = m.apply_transpose(&y);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // A = Q diag(5, 2, 1) Q^T for a fixed rotation Q.
        let q = make_rotation(3, 17).unwrap();
        let eig = [5.0, 2.0, 1.0];
        let mut a = SquareMatrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for (k, &lambda) in eig.iter().enumerate() {
                    s += q.as_matrix().get(i, k) * lambda * q.as_matrix().get(j, k);
                }
                a.set(i, j, s);
            }
        }
        let (values, vectors) = jacobi_eigen_symmetric(&a);
        for (got, want) in values.iter().zip(&eig) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        assert!(vectors.orthogonality_defect() < 1e-8);
        // A v = lambda v for each column.
        for col in 0..3 {
            let v: Vec<f64> = (0..3).map(|r| vectors.get(r, col)).collect();
            let av = a.mul_vec(&v);
            for i in 0..3 {
                assert!((av[i] - values[col] * v[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn jacobi_handles_zero_matrix() {
        let (values, vectors) = jacobi_eigen_symmetric(&SquareMatrix::zeros(4));
        assert!(values.iter().all(|&v| v == 0.0));
        assert_eq!(vectors, SquareMatrix::identity(4));
    }

    #[test]
    fn orthogonal_unit_vector_is_orthogonal() {
        let mut rng = rng_from_seed(5);
        let against = vec![1.0, 1.0, 0.0, -2.0];
        let v = random_orthogonal_unit(&against, &mut rng);
        let dot: f64 = v.iter().zip(&against).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-10);
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}
