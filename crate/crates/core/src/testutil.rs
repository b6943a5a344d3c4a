// Random test matrices.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::orthonormalize_columns;
use crate::matrix::DenseMatrix;

pub(crate) fn gaussian<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    DenseMatrix::new(rows, cols, data).unwrap()
}

/// `k x n` with orthonormal rows.
pub(crate) fn random_orthonormal_rows<R: Rng>(k: usize, n: usize, rng: &mut R) -> DenseMatrix {
    orthonormalize_columns(&gaussian(n, k, rng)).unwrap().transpose()
}

/// `m x n` with singular values `spectrum` and random singular vectors.
pub(crate) fn with_spectrum<R: Rng>(m: usize, n: usize, spectrum: &[f64], rng: &mut R) -> DenseMatrix {
    let p = spectrum.len();
    let u = orthonormalize_columns(&gaussian(m, p, rng)).unwrap();
    let v = orthonormalize_columns(&gaussian(n, p, rng)).unwrap();
    let mut us = u;
    for i in 0..m {
        for (j, s) in spectrum.iter().enumerate() {
            us[(i, j)] *= s;
        }
    }
    us.matmul(&v.transpose()).unwrap()
}
