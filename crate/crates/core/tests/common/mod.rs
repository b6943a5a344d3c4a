//! Random instances shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;
use sparse_lsq_core::linalg::orthonormalize_columns;
use sparse_lsq_core::DenseMatrix;

pub fn gaussian<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    DenseMatrix::new(rows, cols, data).unwrap()
}

pub fn gaussian_vec<R: Rng>(len: usize, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// `k x n` with orthonormal rows.
pub fn orthonormal_rows<R: Rng>(k: usize, n: usize, rng: &mut R) -> DenseMatrix {
    orthonormalize_columns(&gaussian(n, k, rng)).unwrap().transpose()
}

/// `m x n` with the given singular values and random singular vectors.
pub fn with_spectrum<R: Rng>(m: usize, n: usize, spectrum: &[f64], rng: &mut R) -> DenseMatrix {
    let p = spectrum.len();
    let mut u = orthonormalize_columns(&gaussian(m, p, rng)).unwrap();
    let v = orthonormalize_columns(&gaussian(n, p, rng)).unwrap();
    for i in 0..m {
        for (j, s) in spectrum.iter().enumerate() {
            u[(i, j)] *= s;
        }
    }
    u.matmul(&v.transpose()).unwrap()
}

/// `m x n` with singular values `ratio^i` and a Gaussian right-hand side.
pub fn decaying<R: Rng>(m: usize, n: usize, ratio: f64, rng: &mut R) -> (DenseMatrix, Vec<f64>) {
    let spectrum: Vec<f64> = (0..m.min(n)).map(|i| ratio.powi(i as i32)).collect();
    let a = with_spectrum(m, n, &spectrum, rng);
    let b = gaussian_vec(m, rng);
    (a, b)
}
