//! Dense kernel: SVD, pseudo-inverse, rank-k truncation, norms and the two
//! dense least-squares baselines (minimum-norm and truncated-SVD).
//!
//! The SVD is a one-sided (Hestenes) Jacobi iteration. It is slow compared to
//! bidiagonalization-based methods but computes small singular values to high
//! relative accuracy, which matters when inequalities are checked to `1e-10`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::matrix::{DenseMatrix, Vector};

/// Default cap on Jacobi sweeps.
pub const DEFAULT_MAX_SWEEPS: usize = 80;

/// Relative rank tolerance used when the caller does not choose one:
/// `1e-12 * max(m, n)`. Singular values at or below
/// `tolerance * sigma_1` are dropped.
pub fn default_rank_tolerance(rows: usize, cols: usize) -> f64 {
    1e-12 * rows.max(cols) as f64
}

/// Thin SVD `A = U diag(sigma) V^T` keeping only the numerically nonzero
/// singular triples.
///
/// `sigma` is non-increasing. Equal singular values keep the order in which
/// the Jacobi iteration produced them (ascending original column index), so
/// truncation of a degenerate spectrum is reproducible.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SvdFactorization {
    u: DenseMatrix,
    sigma: Vec<f64>,
    v: DenseMatrix,
    rank_tolerance: f64,
}

impl SvdFactorization {
    /// `m x rho`, orthonormal columns.
    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    /// `n x rho`, orthonormal columns.
    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn numerical_rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tolerance
    }

    /// Rows of the factored matrix.
    pub fn rows(&self) -> usize {
        self.u.rows()
    }

    /// Columns of the factored matrix.
    pub fn cols(&self) -> usize {
        self.v.rows()
    }

    /// Largest singular value, zero for a zero matrix.
    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// `U diag(sigma) V^T`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (j, s) in self.sigma.iter().enumerate() {
                us[(i, j)] *= s;
            }
        }
        us.matmul(&self.v.transpose()).expect("factor shapes agree")
    }

    /// Leading `count` triples without the `count < rank` restriction of
    /// [`truncate`].
    pub(crate) fn leading(&self, count: usize) -> Self {
        let count = count.min(self.sigma.len());
        Self {
            u: self.u.leading_columns(count),
            sigma: self.sigma[..count].to_vec(),
            v: self.v.leading_columns(count),
            rank_tolerance: self.rank_tolerance,
        }
    }
}

/// Options for [`svd_with`].
#[derive(Clone, Copy, Debug)]
pub struct SvdOptions {
    /// Relative tolerance; `None` selects [`default_rank_tolerance`].
    pub rank_tolerance: Option<f64>,
    pub max_sweeps: usize,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self { rank_tolerance: None, max_sweeps: DEFAULT_MAX_SWEEPS }
    }
}

/// SVD with an explicit relative rank tolerance.
pub fn svd(a: &DenseMatrix, rank_tolerance: f64) -> Result<SvdFactorization> {
    svd_with(a, &SvdOptions { rank_tolerance: Some(rank_tolerance), ..SvdOptions::default() })
}

/// SVD with the default rank tolerance.
pub fn svd_default(a: &DenseMatrix) -> Result<SvdFactorization> {
    svd_with(a, &SvdOptions::default())
}

pub fn svd_with(a: &DenseMatrix, opts: &SvdOptions) -> Result<SvdFactorization> {
    if !a.is_finite() {
        return Err(Error::NonFinite { what: "matrix" });
    }
    let tol = opts.rank_tolerance.unwrap_or_else(|| default_rank_tolerance(a.rows(), a.cols()));
    if !(tol >= 0.0) || !tol.is_finite() {
        return Err(Error::InvalidParameter { name: "rank_tolerance", reason: "must be a finite nonnegative number" });
    }
    // Jacobi works on the columns of a tall matrix; factor A^T for wide input.
    let wide = a.rows() < a.cols();
    let work = if wide { a.transpose() } else { a.clone() };
    let (left, sigma, right) = one_sided_jacobi(&work, opts.max_sweeps, tol)?;
    let (u, v) = if wide { (right, left) } else { (left, right) };
    Ok(SvdFactorization { u, sigma, v, rank_tolerance: tol })
}

/// One-sided Jacobi on a tall `m x n` matrix (`m >= n`). Returns the retained
/// left vectors, singular values and right vectors.
fn one_sided_jacobi(a: &DenseMatrix, max_sweeps: usize, tol: f64) -> Result<(DenseMatrix, Vec<f64>, DenseMatrix)> {
    let (m, n) = a.shape();
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let threshold = f64::EPSILON * (m.max(1) as f64);

    let mut converged = n < 2;
    let mut sweeps = 0;
    while !converged {
        if sweeps == max_sweeps {
            return Err(Error::IterationFailure { sweeps });
        }
        sweeps += 1;
        converged = true;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = math::dot(&w[p], &w[p]);
                let beta = math::dot(&w[q], &w[q]);
                let gamma = math::dot(&w[p], &w[q]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if gamma.abs() <= threshold * math::sqrt(alpha) * math::sqrt(beta) {
                    continue;
                }
                converged = false;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + math::hypot(1.0, zeta));
                let c = 1.0 / math::hypot(1.0, t);
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
    }

    let norms: Vec<f64> = w.iter().map(|c| math::norm2(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable: equal values keep ascending column order.
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).expect("finite norms"));
    let sigma_max = order.first().map_or(0.0, |&i| norms[i]);
    let cutoff = tol * sigma_max;
    let kept: Vec<usize> = order.into_iter().filter(|&i| norms[i] > cutoff && norms[i] > 0.0).collect();

    let rho = kept.len();
    let mut u = DenseMatrix::zeros(m, rho);
    let mut vv = DenseMatrix::zeros(n, rho);
    let mut sigma = Vec::with_capacity(rho);
    for (c, &j) in kept.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        for i in 0..m {
            u[(i, c)] = w[j][i] / s;
        }
        for i in 0..n {
            vv[(i, c)] = v[j][i];
        }
    }
    Ok((u, sigma, vv))
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(q);
    let (cp, cq) = (&mut head[p], &mut tail[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// `V diag(1/sigma) U^T b`, the minimum-norm least-squares solution of the
/// factored system.
pub fn pseudo_inverse_apply(f: &SvdFactorization, b: &[f64]) -> Result<Vector> {
    if b.len() != f.rows() {
        return Err(Error::DimensionMismatch {
            op: "pseudo_inverse_apply",
            expected: (f.rows(), 1),
            found: (b.len(), 1),
        });
    }
    let mut y = f.u.tr_matvec(b)?;
    for (yi, s) in y.iter_mut().zip(&f.sigma) {
        *yi /= s;
    }
    if y.is_empty() {
        return Ok(Vector::zeros(f.cols()));
    }
    Ok(Vector::from_computed(f.v.matvec(&y)?))
}

/// Factorization of `A_k`, the first `k` singular triples.
pub fn truncate(f: &SvdFactorization, k: usize) -> Result<SvdFactorization> {
    if k == 0 || k >= f.numerical_rank() {
        return Err(Error::RankOutOfRange { k, rank: f.numerical_rank() });
    }
    Ok(f.leading(k))
}

/// Truncated-SVD regularized solution `x_k* = V_k Sigma_k^{-1} U_k^T b`.
pub fn truncated_solution(f: &SvdFactorization, k: usize, b: &[f64]) -> Result<Vector> {
    pseudo_inverse_apply(&truncate(f, k)?, b)
}

pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    math::sqrt(a.frobenius_norm_sq())
}

/// `sigma_1(A)`.
pub fn spectral_norm(a: &DenseMatrix) -> Result<f64> {
    Ok(svd(a, 0.0)?.sigma_max())
}

/// `||A x - b||_2`.
pub fn residual_norm(a: &DenseMatrix, x: &[f64], b: &[f64]) -> Result<f64> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch { op: "residual_norm", expected: (a.rows(), 1), found: (b.len(), 1) });
    }
    let ax = a.matvec(x)?;
    Ok(math::sqrt(ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()))
}

/// Moore-Penrose pseudo-inverse as an explicit `n x m` matrix.
pub fn pinv(a: &DenseMatrix) -> Result<DenseMatrix> {
    pinv_of(&svd_default(a)?)
}

pub(crate) fn pinv_of(f: &SvdFactorization) -> Result<DenseMatrix> {
    let mut vs = f.v.clone();
    for i in 0..vs.rows() {
        for (j, s) in f.sigma.iter().enumerate() {
            vs[(i, j)] /= s;
        }
    }
    if f.sigma.is_empty() {
        return Ok(DenseMatrix::zeros(f.cols(), f.rows()));
    }
    vs.matmul(&f.u.transpose())
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn lstsq(a: &DenseMatrix, b: &[f64]) -> Result<Vector> {
    pseudo_inverse_apply(&svd_default(a)?, b)
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues are returned in ascending order; column `i` of the second
/// value is the matching unit eigenvector.
pub fn symmetric_eigen(b: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = b.rows();
    if b.cols() != n {
        return Err(Error::DimensionMismatch { op: "symmetric_eigen", expected: (n, n), found: b.shape() });
    }
    if !b.is_finite() {
        return Err(Error::NonFinite { what: "matrix" });
    }
    let mut a = b.clone();
    let mut q = DenseMatrix::identity(n);
    let scale = math::sqrt(a.frobenius_norm_sq());
    let mut sweeps = 0;
    loop {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if math::sqrt(off) <= f64::EPSILON * scale || n < 2 {
            break;
        }
        if sweeps == DEFAULT_MAX_SWEEPS {
            return Err(Error::IterationFailure { sweeps });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for r in p + 1..n {
                let apr = a[(p, r)];
                if apr == 0.0 {
                    continue;
                }
                let theta = (a[(r, r)] - a[(p, p)]) / (2.0 * apr);
                let t = theta.signum() / (theta.abs() + math::hypot(1.0, theta));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / math::hypot(1.0, t);
                let s = t * c;
                for l in 0..n {
                    let (alp, alr) = (a[(l, p)], a[(l, r)]);
                    a[(l, p)] = c * alp - s * alr;
                    a[(l, r)] = s * alp + c * alr;
                }
                for l in 0..n {
                    let (apl, arl) = (a[(p, l)], a[(r, l)]);
                    a[(p, l)] = c * apl - s * arl;
                    a[(r, l)] = s * apl + c * arl;
                }
                for l in 0..n {
                    let (qlp, qlr) = (q[(l, p)], q[(l, r)]);
                    q[(l, p)] = c * qlp - s * qlr;
                    q[(l, r)] = s * qlp + c * qlr;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    Ok((values, q.select_columns(&order)))
}

/// Orthonormal basis for the column space of a full-column-rank matrix, by
/// modified Gram-Schmidt with one reorthogonalization pass. The implied
/// triangular factor has a positive diagonal, so Gaussian input yields a
/// Haar-distributed result.
pub fn orthonormalize_columns(a: &DenseMatrix) -> Result<DenseMatrix> {
    let (m, n) = a.shape();
    if n > m {
        return Err(Error::InvalidParameter {
            name: "matrix",
            reason: "more columns than rows cannot be orthonormalized",
        });
    }
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    for j in 0..n {
        let original = math::norm2(&cols[j]);
        for _pass in 0..2 {
            for i in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let proj = math::dot(&done[i], &rest[0]);
                for (x, y) in rest[0].iter_mut().zip(&done[i]) {
                    *x -= proj * y;
                }
            }
        }
        let norm = math::norm2(&cols[j]);
        if norm <= 1e-12 * original.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidParameter { name: "matrix", reason: "columns are linearly dependent" });
        }
        for x in cols[j].iter_mut() {
            *x /= norm;
        }
    }
    DenseMatrix::from_columns(m, &cols)
}

/// The SVD block structure of `A` at rank `k`: `U_k`, `Sigma_k`, `V_k` and
/// the residual `E = A - A_k = A - A V_k V_k^T`.
///
/// `k` may equal the numerical rank (then `E` is zero up to rounding); the
/// solvers additionally require `k < rank`.
#[derive(Clone, Debug)]
pub struct RankSplit {
    a: DenseMatrix,
    factor: SvdFactorization,
    k: usize,
    head: SvdFactorization,
    v_k_t: DenseMatrix,
    residual: DenseMatrix,
}

impl RankSplit {
    pub fn new(a: &DenseMatrix, k: usize) -> Result<Self> {
        Self::from_factor(a, svd_default(a)?, k)
    }

    pub fn from_factor(a: &DenseMatrix, factor: SvdFactorization, k: usize) -> Result<Self> {
        if factor.rows() != a.rows() || factor.cols() != a.cols() {
            return Err(Error::DimensionMismatch {
                op: "RankSplit::from_factor",
                expected: a.shape(),
                found: (factor.rows(), factor.cols()),
            });
        }
        let rank = factor.numerical_rank();
        if k == 0 || k > rank {
            return Err(Error::RankOutOfRange { k, rank });
        }
        let head = factor.leading(k);
        let v_k = head.v().clone();
        let projected = a.matmul(&v_k)?.matmul(&v_k.transpose())?;
        let residual = a.sub(&projected)?;
        Ok(Self { a: a.clone(), factor, k, head, v_k_t: v_k.transpose(), residual })
    }

    /// Errors unless `k < rank(A)`.
    pub fn require_proper(&self) -> Result<()> {
        let rank = self.factor.numerical_rank();
        if self.k >= rank {
            return Err(Error::RankOutOfRange { k: self.k, rank });
        }
        Ok(())
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn factor(&self) -> &SvdFactorization {
        &self.factor
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Factorization of `A_k`.
    pub fn head(&self) -> &SvdFactorization {
        &self.head
    }

    /// `V_k^T`, `k x n` with orthonormal rows.
    pub fn v_k_t(&self) -> &DenseMatrix {
        &self.v_k_t
    }

    /// `E = A - A_k`.
    pub fn residual(&self) -> &DenseMatrix {
        &self.residual
    }

    pub fn residual_fnorm(&self) -> f64 {
        frobenius_norm(&self.residual)
    }

    /// `sigma_k(A)`.
    pub fn sigma_k(&self) -> f64 {
        self.head.sigma()[self.k - 1]
    }

    /// `x_k* = V_k Sigma_k^{-1} U_k^T b`.
    pub fn truncated_solution(&self, b: &[f64]) -> Result<Vector> {
        pseudo_inverse_apply(&self.head, b)
    }

    /// `Sigma_k^{-1} U_k^T b`.
    pub fn whitened_projection(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.head.u().tr_matvec(b)?;
        for (yi, s) in y.iter_mut().zip(self.head.sigma()) {
            *yi /= s;
        }
        Ok(y)
    }
}
