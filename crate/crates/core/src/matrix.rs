use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Deref, Index, IndexMut};

use crate::error::{Error, Result};
use crate::math;

/// Real dense matrix stored in row-major order.
///
/// Values constructed through [`DenseMatrix::new`] or [`DenseMatrix::from_rows`]
/// are checked to be finite and non-empty. Internal factors (for instance the
/// `U` of a rank-zero factorization) may have a zero dimension.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyDimension { what: "matrix" });
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                op: "DenseMatrix::new",
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "matrix" });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    op: "DenseMatrix::from_rows",
                    expected: (1, cols),
                    found: (1, row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    /// Builds a matrix from its columns. All columns must share one length.
    pub fn from_columns<C: AsRef<[f64]>>(rows: usize, columns: &[C]) -> Result<Self> {
        let cols = columns.len();
        let mut out = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != rows {
                return Err(Error::DimensionMismatch {
                    op: "DenseMatrix::from_columns",
                    expected: (rows, 1),
                    found: (c.len(), 1),
                });
            }
            for (i, &x) in c.iter().enumerate() {
                out[(i, j)] = x;
            }
        }
        if out.data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "matrix" });
        }
        Ok(out)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Square diagonal matrix.
    pub fn from_diag(diag: &[f64]) -> Self {
        Self::rect_diag(diag.len(), diag.len(), diag)
    }

    /// `rows x cols` matrix with `diag` on its main diagonal.
    pub fn rect_diag(rows: usize, cols: usize, diag: &[f64]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, &d) in diag.iter().enumerate().take(rows.min(cols)) {
            m[(i, i)] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch { op: "matmul", expected: (self.cols, rhs.cols), found: rhs.shape() });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (l, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(l)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { op: "matvec", expected: (self.cols, 1), found: (x.len(), 1) });
        }
        Ok((0..self.rows).map(|i| math::dot(self.row(i), x)).collect())
    }

    /// `self^T * y`.
    pub fn tr_matvec(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::DimensionMismatch { op: "tr_matvec", expected: (self.rows, 1), found: (y.len(), 1) });
        }
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        Ok(out)
    }

    fn zip_with(&self, rhs: &Self, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch { op, expected: self.shape(), found: rhs.shape() });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    /// Columns `indices` of `self`, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, indices.len());
        for i in 0..self.rows {
            let row = self.row(i);
            for (c, &j) in indices.iter().enumerate() {
                out[(i, c)] = row[j];
            }
        }
        out
    }

    /// The first `count` columns.
    pub fn leading_columns(&self, count: usize) -> Self {
        let idx: Vec<usize> = (0..count).collect();
        self.select_columns(&idx)
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// Squared Euclidean norm of every column.
    pub fn column_norms_sq(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (o, &x) in out.iter_mut().zip(self.row(i)) {
                *o += x * x;
            }
        }
        out
    }

    /// Largest absolute entry of `self^T self - I` (or `self self^T - I` when
    /// `rows_orthonormal`).
    pub fn orthonormality_defect(&self, rows_orthonormal: bool) -> f64 {
        let gram = if rows_orthonormal { self.matmul(&self.transpose()) } else { self.transpose().matmul(self) }
            .expect("gram shapes always agree");
        let mut worst = 0.0_f64;
        for i in 0..gram.rows {
            for j in 0..gram.cols {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> Result<f64> {
        Ok(self.sub(rhs)?.data.iter().fold(0.0_f64, |m, x| m.max(x.abs())))
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Finite real vector.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyDimension { what: "vector" });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "vector" });
        }
        Ok(Self(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        math::norm2(&self.0)
    }

    // Vectors produced by finite arithmetic on finite inputs.
    pub(crate) fn from_computed(entries: Vec<f64>) -> Self {
        Self(entries)
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(DenseMatrix::new(0, 2, vec![]), Err(Error::EmptyDimension { .. })));
        assert!(matches!(DenseMatrix::new(2, 2, vec![1.0; 3]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(DenseMatrix::new(1, 2, vec![1.0, f64::NAN]), Err(Error::NonFinite { .. })));
        assert!(matches!(Vector::new(vec![f64::INFINITY]), Err(Error::NonFinite { .. })));
        assert!(DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn products_and_transpose() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c, DenseMatrix::from_rows(&[[4.0, 5.0], [10.0, 11.0]]).unwrap());
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]).unwrap(), vec![6.0, 15.0]);
        assert_eq!(a.tr_matvec(&[1.0, 1.0]).unwrap(), vec![5.0, 7.0, 9.0]);
        assert_eq!(a.transpose().transpose(), a);
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn column_helpers() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(a.select_columns(&[2, 0]), DenseMatrix::from_rows(&[[3.0, 1.0], [6.0, 4.0]]).unwrap());
        assert_eq!(a.column_norms_sq(), vec![17.0, 29.0, 45.0]);
        assert_eq!(a.frobenius_norm_sq(), 91.0);
        let from_cols = DenseMatrix::from_columns(2, &[a.column(0), a.column(1), a.column(2)]).unwrap();
        assert_eq!(from_cols, a);
    }
}
