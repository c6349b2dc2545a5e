//! Dense row-major matrix of `f64` entries.
//!
//! This is deliberately small: the toolkit only needs products, transposes,
//! column access, and a handful of norms. All accumulation is in double
//! precision and every operation is sequential and deterministic, so repeated
//! runs over identical input produce bitwise-identical results.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>, // row-major
}

impl DenseMatrix {
    /// Build from row-major entries. Fails if the length does not match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                context: "entry count does not match rows x cols",
                left_rows: rows,
                left_cols: cols,
                right_rows: data.len(),
                right_cols: 1,
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Build a `dim x n` matrix whose columns are the given vectors.
    pub fn from_columns<'a, I>(dim: usize, columns: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let cols: Vec<&[f64]> = columns.into_iter().collect();
        let n = cols.len();
        let mut m = Self::zeros(dim, n);
        for (j, col) in cols.iter().enumerate() {
            if col.len() != dim {
                return Err(Error::ShapeMismatch {
                    context: "column length does not match dimension",
                    left_rows: dim,
                    left_cols: n,
                    right_rows: col.len(),
                    right_cols: 1,
                });
            }
            for (i, &v) in col.iter().enumerate() {
                m.data[i * n + j] = v;
            }
        }
        Ok(m)
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
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// `self * other`
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                context: "inner dimensions of product differ",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        // ikj order: both inner accesses are contiguous.
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * other^T`, computed as row-by-row dot products.
    ///
    /// This is the shape of the Gram product the mapping solver needs, where
    /// both operands are `d x n` with n possibly very large.
    pub fn mul_transpose(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.cols {
            return Err(Error::ShapeMismatch {
                context: "row lengths of A*B^T differ",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let mut out = Self::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..other.rows {
                let b = other.row(j);
                let mut acc = 0.0;
                for (x, y) in a.iter().zip(b) {
                    acc += x * y;
                }
                out.data[i * other.rows + j] = acc;
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest entrywise absolute difference; shapes must already match.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Max-norm of `self^T * self - I`; zero for a perfectly orthogonal matrix.
    pub fn orthogonality_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.cols {
            for j in i..self.cols {
                let mut acc = 0.0;
                for r in 0..self.rows {
                    acc += self.get(r, i) * self.get(r, j);
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - target).abs());
            }
        }
        worst
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        (0..self.rows)
            .map(|i| {
                let v = self.get(i, j);
                v * v
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Scale every column to unit Euclidean length.
    pub fn normalize_columns(&self) -> Result<DenseMatrix> {
        let mut out = self.clone();
        for j in 0..self.cols {
            let norm = self.column_norm(j);
            if norm == 0.0 {
                return Err(Error::ZeroNormColumn { index: j });
            }
            for i in 0..self.rows {
                out.set(i, j, self.get(i, j) / norm);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_hand_case() {
        let a = DenseMatrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let b = DenseMatrix::from_vec(3, 2, vec![7.0, 8.0, 9.0, 10.0, 11.0, 12.0]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.data(), &[58.0, 64.0, 139.0, 154.0]);
    }

    #[test]
    fn mul_transpose_matches_explicit_transpose() {
        let a = DenseMatrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let b = DenseMatrix::from_vec(2, 3, vec![0.5, -1.0, 2.0, 1.5, 0.0, -2.0]).unwrap();
        let direct = a.mul_transpose(&b).unwrap();
        let via_t = a.matmul(&b.transpose()).unwrap();
        assert_eq!(direct.data(), via_t.data());
    }

    #[test]
    fn from_columns_lays_out_vectors() {
        let c0 = [1.0, 2.0];
        let c1 = [3.0, 4.0];
        let m = DenseMatrix::from_columns(2, [&c0[..], &c1[..]]).unwrap();
        assert_eq!(m.column(0), vec![1.0, 2.0]);
        assert_eq!(m.column(1), vec![3.0, 4.0]);
        assert_eq!(m.row(0), &[1.0, 3.0]);
    }

    #[test]
    fn shape_errors() {
        assert!(DenseMatrix::from_vec(2, 2, vec![1.0]).is_err());
        let a = DenseMatrix::zeros(2, 3);
        let b = DenseMatrix::zeros(2, 3);
        assert!(a.matmul(&b).is_err());
    }

    #[test]
    fn orthogonality_residual_of_identity_is_zero() {
        assert_eq!(DenseMatrix::identity(4).orthogonality_residual(), 0.0);
    }

    #[test]
    fn normalize_columns_rejects_zero() {
        let m = DenseMatrix::from_vec(2, 2, vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        match m.normalize_columns() {
            Err(Error::ZeroNormColumn { index }) => assert_eq!(index, 1),
            other => panic!("expected ZeroNormColumn, got {other:?}"),
        }
    }
}
