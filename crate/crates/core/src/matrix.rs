//! Dense real matrices stored in column-major order.
//!
//! [`Matrix`] is deliberately small: construction, slicing by columns,
//! products (including the transposed variants that avoid materializing a
//! transpose), and entrywise arithmetic. Factorizations live in
//! [`crate::svd`] and [`crate::basis`].
//!
//! Zero-sized matrices are allowed. They show up naturally as the empty
//! blocks of a partitioned factorization (for instance `V_j` when `j = 0`).

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Range, Sub};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Square diagonal matrix.
    pub fn diag(values: &[f64]) -> Self {
        Matrix::rect_diag(values.len(), values.len(), values)
    }

    /// `rows × cols` matrix with `values` on the main diagonal.
    ///
    /// # Panics
    /// If `values` is longer than `min(rows, cols)`.
    pub fn rect_diag(rows: usize, cols: usize, values: &[f64]) -> Self {
        assert!(values.len() <= rows.min(cols), "diagonal does not fit");
        let mut m = Matrix::zeros(rows, cols);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from row slices.
    ///
    /// # Panics
    /// If the rows have different lengths.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        assert!(
            rows.iter().all(|row| row.as_ref().len() == c),
            "ragged rows"
        );
        Matrix::from_fn(r, c, |i, j| rows[i].as_ref()[j])
    }

    /// Builds a matrix from column vectors of equal length.
    ///
    /// # Panics
    /// If the columns have different lengths.
    pub fn from_columns<C: AsRef<[f64]>>(rows: usize, columns: &[C]) -> Self {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            assert_eq!(c.as_ref().len(), rows, "column length mismatch");
            data.extend_from_slice(c.as_ref());
        }
        Matrix {
            rows,
            cols: columns.len(),
            data,
        }
    }

    /// Wraps column-major data, rejecting length mismatches and non-finite entries.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        let m = Matrix { rows, cols, data };
        m.ensure_finite()?;
        Ok(m)
    }

    /// Column vector.
    pub fn column_vector(values: &[f64]) -> Self {
        Matrix::from_columns(values.len(), &[values])
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

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Column-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.cols).map(move |j| self.col(j))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput(
                "matrix contains NaN or infinite entries".into(),
            ))
        }
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Copy of the columns in `range`.
    pub fn col_range(&self, range: Range<usize>) -> Matrix {
        assert!(range.end <= self.cols, "column range out of bounds");
        Matrix {
            rows: self.rows,
            cols: range.len(),
            data: self.data[range.start * self.rows..range.end * self.rows].to_vec(),
        }
    }

    /// Copy of the rows in `range`.
    pub fn row_range(&self, range: Range<usize>) -> Matrix {
        assert!(range.end <= self.rows, "row range out of bounds");
        Matrix::from_fn(range.len(), self.cols, |i, j| self[(range.start + i, j)])
    }

    /// Horizontal concatenation.
    ///
    /// # Panics
    /// If the blocks have different row counts.
    pub fn hcat(blocks: &[&Matrix]) -> Matrix {
        let rows = blocks.first().map_or(0, |b| b.rows);
        let mut data = Vec::new();
        let mut cols = 0;
        for b in blocks {
            assert_eq!(b.rows, rows, "hcat row mismatch");
            data.extend_from_slice(&b.data);
            cols += b.cols;
        }
        Matrix { rows, cols, data }
    }

    pub fn push_column(&mut self, column: &[f64]) {
        if self.cols == 0 && self.rows == 0 {
            self.rows = column.len();
        }
        assert_eq!(column.len(), self.rows, "column length mismatch");
        self.data.extend_from_slice(column);
        self.cols += 1;
    }

    /// `self · rhs`.
    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul shape mismatch: {:?} x {:?}",
            self.shape(),
            rhs.shape()
        );
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (l, &b) in rhs.col(j).iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                axpy(b, self.col(l), dst);
            }
        }
        out
    }

    /// `selfᵀ · rhs` without forming the transpose.
    pub fn tr_matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            self.rows, rhs.rows,
            "tr_matmul shape mismatch: {:?}ᵀ x {:?}",
            self.shape(),
            rhs.shape()
        );
        Matrix::from_fn(self.cols, rhs.cols, |i, j| dot(self.col(i), rhs.col(j)))
    }

    /// `self · rhsᵀ` without forming the transpose.
    pub fn matmul_tr(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, rhs.cols,
            "matmul_tr shape mismatch: {:?} x {:?}ᵀ",
            self.shape(),
            rhs.shape()
        );
        let mut out = Matrix::zeros(self.rows, rhs.rows);
        for l in 0..self.cols {
            let a = self.col(l);
            let b = rhs.col(l);
            for (j, &bj) in b.iter().enumerate() {
                if bj != 0.0 {
                    axpy(bj, a, &mut out.data[j * self.rows..(j + 1) * self.rows]);
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn norm_fro(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest entrywise absolute difference; `∞` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `‖selfᵀ self − I‖_F`, the orthonormality defect of the columns.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.tr_matmul(self);
        (&g - &Matrix::identity(self.cols)).norm_fro()
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Euclidean norm with scaling to avoid overflow and underflow.
pub(crate) fn norm2(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let ss: f64 = x.iter().map(|v| (v / scale) * (v / scale)).sum();
    scale * ss.sqrt()
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

impl Mul<f64> for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: f64) -> Matrix {
        self.scale(rhs)
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| -x).collect(),
        }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>12.5e} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
