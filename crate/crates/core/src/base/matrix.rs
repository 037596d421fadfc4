use std::ops::Range;

use nalgebra::DMatrix;

use crate::error::{RcnError, Result};

/// Dense row-major matrix of 64-bit floats.
///
/// Rows are time steps and columns are features. A matrix may have zero
/// rows but always has at least one column.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data, checking the shape and that every
    /// value is finite.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if cols == 0 {
            return Err(RcnError::shape("matrix", "at least one column is required"));
        }
        if data.len() != rows * cols {
            return Err(RcnError::shape(
                "matrix",
                format!("{} values for a {}x{} matrix", data.len(), rows, cols),
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(RcnError::NonFinite("matrix".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Shape-checked construction without the finiteness scan; used on
    /// values produced by finite arithmetic inside the crate.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert!(cols >= 1 && data.len() == rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(cols >= 1, "matrix needs at least one column");
        Self::from_raw(rows, cols, vec![0.0; rows * cols])
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        assert!(cols >= 1, "matrix needs at least one column");
        Self::from_raw(rows, cols, vec![value; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(RcnError::Empty("matrix rows".into()));
        };
        let cols = first.as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(RcnError::width(format!("matrix row {i}"), cols, r.len()));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    /// Single-column matrix.
    pub fn column_vector(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.cols)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.row_iter().map(|r| r[j]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|v| v * factor)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Contiguous block of rows.
    pub fn slice_rows(&self, range: Range<usize>) -> Self {
        assert!(range.end <= self.rows, "row range out of bounds");
        let data = self.data[range.start * self.cols..range.end * self.cols].to_vec();
        Self::from_raw(range.len(), self.cols, data)
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self::from_raw(indices.len(), self.cols, data)
    }

    pub fn select_columns(&self, columns: &[usize]) -> Self {
        assert!(!columns.is_empty(), "at least one column must be selected");
        let mut data = Vec::with_capacity(self.rows * columns.len());
        for r in self.row_iter() {
            data.extend(columns.iter().map(|&c| r[c]));
        }
        Self::from_raw(self.rows, columns.len(), data)
    }

    /// Rows in reverse time order.
    pub fn reversed_rows(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for r in self.data.chunks_exact(self.cols).rev() {
            data.extend_from_slice(r);
        }
        Self::from_raw(self.rows, self.cols, data)
    }

    /// Stacks matrices along the time axis.
    pub fn vstack(parts: &[&Matrix]) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(RcnError::Empty("vstack".into()));
        };
        let cols = first.cols;
        let mut data = Vec::with_capacity(parts.iter().map(|p| p.data.len()).sum());
        for (i, p) in parts.iter().enumerate() {
            if p.cols != cols {
                return Err(RcnError::width(format!("vstack part {i}"), cols, p.cols));
            }
            data.extend_from_slice(&p.data);
        }
        Ok(Self::from_raw(data.len() / cols, cols, data))
    }

    /// Concatenates matrices feature-wise, preserving part order.
    pub fn hstack(parts: &[&Matrix]) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(RcnError::Empty("hstack".into()));
        };
        let rows = first.rows;
        if let Some(p) = parts.iter().find(|p| p.rows != rows) {
            return Err(RcnError::shape(
                "hstack",
                format!("row counts {} and {} differ", rows, p.rows),
            ));
        }
        let cols: usize = parts.iter().map(|p| p.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for p in parts {
                data.extend_from_slice(p.row(i));
            }
        }
        Ok(Self::from_raw(rows, cols, data))
    }

    pub fn transpose(&self) -> Self {
        let mut out = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        // A 0-row matrix transposes to a 0-column one, which is not
        // representable; callers never transpose empty matrices.
        Self::from_raw(self.cols, self.rows.max(1), out)
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(RcnError::width("matmul", self.cols, other.rows));
        }
        let mut out = vec![0.0; self.rows * other.cols];
        gemm(
            self.rows,
            self.cols,
            other.cols,
            1.0,
            (&self.data, self.cols as isize, 1),
            (&other.data, other.cols as isize, 1),
            0.0,
            (&mut out, other.cols as isize, 1),
        );
        Ok(Self::from_raw(self.rows, other.cols, out))
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            data.extend(m.row(i).iter().copied());
        }
        Self::from_raw(m.nrows(), m.ncols().max(1), data)
    }

    /// Largest absolute elementwise difference; shapes must agree.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Strided general matrix multiply `c = alpha·a·b + beta·c` where `a` is
/// `m×k`, `b` is `k×n` and `c` is `m×n`. Each operand is passed as
/// `(data, row stride, column stride)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: (&[f64], isize, isize),
    b: (&[f64], isize, isize),
    beta: f64,
    c: (&mut [f64], isize, isize),
) {
    if m == 0 || n == 0 {
        return;
    }
    assert!(extent(m, k, a.1, a.2) <= a.0.len(), "gemm: lhs out of bounds");
    assert!(extent(k, n, b.1, b.2) <= b.0.len(), "gemm: rhs out of bounds");
    assert!(extent(m, n, c.1, c.2) <= c.0.len(), "gemm: output out of bounds");
    // SAFETY: the asserts above bound every index reachable through the
    // given shapes and strides.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.0.as_ptr(),
            a.1,
            a.2,
            b.0.as_ptr(),
            b.1,
            b.2,
            beta,
            c.0.as_mut_ptr(),
            c.1,
            c.2,
        );
    }
}

fn extent(rows: usize, cols: usize, rs: isize, cs: isize) -> usize {
    if rows == 0 || cols == 0 {
        return 0;
    }
    ((rows - 1) as isize * rs + (cols - 1) as isize * cs) as usize + 1
}
