//! Dense row-major matrices and the handful of products the model needs.

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: alloc::vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// First `n` rows.
    pub fn top_rows(&self, n: usize) -> Matrix {
        Matrix::from_vec(n, self.cols, self.data[..n * self.cols].to_vec())
    }

    /// Rows `start..`.
    pub fn rows_from(&self, start: usize) -> Matrix {
        Matrix::from_vec(self.rows - start, self.cols, self.data[start * self.cols..].to_vec())
    }
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = c * 4;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in chunks * 4..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// `x · w + bias` where `x` is `n × k`, `w` is `k × m`.
pub(crate) fn linear(x: &Matrix, w: &Matrix, bias: &[f64]) -> Matrix {
    debug_assert_eq!(x.cols, w.rows);
    let mut out = Matrix::zeros(x.rows, w.cols);
    for i in 0..x.rows {
        let o = out.row_mut(i);
        o.copy_from_slice(bias);
        for (p, &xv) in x.row(i).iter().enumerate() {
            if xv != 0.0 {
                axpy(xv, w.row(p), o);
            }
        }
    }
    out
}

/// Backward of [`linear`]: accumulates `dw += xᵀ·dy`, `db += Σ dy` and
/// returns `dx = dy · wᵀ`.
pub(crate) fn linear_backward(x: &Matrix, w: &Matrix, dy: &Matrix, dw: &mut Matrix, db: &mut [f64]) -> Matrix {
    for i in 0..x.rows {
        let dyr = dy.row(i);
        axpy(1.0, dyr, db);
        for (p, &xv) in x.row(i).iter().enumerate() {
            if xv != 0.0 {
                axpy(xv, dyr, dw.row_mut(p));
            }
        }
    }
    let mut dx = Matrix::zeros(x.rows, x.cols);
    for i in 0..x.rows {
        let dyr = dy.row(i);
        let dxr = dx.row_mut(i);
        for (p, d) in dxr.iter_mut().enumerate() {
            *d = dot(w.row(p), dyr);
        }
    }
    dx
}

/// Same as [`linear_backward`] without the input gradient.
pub(crate) fn linear_backward_params(x: &Matrix, dy: &Matrix, dw: &mut Matrix, db: &mut [f64]) {
    for i in 0..x.rows {
        let dyr = dy.row(i);
        axpy(1.0, dyr, db);
        for (p, &xv) in x.row(i).iter().enumerate() {
            if xv != 0.0 {
                axpy(xv, dyr, dw.row_mut(p));
            }
        }
    }
}
