//! Row-major dense matrices and a CSR sparse matrix, just enough for the
//! graph models.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        DenseMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        DenseMatrix::from_vec(rows.len(), cols, data)
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `self · other`
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in orow.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `selfᵀ · other`
    pub fn t_matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, other.rows, "t_matmul shape mismatch");
        let mut out = DenseMatrix::zeros(self.cols, other.cols);
        for r in 0..self.rows {
            let brow = other.row(r);
            for (i, &a) in self.row(r).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out.row_mut(i).iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self · otherᵀ`
    pub fn matmul_t(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.cols, "matmul_t shape mismatch");
        let mut out = DenseMatrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..other.rows {
                out.data[i * other.rows + j] = dot(a, other.row(j));
            }
        }
        out
    }

    /// Adds a `1 × cols` row vector to every row.
    pub fn add_row(&mut self, bias: &DenseMatrix) {
        assert_eq!(bias.shape(), (1, self.cols), "bias shape mismatch");
        for r in 0..self.rows {
            for (x, b) in self.row_mut(r).iter_mut().zip(&bias.data) {
                *x += b;
            }
        }
    }

    /// Column sums as a `1 × cols` matrix.
    pub fn col_sums(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(1, self.cols);
        for r in 0..self.rows {
            for (o, x) in out.data.iter_mut().zip(self.row(r)) {
                *o += x;
            }
        }
        out
    }

    pub fn relu(&self) -> DenseMatrix {
        self.map(|x| x.max(0.0))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn add_assign(&mut self, other: &DenseMatrix) {
        assert_eq!(self.shape(), other.shape(), "add shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_block(&self, start: usize, end: usize) -> DenseMatrix {
        assert!(start <= end && end <= self.rows, "row block out of range");
        DenseMatrix::from_vec(end - start, self.cols, self.data[start * self.cols..end * self.cols].to_vec())
    }

    /// Stacks `top` above `bottom`.
    pub fn vstack(top: &DenseMatrix, bottom: &DenseMatrix) -> DenseMatrix {
        assert_eq!(top.cols, bottom.cols, "vstack column mismatch");
        let mut data = top.data.clone();
        data.extend_from_slice(&bottom.data);
        DenseMatrix::from_vec(top.rows + bottom.rows, top.cols, data)
    }

    /// Multiplies row `r` by `factors[r]`.
    pub fn scale_rows(&self, factors: &[f64]) -> DenseMatrix {
        assert_eq!(factors.len(), self.rows, "row factor length mismatch");
        let mut out = self.clone();
        for (r, &f) in factors.iter().enumerate() {
            out.row_mut(r).iter_mut().for_each(|x| *x *= f);
        }
        out
    }

    /// Adds `s * other` in place.
    pub fn axpy(&mut self, s: f64, other: &DenseMatrix) {
        assert_eq!(self.shape(), other.shape(), "axpy shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// Zeroes entries where `mask` is not positive. Used for the ReLU derivative.
    pub fn mask_positive(&mut self, mask: &DenseMatrix) {
        assert_eq!(self.shape(), mask.shape(), "mask shape mismatch");
        for (a, &m) in self.data.iter_mut().zip(&mask.data) {
            if m <= 0.0 {
                *a = 0.0;
            }
        }
    }

    /// Rows reordered so that row `i` of the result is row `perm[i]` of `self`.
    pub fn select_rows(&self, perm: &[usize]) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(perm.len(), self.cols);
        for (i, &p) in perm.iter().enumerate() {
            out.row_mut(i).copy_from_slice(self.row(p));
        }
        out
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from per-row `(column, value)` lists.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        offsets.push(0);
        let n = rows.len();
        for row in rows {
            for (c, v) in row {
                debug_assert!(c < cols);
                indices.push(c);
                values.push(v);
            }
            offsets.push(indices.len());
        }
        SparseMatrix { rows: n, cols, offsets, indices, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.offsets[r]..self.offsets[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    /// `self · dense`
    pub fn matmul(&self, dense: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, dense.rows(), "spmm shape mismatch");
        let mut out = DenseMatrix::zeros(self.rows, dense.cols());
        for r in 0..self.rows {
            let orow = out.row_mut(r);
            for (c, v) in self.row(r) {
                for (o, &x) in orow.iter_mut().zip(dense.row(c)) {
                    *o += v * x;
                }
            }
        }
        out
    }

    /// `selfᵀ · dense`
    pub fn t_matmul(&self, dense: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, dense.rows(), "spmm shape mismatch");
        let mut out = DenseMatrix::zeros(self.cols, dense.cols());
        for r in 0..self.rows {
            let drow = dense.row(r);
            for (c, v) in self.row(r) {
                for (o, &x) in out.row_mut(c).iter_mut().zip(drow) {
                    *o += v * x;
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                out.set(r, c, out.get(r, c) + v);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                out.set(i, j, (0..a.cols()).map(|k| a.get(i, k) * b.get(k, j)).sum());
            }
        }
        out
    }

    fn transpose(a: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(a.cols(), a.rows());
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                out.set(j, i, a.get(i, j));
            }
        }
        out
    }

    fn close(a: &DenseMatrix, b: &DenseMatrix) -> bool {
        a.shape() == b.shape() && a.data().iter().zip(b.data()).all(|(x, y)| (x - y).abs() < 1e-9)
    }

    proptest! {
        #[test]
        fn products_agree(
            (n, k, m, a, b) in (1usize..5, 1usize..5, 1usize..5).prop_flat_map(|(n, k, m)| (
                Just(n), Just(k), Just(m),
                proptest::collection::vec(-3.0f64..3.0, n * k),
                proptest::collection::vec(-3.0f64..3.0, k * m),
            ))
        ) {
            let a = DenseMatrix::from_vec(n, k, a);
            let b = DenseMatrix::from_vec(k, m, b);
            let expect = naive(&a, &b);
            prop_assert!(close(&a.matmul(&b), &expect));
            prop_assert!(close(&transpose(&a).t_matmul(&b), &expect));
            prop_assert!(close(&a.matmul_t(&transpose(&b)), &expect));
            let mut rows = vec![Vec::new(); n];
            for (i, row) in rows.iter_mut().enumerate() {
                for j in 0..k {
                    if a.get(i, j) != 0.0 {
                        row.push((j, a.get(i, j)));
                    }
                }
            }
            let sp = SparseMatrix::from_rows(k, rows);
            prop_assert!(close(&sp.matmul(&b), &expect));
            prop_assert!(close(&sp.to_dense(), &a));
            let c = DenseMatrix::from_vec(n, m, expect.data().to_vec());
            prop_assert!(close(&sp.t_matmul(&c), &naive(&transpose(&a), &c)));
        }
    }

    #[test]
    fn bias_and_sums() {
        let mut m = DenseMatrix::from_rows(&[vec![1.0, -2.0], vec![3.0, 4.0]]);
        m.add_row(&DenseMatrix::from_vec(1, 2, vec![1.0, 1.0]));
        assert_eq!(m.col_sums().data(), &[6.0, 4.0]);
        assert_eq!(m.relu().data(), &[2.0, 0.0, 4.0, 5.0]);
    }
}
