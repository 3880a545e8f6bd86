//! Minimal row-major matrix with the three products the trainer needs.
//!
//! Every product parallelizes over independent output rows, so the parallel
//! and sequential paths accumulate in the same order and agree bit for bit.

use serde::{Deserialize, Serialize};

/// Execution strategy for the matrix kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    /// Use the rayon pool when the `parallel` feature is compiled in.
    Par,
    /// Single-threaded regardless of features.
    Seq,
}

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `self * rhs^T`; both operands are walked along contiguous rows.
    pub fn matmul_nt(&self, rhs: &Mat, exec: Exec) -> Mat {
        assert_eq!(self.cols, rhs.cols, "inner dimensions disagree");
        let (m, n, k) = (self.rows, rhs.rows, self.cols);
        let mut out = Mat::zeros(m, n);
        let fill_row = |i: usize, out_row: &mut [f64]| {
            let a = &self.data[i * k..(i + 1) * k];
            for (j, cell) in out_row.iter_mut().enumerate() {
                let b = &rhs.data[j * k..(j + 1) * k];
                *cell = a.iter().zip(b).map(|(x, y)| x * y).sum();
            }
        };
        for_each_row(&mut out, exec, fill_row);
        out
    }

    /// Plain `self * rhs`.
    pub fn matmul_nn(&self, rhs: &Mat, exec: Exec) -> Mat {
        assert_eq!(self.cols, rhs.rows, "inner dimensions disagree");
        let (m, n, k) = (self.rows, rhs.cols, self.cols);
        let mut out = Mat::zeros(m, n);
        let fill_row = |i: usize, out_row: &mut [f64]| {
            let a = &self.data[i * k..(i + 1) * k];
            for (l, &al) in a.iter().enumerate() {
                let b = &rhs.data[l * n..(l + 1) * n];
                for (cell, &bv) in out_row.iter_mut().zip(b) {
                    *cell += al * bv;
                }
            }
        };
        for_each_row(&mut out, exec, fill_row);
        out
    }

    /// `self^T * rhs`, the gradient product `(k x m)^T (k x n) -> (m x n)`.
    pub fn matmul_tn(&self, rhs: &Mat, exec: Exec) -> Mat {
        assert_eq!(self.rows, rhs.rows, "outer dimensions disagree");
        let (m, n, k) = (self.cols, rhs.cols, self.rows);
        let mut out = Mat::zeros(m, n);
        let fill_row = |i: usize, out_row: &mut [f64]| {
            for l in 0..k {
                let al = self.data[l * m + i];
                let b = &rhs.data[l * n..(l + 1) * n];
                for (cell, &bv) in out_row.iter_mut().zip(b) {
                    *cell += al * bv;
                }
            }
        };
        for_each_row(&mut out, exec, fill_row);
        out
    }
}

/// Runs `fill` over every output row, in parallel when requested and
/// compiled in.
fn for_each_row<F>(out: &mut Mat, exec: Exec, fill: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    let cols = out.cols;
    match exec {
        Exec::Seq => {
            for (i, chunk) in out.data.chunks_mut(cols.max(1)).enumerate() {
                fill(i, chunk);
            }
        }
        Exec::Par => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                out.data
                    .par_chunks_mut(cols.max(1))
                    .enumerate()
                    .for_each(|(i, chunk)| fill(i, chunk));
            }
            #[cfg(not(feature = "parallel"))]
            {
                for (i, chunk) in out.data.chunks_mut(cols.max(1)).enumerate() {
                    fill(i, chunk);
                }
            }
        }
    }
}
