use alloc::vec;
use alloc::vec::Vec;

use super::CMatrix;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut row_of = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            debug_assert!(r < rows && c < cols);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_of.push(r);
                last = Some((r, c));
            }
        }
        let mut keep_cols = Vec::with_capacity(col_idx.len());
        let mut keep_vals = Vec::with_capacity(values.len());
        for ((c, v), r) in col_idx.into_iter().zip(values).zip(row_of) {
            if v != ZERO {
                keep_cols.push(c);
                keep_vals.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { rows, cols, row_ptr, col_idx: keep_cols, values: keep_vals }
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

    /// Iterates the stored entries of row `r` as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn matvec_into(&self, v: &[C64], out: &mut [C64]) {
        debug_assert_eq!(v.len(), self.cols);
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.row(r).map(|(c, a)| a * v[c]).sum();
        }
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.rows];
        self.matvec_into(v, &mut out);
        out
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    /// Principal submatrix on `idx` (sorted, distinct), as a dense matrix.
    pub fn dense_submatrix(&self, idx: &[usize]) -> CMatrix {
        let mut pos = vec![usize::MAX; self.cols];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let mut m = CMatrix::zeros(idx.len(), idx.len());
        for (k, &r) in idx.iter().enumerate() {
            for (c, v) in self.row(r) {
                if pos[c] != usize::MAX {
                    m[(k, pos[c])] = v;
                }
            }
        }
        m
    }

    /// Principal submatrix on `idx` (sorted, distinct), kept sparse.
    pub fn submatrix(&self, idx: &[usize]) -> CsrMatrix {
        let mut pos = vec![usize::MAX; self.cols];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let mut trip = Vec::new();
        for (k, &r) in idx.iter().enumerate() {
            for (c, v) in self.row(r) {
                if pos[c] != usize::MAX {
                    trip.push((k, pos[c], v));
                }
            }
        }
        CsrMatrix::from_triplets(idx.len(), idx.len(), trip)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut col = vec![0.0; self.cols];
        for (_, c, v) in self.triplets() {
            col[c] += v.norm();
        }
        col.into_iter().fold(0.0, f64::max)
    }

    /// Indices reachable from `seeds` by repeated application of the matrix
    /// (column `c` feeds every row with a stored entry in that column).
    pub fn reachable_from(&self, seeds: &[usize]) -> Vec<usize> {
        // column -> rows adjacency
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.cols];
        for (r, c, _) in self.triplets() {
            adj[c].push(r);
        }
        let mut seen = vec![false; self.rows.max(self.cols)];
        let mut stack: Vec<usize> = Vec::new();
        for &s in seeds {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
        while let Some(c) = stack.pop() {
            for &r in &adj[c] {
                if !seen[r] {
                    seen[r] = true;
                    stack.push(r);
                }
            }
        }
        (0..seen.len()).filter(|&i| seen[i]).collect()
    }
}
