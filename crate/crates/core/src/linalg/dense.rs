use core::ops::{Index, IndexMut};

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension { expected: rows * cols, found: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: C64, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        let n = other.cols;
        for i in 0..self.rows {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.rows];
        self.matvec_into(v, &mut out);
        out
    }

    pub fn matvec_into(&self, v: &[C64], out: &mut [C64]) {
        assert_eq!(v.len(), self.cols);
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.row(r).iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self[(r, c)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |r, c| {
            self[(r / r2, c / c2)] * other[(r % r2, c % c2)]
        })
    }

    pub fn lu(&self) -> Result<Lu> {
        Lu::new(self.clone())
    }

    pub fn inverse(&self) -> Result<Self> {
        let lu = self.lu()?;
        let n = self.rows;
        let mut inv = Self::identity(n);
        lu.solve_matrix_in_place(&mut inv);
        Ok(inv)
    }

    /// Solves `self · X = rhs`.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        let lu = self.lu()?;
        let mut x = rhs.clone();
        lu.solve_matrix_in_place(&mut x);
        Ok(x)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl Lu {
    fn new(mut a: CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension { expected: a.rows, found: a.cols });
        }
        let n = a.rows;
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|r| (r, a[(r, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= scale * 1e-300 || !pmax.is_finite() {
                return Err(Error::Integration("singular matrix in LU factorization".into()));
            }
            if p != k {
                for c in 0..n {
                    a.data.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let pivot = a[(k, k)];
            for r in k + 1..n {
                let f = a[(r, k)] / pivot;
                if f == ZERO {
                    continue;
                }
                a[(r, k)] = f;
                for c in k + 1..n {
                    let akc = a[(k, c)];
                    a[(r, c)] -= f * akc;
                }
            }
        }
        Ok(Self { lu: a, perm })
    }

    /// Overwrites `b` (n × m) with the solution of `A X = b`.
    pub fn solve_matrix_in_place(&self, b: &mut CMatrix) {
        let n = self.lu.rows;
        let m = b.cols;
        let mut permuted = CMatrix::zeros(n, m);
        for (i, &p) in self.perm.iter().enumerate() {
            permuted.data[i * m..(i + 1) * m].copy_from_slice(&b.data[p * m..(p + 1) * m]);
        }
        let x = &mut permuted;
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                if l == ZERO {
                    continue;
                }
                for c in 0..m {
                    let v = x[(k, c)];
                    x[(i, c)] -= l * v;
                }
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[(i, k)];
                if u == ZERO {
                    continue;
                }
                for c in 0..m {
                    let v = x[(k, c)];
                    x[(i, c)] -= u * v;
                }
            }
            let d = self.lu[(i, i)];
            for c in 0..m {
                x[(i, c)] /= d;
            }
        }
        *b = permuted;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn inverse_roundtrip() {
        let a = CMatrix::from_row_major(
            3,
            3,
            vec![c(1.0, 1.0), c(2.0, 0.0), c(0.0, -1.0), c(0.5, 0.0), c(0.0, 0.0), c(3.0, 2.0), c(1.0, 0.0), c(-1.0, 1.0), c(2.0, 0.0)],
        )
        .unwrap();
        let inv = a.inverse().unwrap();
        let id = a.matmul(&inv);
        assert!(id.sub(&CMatrix::identity(3)).max_abs() < 1e-14);
    }

    #[test]
    fn singular_is_reported() {
        let a = CMatrix::zeros(2, 2);
        assert!(a.inverse().is_err());
    }

    #[test]
    fn kron_shape_and_entries() {
        let a = CMatrix::from_fn(2, 2, c64);
        let b = CMatrix::identity(2);
        let k = a.kron(&b);
        assert_eq!(k.rows(), 4);
        assert_eq!(k[(2, 0)], a[(1, 0)]);
        assert_eq!(k[(3, 1)], a[(1, 0)]);
        assert_eq!(k[(2, 1)], ZERO);

        fn c64(r: usize, c: usize) -> C64 {
            C64::new((2 * r + c) as f64, 1.0)
        }
    }
}
