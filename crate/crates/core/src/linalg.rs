//! Small dense linear algebra: row-major matrices, LU with partial pivoting,
//! and the cyclic Jacobi eigenvalue method for symmetric matrices.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
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
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul(&self, o: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, o.rows);
        let mut out = DenseMatrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..o.cols {
                    out[(i, j)] += a * o[(k, j)];
                }
            }
        }
        out
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn lu(&self) -> Result<Lu> {
        Lu::factor(self.clone())
    }

    /// Eigenvalues of a symmetric matrix in ascending order.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
            let scale: f64 = (0..n).map(|i| a[(i, i)] * a[(i, i)]).sum::<f64>() + off;
            if off <= 1e-32 * scale || off == 0.0 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        ev.sort_by(|x, y| x.total_cmp(y));
        ev
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial (row) pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu {
    factors: DenseMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(mut a: DenseMatrix) -> Result<Self> {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = f64::EPSILON * scale * n as f64;
        for k in 0..n {
            let (piv, max) = (k..n)
                .map(|i| (i, a[(i, k)].abs()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if !(max > tiny) {
                return Err(Error::SingularMatrix { pivot: k });
            }
            if piv != k {
                perm.swap(piv, k);
                let (lo, hi) = a.data.split_at_mut(piv * n);
                lo[k * n..(k + 1) * n].swap_with_slice(&mut hi[..n]);
            }
            let pivot = a[(k, k)];
            let (top, bottom) = a.data.split_at_mut((k + 1) * n);
            let row_k = &top[k * n..(k + 1) * n];
            for row_i in bottom.chunks_exact_mut(n) {
                let l = row_i[k] / pivot;
                row_i[k] = l;
                if l != 0.0 {
                    for (x, &y) in row_i[k + 1..].iter_mut().zip(&row_k[k + 1..]) {
                        *x -= l * y;
                    }
                }
            }
        }
        Ok(Lu { factors: a, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.factors.rows;
        if b.len() != n {
            return Err(Error::InvalidParameter("right-hand side length mismatch"));
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            let row = self.factors.row(i);
            let s: f64 = row[..i].iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.factors.row(i);
            let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / row[i];
        }
        Ok(x)
    }
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
