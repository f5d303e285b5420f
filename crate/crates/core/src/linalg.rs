//! Dense LU factorization with partial pivoting, generic over the scalar type.

use crate::error::{Error, Result};
use crate::precision::Scalar;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn filled(rows: usize, cols: usize, value: S) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = self.row(i);
                let mut acc = row[0].clone() * x[0].clone();
                for j in 1..self.cols {
                    acc = acc + row[j].clone() * x[j].clone();
                }
                acc
            })
            .collect()
    }

    pub fn max_abs(&self) -> S {
        let mut m = self.data[0].abs();
        for v in &self.data[1..] {
            let a = v.abs();
            if a > m {
                m = a;
            }
        }
        m
    }
}

/// `P A = L U` with unit-diagonal `L`, both stored in one matrix.
#[derive(Clone, Debug)]
pub struct Lu<S> {
    lu: Matrix<S>,
    perm: Vec<usize>,
}

impl<S: Scalar> Lu<S> {
    /// Factors a square matrix. A pivot whose magnitude is at most
    /// `rel_tol * max|A|` marks the matrix singular.
    pub fn factor(a: &Matrix<S>, rel_tol: &S, context: &'static str) -> Result<Self> {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        if n == 0 {
            return Ok(Lu { lu, perm });
        }
        let threshold = a.max_abs() * rel_tol.clone();
        for k in 0..n {
            let mut piv = k;
            let mut best = lu.get(k, k).abs();
            for i in k + 1..n {
                let v = lu.get(i, k).abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if !(best > threshold) {
                return Err(Error::SingularMatrix(context));
            }
            if piv != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            let pivot = lu.get(k, k).clone();
            for i in k + 1..n {
                let factor = lu.get(i, k).clone() / pivot.clone();
                for j in k + 1..n {
                    let v = lu.get(i, j).clone() - factor.clone() * lu.get(k, j).clone();
                    lu.set(i, j, v);
                }
                lu.set(i, k, factor);
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y: Vec<S> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] = y[i].clone() - self.lu.get(i, j).clone() * y[j].clone();
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] = y[i].clone() - self.lu.get(i, j).clone() * y[j].clone();
            }
            y[i] = y[i].clone() / self.lu.get(i, i).clone();
        }
        y
    }
}

/// Infinity norm of a vector as `f64`.
pub fn norm_inf<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|x| x.abs().to_f64()).fold(0.0, f64::max)
}
