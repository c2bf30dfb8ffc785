//! Dense real matrices stored row-major.
//!
//! Every reduction sums left to right in index order, so results are
//! bit-reproducible across runs. The arithmetic operators on `&Matrix`
//! panic on a shape mismatch; use [`multiply`] and friends where the shapes
//! come from untrusted input.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Pivot tolerance used when no other is supplied.
pub const DEFAULT_PIVOT_TOL: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes and
    /// non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("empty shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<const C: usize>(rows: &[[f64; C]]) -> Result<Self> {
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::from_row_major(rows.len(), C, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty shape {rows}x{cols}");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    pub fn scalar(value: f64) -> Self {
        Self::from_diagonal(&[value])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Copy of `self` with one entry replaced.
    pub fn with_entry(&self, i: usize, j: usize, value: f64) -> Result<Self> {
        if i >= self.rows || j >= self.cols {
            return Err(Error::Shape(format!(
                "entry ({i}, {j}) outside {}x{}",
                self.rows, self.cols
            )));
        }
        if !value.is_finite() {
            return Err(Error::NonFinite { row: i, col: j });
        }
        let mut m = self.clone();
        m.data[i * self.cols + j] = value;
        Ok(m)
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.data[i * self.cols + j]);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Shorthand for [`Matrix::transpose`].
    #[inline]
    pub fn t(&self) -> Self {
        self.transpose()
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|v| v * factor)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Scales row `i` by `factors[i]`, i.e. `diag(factors) * self`.
    pub fn scale_rows(&self, factors: &[f64]) -> Self {
        assert_eq!(factors.len(), self.rows, "row factor count");
        let mut m = self.clone();
        for (i, &f) in factors.iter().enumerate() {
            for v in &mut m.data[i * self.cols..(i + 1) * self.cols] {
                *v *= f;
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|`; zero for an exactly symmetric matrix.
    pub fn asymmetry(&self) -> f64 {
        assert!(self.is_square(), "asymmetry of a non-square matrix");
        let n = self.rows;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i]).abs());
            }
        }
        worst
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>13.6e} ", self.data[i * self.cols + j])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Standard product with a fixed `k = 0..n` accumulation order.
pub fn multiply(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::Shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let (m, n, p) = (a.rows, a.cols, b.cols);
    let mut data = vec![0.0; m * p];
    for i in 0..m {
        let row = &a.data[i * n..(i + 1) * n];
        for j in 0..p {
            let mut acc = 0.0;
            for (k, &aik) in row.iter().enumerate() {
                acc += aik * b.data[k * p + j];
            }
            data[i * p + j] = acc;
        }
    }
    Ok(Matrix {
        rows: m,
        cols: p,
        data,
    })
}

pub fn add(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.zip_with(b, |x, y| x + y)
}

pub fn subtract(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.zip_with(b, |x, y| x - y)
}

/// `(Σ v_ij²)^(1/2)`, summed row by row.
pub fn frobenius_norm(a: &Matrix) -> f64 {
    a.data.iter().fold(0.0, |acc, v| acc + v * v).sqrt()
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        multiply(self, rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        add(self, rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        subtract(self, rhs).expect("matrix difference shape mismatch")
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.map(|v| -v)
    }
}

impl Mul<f64> for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: f64) -> Matrix {
        self.scale(rhs)
    }
}

/// LU factorisation `PA = LU` with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    /// Unit-lower L below the diagonal, U on and above it.
    lu: Vec<f64>,
    perm: Vec<usize>,
    min_pivot: f64,
    max_abs: f64,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape(format!(
                "LU of a non-square {}x{} matrix",
                a.rows, a.cols
            )));
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_pivot = f64::INFINITY;

        for col in 0..n {
            let mut best = col;
            let mut best_abs = lu[col * n + col].abs();
            for row in (col + 1)..n {
                let v = lu[row * n + col].abs();
                if v > best_abs {
                    best = row;
                    best_abs = v;
                }
            }
            min_pivot = min_pivot.min(best_abs);
            if best_abs == 0.0 {
                // Exactly singular; the remaining factor is never used.
                break;
            }
            if best != col {
                for j in 0..n {
                    lu.swap(col * n + j, best * n + j);
                }
                perm.swap(col, best);
            }
            let pivot = lu[col * n + col];
            for row in (col + 1)..n {
                let factor = lu[row * n + col] / pivot;
                lu[row * n + col] = factor;
                if factor != 0.0 {
                    for j in (col + 1)..n {
                        lu[row * n + j] -= factor * lu[col * n + j];
                    }
                }
            }
        }

        Ok(Self {
            n,
            lu,
            perm,
            min_pivot,
            max_abs: a.max_abs(),
        })
    }

    /// Smallest pivot magnitude encountered.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    /// `min_pivot / max(floor, max|a_ij|)`; zero for the zero matrix.
    pub fn pivot_ratio(&self, floor: f64) -> f64 {
        let reference = self.max_abs.max(floor);
        if reference == 0.0 {
            0.0
        } else {
            self.min_pivot / reference
        }
    }

    /// Solves `A x = b` for every column of `b`. Only meaningful when the
    /// factorisation has no zero pivot.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        let n = self.n;
        if b.rows != n {
            return Err(Error::Shape(format!(
                "right-hand side has {} rows, expected {n}",
                b.rows
            )));
        }
        if self.min_pivot == 0.0 {
            return Err(Error::Singular { ratio: 0.0 });
        }
        let m = b.cols;
        let mut x = vec![0.0; n * m];
        for c in 0..m {
            let mut y = vec![0.0; n];
            for i in 0..n {
                let mut acc = b.data[self.perm[i] * m + c];
                for (k, yk) in y.iter().enumerate().take(i) {
                    acc -= self.lu[i * n + k] * yk;
                }
                y[i] = acc;
            }
            for i in (0..n).rev() {
                let mut acc = y[i];
                for k in (i + 1)..n {
                    acc -= self.lu[i * n + k] * x[k * m + c];
                }
                x[i * m + c] = acc / self.lu[i * n + i];
            }
        }
        Ok(Matrix {
            rows: n,
            cols: m,
            data: x,
        })
    }

    pub fn inverse(&self) -> Result<Matrix> {
        self.solve(&Matrix::identity(self.n))
    }
}

/// Inverse by LU with partial pivoting. The matrix counts as singular when
/// some pivot is smaller than `pivot_tol * max|a_ij|`.
pub fn invert(a: &Matrix, pivot_tol: f64) -> Result<Matrix> {
    invert_scaled(a, pivot_tol, 0.0)
}

/// Like [`invert`], but the pivot test is taken against
/// `max(floor, max|a_ij|)`. With `floor = 1` a matrix whose entries are all
/// tiny is treated as singular instead of being rescaled to look healthy.
pub fn invert_scaled(a: &Matrix, pivot_tol: f64, floor: f64) -> Result<Matrix> {
    if !(pivot_tol > 0.0) {
        return Err(Error::Domain(format!(
            "pivot tolerance must be positive, got {pivot_tol}"
        )));
    }
    let lu = Lu::factor(a)?;
    let ratio = lu.pivot_ratio(floor);
    if ratio < pivot_tol || ratio == 0.0 {
        return Err(Error::Singular { ratio });
    }
    lu.inverse()
}
