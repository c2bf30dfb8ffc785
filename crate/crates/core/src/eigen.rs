//! Symmetric eigendecomposition by cyclic Jacobi rotations, and matrix
//! functions of symmetric matrices built on top of it.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Sweep budget before giving up.
pub const MAX_SWEEPS: usize = 100;

/// Off-diagonal threshold, relative to the Frobenius norm of the input.
pub const DEFAULT_SWEEP_TOL: f64 = 1e-15;

/// `A = V diag(λ) Vᵀ` with eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFunction {
    Cos,
    Sin,
    Cosh,
    Sinh,
    Exp,
}

impl MatrixFunction {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            MatrixFunction::Cos => x.cos(),
            MatrixFunction::Sin => x.sin(),
            MatrixFunction::Cosh => x.cosh(),
            MatrixFunction::Sinh => x.sinh(),
            MatrixFunction::Exp => x.exp(),
        }
    }
}

pub fn sym_eigen(a: &Matrix, sweep_tol: f64) -> Result<SymEigen> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "eigendecomposition of a non-square {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let norm = a.frobenius_norm();
    if a.asymmetry() > sweep_tol * norm.max(1.0) {
        return Err(Error::Domain(format!(
            "matrix is not symmetric (asymmetry {:e})",
            a.asymmetry()
        )));
    }

    let n = a.rows();
    let mut m: Vec<f64> = a.as_slice().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let threshold = sweep_tol * norm;

    let off_max = |m: &[f64]| {
        let mut worst = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                worst = worst.max(m[p * n + q].abs());
            }
        }
        worst
    };

    let mut converged = off_max(&m) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                // Rotation angle that annihilates m[p][q].
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        converged = off_max(&m) <= threshold;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let eigenvalues = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vecs[row * n + new_col] = v[row * n + old_col];
        }
    }
    Ok(SymEigen {
        eigenvalues,
        eigenvectors: Matrix::from_row_major(n, n, vecs)?,
    })
}

impl SymEigen {
    /// `V diag(f(λ)) Vᵀ`, built from the upper triangle and mirrored so the
    /// result is exactly symmetric.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.eigenvalues.len();
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let v = &self.eigenvectors;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for (k, fk) in fl.iter().enumerate() {
                    acc += v.get(i, k) * fk * v.get(j, k);
                }
                out[i * n + j] = acc;
                out[j * n + i] = acc;
            }
        }
        Matrix::from_row_major(n, n, out).expect("finite matrix function values")
    }

    pub fn reconstruct(&self) -> Matrix {
        self.apply(|l| l)
    }
}

pub fn sym_matrix_fn(a: &Matrix, f: MatrixFunction) -> Result<Matrix> {
    let eig = sym_eigen(a, DEFAULT_SWEEP_TOL)?;
    let out = eig.apply(|x| f.eval(x));
    Ok(out)
}
