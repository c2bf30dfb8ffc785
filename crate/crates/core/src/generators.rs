//! Seeded construction of valid coefficient sequences.
//!
//! All draws for one call come from a single [`Rng`] stream in a fixed order,
//! so `(seed, n, N, amplitude)` determines the output bit for bit.

use crate::eigen::{sym_eigen, DEFAULT_SWEEP_TOL};
use crate::error::{Error, Result};
use crate::hyperbolic::HypCoefficients;
use crate::matrix::Matrix;
use crate::rng::Rng;
use crate::trig::TrigCoefficients;

fn check_params(n: usize, amplitude: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::Domain(format!(
            "amplitude must be finite and non-negative, got {amplitude}"
        )));
    }
    Ok(())
}

/// Symmetric with Frobenius norm at most `amplitude`.
pub fn random_symmetric(n: usize, amplitude: f64, seed: u64) -> Result<Matrix> {
    check_params(n, amplitude)?;
    Ok(draw_symmetric(&mut Rng::new(seed), n, amplitude))
}

/// Orthogonal factor of a Householder QR with `diag(R) > 0`.
pub fn random_orthogonal(n: usize, seed: u64) -> Result<Matrix> {
    check_params(n, 0.0)?;
    Ok(draw_orthogonal(&mut Rng::new(seed), n))
}

fn draw_symmetric(rng: &mut Rng, n: usize, amplitude: f64) -> Matrix {
    let raw = rng.normals(n * n);
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = 0.5 * (raw[i * n + j] + raw[j * n + i]);
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    let m = Matrix::from_row_major(n, n, m).expect("finite normals");
    let norm = m.frobenius_norm();
    if norm == 0.0 {
        return m;
    }
    let mut out = m.scale(amplitude / norm);
    while out.frobenius_norm() > amplitude {
        out = out.scale(1.0 - f64::EPSILON);
    }
    out
}

fn draw_orthogonal(rng: &mut Rng, n: usize) -> Matrix {
    let mut a = rng.normals(n * n);
    let mut q = Matrix::identity(n).into_vec();
    for j in 0..n.saturating_sub(1) {
        let norm = (j..n).map(|i| a[i * n + j] * a[i * n + j]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[j * n + j] >= 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (j..n).map(|i| a[i * n + j]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= vnorm);
        // a <- H a on rows j.., q <- q H on columns j..
        for c in 0..n {
            let dot: f64 = v.iter().enumerate().map(|(r, vr)| vr * a[(j + r) * n + c]).sum();
            for (r, vr) in v.iter().enumerate() {
                a[(j + r) * n + c] -= 2.0 * vr * dot;
            }
        }
        for row in 0..n {
            let dot: f64 = v.iter().enumerate().map(|(r, vr)| vr * q[row * n + j + r]).sum();
            for (r, vr) in v.iter().enumerate() {
                q[row * n + j + r] -= 2.0 * vr * dot;
            }
        }
    }
    for j in 0..n {
        if a[j * n + j] < 0.0 {
            for row in 0..n {
                q[row * n + j] = -q[row * n + j];
            }
        }
    }
    Matrix::from_row_major(n, n, q).expect("finite reflections")
}

/// `P_k = G_k cos(A_k)`, `Q_k = G_k sin(A_k)` with `A_k` symmetric
/// (`‖A_k‖_F ≤ amplitude`) and `G_k` orthogonal, drawn in that order per step.
pub fn gen_trig(n: usize, horizon: usize, amplitude: f64, seed: u64) -> Result<TrigCoefficients> {
    check_params(n, amplitude)?;
    let mut rng = Rng::new(seed);
    let mut p = Vec::with_capacity(horizon + 1);
    let mut q = Vec::with_capacity(horizon + 1);
    for _ in 0..=horizon {
        let a = draw_symmetric(&mut rng, n, amplitude);
        let g = draw_orthogonal(&mut rng, n);
        let eig = sym_eigen(&a, DEFAULT_SWEEP_TOL)?;
        p.push(&g * &eig.apply(f64::cos));
        q.push(&g * &eig.apply(f64::sin));
    }
    TrigCoefficients::new(p, q)
}

/// `P_k = D cosh(A_k)`, `Q_k = D sinh(A_k)` with `A_k` symmetric
/// (`‖A_k‖_F ≤ amplitude`) and `D = diag(sign_diag)`, default `I`.
pub fn gen_hyp(
    n: usize,
    horizon: usize,
    amplitude: f64,
    sign_diag: Option<&[f64]>,
    seed: u64,
) -> Result<HypCoefficients> {
    check_params(n, amplitude)?;
    let signs = match sign_diag {
        None => vec![1.0; n],
        Some(d) => {
            if d.len() != n || d.iter().any(|&s| s != 1.0 && s != -1.0) {
                return Err(Error::Domain(format!(
                    "sign diagonal must hold {n} entries of +1 or -1"
                )));
            }
            d.to_vec()
        }
    };
    let mut rng = Rng::new(seed);
    let mut p = Vec::with_capacity(horizon + 1);
    let mut q = Vec::with_capacity(horizon + 1);
    for _ in 0..=horizon {
        let a = draw_symmetric(&mut rng, n, amplitude);
        let eig = sym_eigen(&a, DEFAULT_SWEEP_TOL)?;
        p.push(eig.apply(f64::cosh).scale_rows(&signs));
        q.push(eig.apply(f64::sinh).scale_rows(&signs));
    }
    HypCoefficients::new(p, q)
}
