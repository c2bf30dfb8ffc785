//! Discrete symplectic systems `z_{k+1} = S_k z_k` in block form, their
//! matrix solutions, Wronskians and normalized conjoined bases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::report::{IdentityRecord, ResidualReport, Scaling, Tally};

/// Tolerance of the checked [`BlockSymplectic::new`] constructor.
pub const SYMPLECTIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Trig,
    Hyperbolic,
    GeneralSymplectic,
}

/// `S = [[A, B], [C, D]]` with square blocks of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSymplectic {
    a: Matrix,
    b: Matrix,
    c: Matrix,
    d: Matrix,
}

impl BlockSymplectic {
    /// Rejects blocks that violate the symplectic conditions by more than
    /// [`SYMPLECTIC_TOL`].
    pub fn new(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        let s = Self::new_unchecked(a, b, c, d)?;
        let r = s.symplectic_residual();
        if !(r <= SYMPLECTIC_TOL) {
            return Err(Error::Validation {
                identity: "symplectic".into(),
                residual: r,
                tolerance: SYMPLECTIC_TOL,
            });
        }
        Ok(s)
    }

    /// Checks shapes only.
    pub fn new_unchecked(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        let n = a.rows();
        for (name, m) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            if m.rows() != n || m.cols() != n {
                return Err(Error::Shape(format!(
                    "block {name} is {}x{}, expected {n}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(Self { a, b, c, d })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            a: Matrix::identity(n),
            b: Matrix::zeros(n, n),
            c: Matrix::zeros(n, n),
            d: Matrix::identity(n),
        }
    }

    /// `J = [[0, I], [-I, 0]]`.
    pub fn j(n: usize) -> Self {
        Self {
            a: Matrix::zeros(n, n),
            b: Matrix::identity(n),
            c: -&Matrix::identity(n),
            d: Matrix::zeros(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    pub fn d(&self) -> &Matrix {
        &self.d
    }

    /// `S⁻¹ = -J Sᵀ J = [[Dᵀ, -Bᵀ], [-Cᵀ, Aᵀ]]`, exact for symplectic `S`.
    pub fn inverse(&self) -> Self {
        Self {
            a: self.d.t(),
            b: -&self.b.t(),
            c: -&self.c.t(),
            d: self.a.t(),
        }
    }

    /// Largest Frobenius residual over the eight block equalities of
    /// `SᵀJS = J`, `SJSᵀ = J`.
    pub fn symplectic_residual(&self) -> f64 {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        let (at, bt, ct, dt) = (a.t(), b.t(), c.t(), d.t());
        let i = Matrix::identity(self.n());
        let candidates = [
            &(&(&at * d) - &(&ct * b)) - &i,
            &(&(&dt * a) - &(&bt * c)) - &i,
            &(&(a * &dt) - &(b * &ct)) - &i,
            &(&(d * &at) - &(c * &bt)) - &i,
            &(&at * c) - &(&ct * a),
            &(&bt * d) - &(&dt * b),
            &(a * &bt) - &(b * &at),
            &(c * &dt) - &(d * &ct),
        ];
        candidates
            .iter()
            .map(Matrix::frobenius_norm)
            .fold(0.0, f64::max)
    }

    /// Distance from `JᵀSJ = S`, which reduces to `D = A` and `C = -B`.
    pub fn reciprocity_residual(&self) -> f64 {
        let r1 = (&self.d - &self.a).frobenius_norm();
        let r2 = (&self.c + &self.b).frobenius_norm();
        r1.max(r2)
    }

    /// One step `(AX + BU, CX + DU)`.
    pub fn step(&self, x: &Matrix, u: &Matrix) -> (Matrix, Matrix) {
        (
            &(&self.a * x) + &(&self.b * u),
            &(&self.c * x) + &(&self.d * u),
        )
    }
}

pub fn is_symplectic(s: &BlockSymplectic, tol: f64) -> (bool, f64) {
    let r = s.symplectic_residual();
    (r <= tol, r)
}

/// Matrix solution `(X_k, U_k)` for `k = 0..=N+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    x: Vec<Matrix>,
    u: Vec<Matrix>,
}

impl Trajectory {
    pub fn new(x: Vec<Matrix>, u: Vec<Matrix>) -> Result<Self> {
        if x.len() != u.len() || x.len() < 2 {
            return Err(Error::Shape(format!(
                "trajectory needs matching lengths of at least 2, got {} and {}",
                x.len(),
                u.len()
            )));
        }
        let (r, c) = (x[0].rows(), x[0].cols());
        if x.iter().chain(&u).any(|m| m.rows() != r || m.cols() != c) {
            return Err(Error::Shape("trajectory entries differ in shape".into()));
        }
        Ok(Self { x, u })
    }

    pub fn n(&self) -> usize {
        self.x[0].rows()
    }

    /// `N`, so that indices run over `0..=N+1`.
    pub fn horizon(&self) -> usize {
        self.x.len() - 2
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self) -> &[Matrix] {
        &self.x
    }

    pub fn u(&self) -> &[Matrix] {
        &self.u
    }

    pub fn into_parts(self) -> (Vec<Matrix>, Vec<Matrix>) {
        (self.x, self.u)
    }

    /// Largest deviation from `(X_{k+1}, U_{k+1}) = S_k (X_k, U_k)`.
    pub fn restep_residual(&self, coeffs: &[BlockSymplectic]) -> Result<f64> {
        check_horizon(coeffs, self)?;
        let mut worst = 0.0_f64;
        for (k, s) in coeffs.iter().enumerate() {
            let (x, u) = s.step(&self.x[k], &self.u[k]);
            worst = worst
                .max((&x - &self.x[k + 1]).frobenius_norm())
                .max((&u - &self.u[k + 1]).frobenius_norm());
        }
        Ok(worst)
    }
}

fn check_system(coeffs: &[BlockSymplectic]) -> Result<usize> {
    let first = coeffs
        .first()
        .ok_or_else(|| Error::Shape("empty coefficient sequence".into()))?;
    let n = first.n();
    if coeffs.iter().any(|s| s.n() != n) {
        return Err(Error::Shape("coefficient blocks differ in dimension".into()));
    }
    Ok(n)
}

fn check_horizon(coeffs: &[BlockSymplectic], z: &Trajectory) -> Result<()> {
    let n = check_system(coeffs)?;
    if z.len() != coeffs.len() + 1 || z.n() != n {
        return Err(Error::Shape(format!(
            "trajectory of length {} and dimension {} does not fit {} steps of dimension {n}",
            z.len(),
            z.n(),
            coeffs.len()
        )));
    }
    Ok(())
}

/// Solution with initial values `(x0, u0)` at `k = 0`.
pub fn propagate(coeffs: &[BlockSymplectic], x0: &Matrix, u0: &Matrix) -> Result<Trajectory> {
    propagate_from(coeffs, 0, x0, u0)
}

/// Solution taking the value `(x, u)` at index `k0`; earlier indices are
/// filled by stepping with `S_k⁻¹`.
pub fn propagate_from(
    coeffs: &[BlockSymplectic],
    k0: usize,
    x: &Matrix,
    u: &Matrix,
) -> Result<Trajectory> {
    let n = check_system(coeffs)?;
    let len = coeffs.len() + 1;
    if k0 >= len {
        return Err(Error::Index {
            index: k0,
            max: len - 1,
        });
    }
    if x.rows() != n || u.rows() != n || x.cols() != u.cols() {
        return Err(Error::Shape(format!(
            "initial values {}x{} and {}x{} do not fit dimension {n}",
            x.rows(),
            x.cols(),
            u.rows(),
            u.cols()
        )));
    }
    let mut xs = vec![x.clone(); len];
    let mut us = vec![u.clone(); len];
    for k in k0..coeffs.len() {
        let (nx, nu) = coeffs[k].step(&xs[k], &us[k]);
        xs[k + 1] = nx;
        us[k + 1] = nu;
    }
    for k in (0..k0).rev() {
        let (px, pu) = coeffs[k].inverse().step(&xs[k + 1], &us[k + 1]);
        xs[k] = px;
        us[k] = pu;
    }
    Trajectory::new(xs, us)
}

/// `X_{k0} = 0`, `U_{k0} = I`.
pub fn principal_solution(coeffs: &[BlockSymplectic], k0: usize) -> Result<Trajectory> {
    let n = check_system(coeffs)?;
    propagate_from(coeffs, k0, &Matrix::zeros(n, n), &Matrix::identity(n))
}

/// `W(Z, Z̃)_k = X_kᵀ Ũ_k - U_kᵀ X̃_k`.
pub fn wronskian(z1: &Trajectory, z2: &Trajectory, k: usize) -> Result<Matrix> {
    check_pair(z1, z2)?;
    if k >= z1.len() {
        return Err(Error::Index {
            index: k,
            max: z1.len() - 1,
        });
    }
    Ok(&(&z1.x[k].t() * &z2.u[k]) - &(&z1.u[k].t() * &z2.x[k]))
}

/// `max_k ‖W(k) - W(0)‖_F`.
pub fn wronskian_drift(z1: &Trajectory, z2: &Trajectory) -> Result<f64> {
    let w0 = wronskian(z1, z2, 0)?;
    let mut worst = 0.0_f64;
    for k in 1..z1.len() {
        worst = worst.max((&wronskian(z1, z2, k)? - &w0).frobenius_norm());
    }
    Ok(worst)
}

fn check_pair(z1: &Trajectory, z2: &Trajectory) -> Result<()> {
    if z1.len() != z2.len() || z1.x[0].rows() != z2.x[0].rows() || z1.x[0].cols() != z2.x[0].cols()
    {
        return Err(Error::Shape("trajectories differ in shape or horizon".into()));
    }
    Ok(())
}

/// Records `eq4` (`X₁ᵀU₂ - U₁ᵀX₂ = I = X₁U₂ᵀ - X₂U₁ᵀ`) and `eq5`
/// (`X₁X₂ᵀ - X₂X₁ᵀ = 0 = U₁U₂ᵀ - U₂U₁ᵀ`) over every index.
pub fn check_normalized_conjoined(
    z1: &Trajectory,
    z2: &Trajectory,
    tol: f64,
    scaling: Scaling,
) -> Result<ResidualReport> {
    check_pair(z1, z2)?;
    let mut t4 = Tally::new("eq4", scaling, tol);
    let mut t5 = Tally::new("eq5", scaling, tol);
    let i = Matrix::identity(z1.n());
    for k in 0..z1.len() {
        let (x1, u1, x2, u2) = (&z1.x[k], &z1.u[k], &z2.x[k], &z2.u[k]);
        let l = &x1.t() * u2;
        let r = &u1.t() * x2;
        let first = residual_of(&(&(&l - &r) - &i), &[&l, &r, &i], scaling);
        let l = x1 * &u2.t();
        let r = x2 * &u1.t();
        let second = residual_of(&(&(&l - &r) - &i), &[&l, &r, &i], scaling);
        t4.record(first.max(second));

        let l = x1 * &x2.t();
        let r = x2 * &x1.t();
        let first = residual_of(&(&l - &r), &[&l, &r], scaling);
        let l = u1 * &u2.t();
        let r = u2 * &u1.t();
        let second = residual_of(&(&l - &r), &[&l, &r], scaling);
        t5.record(first.max(second));
    }
    Ok(ResidualReport {
        records: vec![t4.finish(), t5.finish()],
    })
}

fn residual_of(diff: &Matrix, terms: &[&Matrix], scaling: Scaling) -> f64 {
    crate::report::residual(diff, terms, scaling)
}

/// Blocks of `S_k` rebuilt from a normalized pair of conjoined bases.
pub fn recover_blocks(z1: &Trajectory, z2: &Trajectory, k: usize) -> Result<BlockSymplectic> {
    check_pair(z1, z2)?;
    if k + 1 >= z1.len() {
        return Err(Error::Index {
            index: k,
            max: z1.len() - 2,
        });
    }
    let (x, u, xt, ut) = (&z1.x, &z1.u, &z2.x, &z2.u);
    let a = &(&x[k + 1] * &ut[k].t()) - &(&xt[k + 1] * &u[k].t());
    let b = &(&xt[k + 1] * &x[k].t()) - &(&x[k + 1] * &xt[k].t());
    let c = &(&u[k + 1] * &ut[k].t()) - &(&ut[k + 1] * &u[k].t());
    let d = &(&ut[k + 1] * &x[k].t()) - &(&u[k + 1] * &xt[k].t());
    BlockSymplectic::new_unchecked(a, b, c, d)
}

/// Records `eq6`..`eq9`: each recovered block against the generating one.
pub fn check_block_recovery(
    coeffs: &[BlockSymplectic],
    z1: &Trajectory,
    z2: &Trajectory,
    tol: f64,
    scaling: Scaling,
) -> Result<Vec<IdentityRecord>> {
    check_horizon(coeffs, z1)?;
    check_pair(z1, z2)?;
    let mut tallies: Vec<Tally> = (6..=9)
        .map(|e| Tally::new(format!("eq{e}"), scaling, tol))
        .collect();
    for (k, s) in coeffs.iter().enumerate() {
        let r = recover_blocks(z1, z2, k)?;
        let pairs = [(r.a(), s.a()), (r.b(), s.b()), (r.c(), s.c()), (r.d(), s.d())];
        for (t, (got, want)) in tallies.iter_mut().zip(pairs) {
            t.check(&(got - want), &[got, want]);
        }
    }
    Ok(tallies.into_iter().map(Tally::finish).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_block(a: f64, b: f64, c: f64, d: f64) -> BlockSymplectic {
        BlockSymplectic::new_unchecked(
            Matrix::scalar(a),
            Matrix::scalar(b),
            Matrix::scalar(c),
            Matrix::scalar(d),
        )
        .unwrap()
    }

    #[test]
    fn j_is_symplectic() {
        assert_eq!(is_symplectic(&BlockSymplectic::j(3), 0.0), (true, 0.0));
    }

    #[test]
    fn determinant_one_scalar_is_symplectic() {
        assert!(is_symplectic(&scalar_block(2.0, 0.0, 0.0, 0.5), 1e-15).0);
        assert!(!is_symplectic(&scalar_block(2.0, 0.0, 0.0, 1.0), 1e-3).0);
    }

    #[test]
    fn checked_constructor_rejects_non_symplectic() {
        let r = BlockSymplectic::new(
            Matrix::scalar(2.0),
            Matrix::scalar(0.0),
            Matrix::scalar(0.0),
            Matrix::scalar(1.0),
        );
        assert!(matches!(r, Err(Error::Validation { .. })));
    }

    #[test]
    fn powers_of_j_have_period_four() {
        let coeffs = vec![BlockSymplectic::j(1); 5];
        let z = principal_solution(&coeffs, 0).unwrap();
        let xs: Vec<f64> = z.x().iter().map(|m| m.get(0, 0)).collect();
        let us: Vec<f64> = z.u().iter().map(|m| m.get(0, 0)).collect();
        assert_eq!(xs, vec![0.0, 1.0, 0.0, -1.0, 0.0, 1.0]);
        assert_eq!(us, vec![1.0, 0.0, -1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn identity_system_is_constant_from_any_base_point() {
        let coeffs = vec![BlockSymplectic::identity(2); 6];
        let z = principal_solution(&coeffs, 3).unwrap();
        assert!(z.x().iter().all(|m| *m == Matrix::zeros(2, 2)));
        assert!(z.u().iter().all(|m| *m == Matrix::identity(2)));
    }

    #[test]
    fn backward_steps_use_the_inverse() {
        let phi: f64 = 0.3;
        let s = scalar_block(phi.cos(), phi.sin(), -phi.sin(), phi.cos());
        let coeffs = vec![s; 8];
        let z = principal_solution(&coeffs, 2).unwrap();
        for (k, x) in z.x().iter().enumerate() {
            let expected = ((k as f64 - 2.0) * phi).sin();
            assert!((x.get(0, 0) - expected).abs() < 1e-15);
        }
        assert!(z.restep_residual(&coeffs).unwrap() < 1e-15);
    }

    #[test]
    fn base_point_out_of_range() {
        let coeffs = vec![BlockSymplectic::identity(1); 2];
        assert!(matches!(
            principal_solution(&coeffs, 4),
            Err(Error::Index { index: 4, max: 2 })
        ));
    }

    #[test]
    fn wronskian_of_principal_and_dual_basis() {
        let coeffs = vec![BlockSymplectic::j(2); 3];
        let zhat = principal_solution(&coeffs, 0).unwrap();
        let ztil = propagate(&coeffs, &Matrix::identity(2), &Matrix::zeros(2, 2)).unwrap();
        assert_eq!(wronskian(&zhat, &ztil, 0).unwrap(), -&Matrix::identity(2));
        assert_eq!(wronskian(&zhat, &zhat, 2).unwrap(), Matrix::zeros(2, 2));
        let report = check_normalized_conjoined(&ztil, &zhat, 1e-14, Scaling::Absolute).unwrap();
        assert!(report.all_pass());
        let report = check_normalized_conjoined(&zhat, &zhat, 1e-14, Scaling::Absolute).unwrap();
        assert!(!report.get("eq4").unwrap().pass);
    }

    #[test]
    fn identity_system_recovers_identity_blocks() {
        let coeffs = vec![BlockSymplectic::identity(2); 3];
        let z1 = propagate(&coeffs, &Matrix::identity(2), &Matrix::zeros(2, 2)).unwrap();
        let z2 = principal_solution(&coeffs, 0).unwrap();
        assert_eq!(recover_blocks(&z1, &z2, 1).unwrap(), BlockSymplectic::identity(2));
    }

    #[test]
    fn inverse_undoes_a_step() {
        let s = scalar_block(2.0, 3.0, 1.0, 2.0);
        let x = Matrix::scalar(0.7);
        let u = Matrix::scalar(-1.1);
        let (x1, u1) = s.step(&x, &u);
        let (x0, u0) = s.inverse().step(&x1, &u1);
        assert!((x0.get(0, 0) - 0.7).abs() < 1e-15);
        assert!((u0.get(0, 0) + 1.1).abs() < 1e-15);
    }
}
