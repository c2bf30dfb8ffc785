//! Discrete hyperbolic systems `X' = PX + QU`, `U' = QX + PU`.

use crate::error::{Error, Result};
use crate::family::{self, Family, Pq, Sign, SuiteOptions};
use crate::generators::gen_hyp;
use crate::matrix::{Matrix, DEFAULT_PIVOT_TOL};
use crate::report::ResidualReport;
use crate::symplectic::{BlockSymplectic, Trajectory};

pub use crate::trig::VALIDATION_TOL;

const FAM: Family = Family::Hyp;

/// `(P_k, Q_k)` for `k = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypCoefficients {
    pq: Pq,
}

impl HypCoefficients {
    /// Rejects sequences that fail [`validate_hyp`] at [`VALIDATION_TOL`].
    pub fn new(p: Vec<Matrix>, q: Vec<Matrix>) -> Result<Self> {
        let c = Self::new_unchecked(p, q)?;
        family::require_valid(&validate_hyp(&c, VALIDATION_TOL))?;
        Ok(c)
    }

    pub fn new_unchecked(p: Vec<Matrix>, q: Vec<Matrix>) -> Result<Self> {
        Ok(Self {
            pq: Pq::new(p, q)?,
        })
    }

    /// Scalar system with `p_k = cosh a_k`, `q_k = sinh a_k`, both computed
    /// from `e^{a_k}` so that `a = ln 2` gives exactly 1.25 and 0.75.
    pub fn from_rates(rates: &[f64]) -> Result<Self> {
        let pairs: Vec<(f64, f64)> = rates
            .iter()
            .map(|a| {
                let e = a.exp();
                ((e + 1.0 / e) / 2.0, (e - 1.0 / e) / 2.0)
            })
            .collect();
        Self::from_scalars(&pairs)
    }

    pub fn from_scalars(pairs: &[(f64, f64)]) -> Result<Self> {
        let p = pairs.iter().map(|&(p, _)| Matrix::scalar(p)).collect();
        let q = pairs.iter().map(|&(_, q)| Matrix::scalar(q)).collect();
        Self::new(p, q)
    }

    pub fn n(&self) -> usize {
        self.pq.n()
    }

    pub fn horizon(&self) -> usize {
        self.pq.horizon()
    }

    pub fn p(&self) -> &[Matrix] {
        &self.pq.p
    }

    pub fn q(&self) -> &[Matrix] {
        &self.pq.q
    }

    /// `S_k = [[P_k, Q_k], [Q_k, P_k]]`.
    pub fn blocks(&self) -> Vec<BlockSymplectic> {
        self.pq.blocks(FAM)
    }

    pub fn into_parts(self) -> (Vec<Matrix>, Vec<Matrix>) {
        (self.pq.p, self.pq.q)
    }
}

/// Records `eq53`, `eq54`, `symplectic`, `p_invertible`,
/// `inverse_p_plus_q`, `inverse_p_minus_q` and `p_inv_q_symmetric`.
///
/// `p_invertible` stores `1e-12 / pivot_ratio(P_k)` against tolerance 1, so
/// it passes exactly when `P_k` passes the default pivot test.
pub fn validate_hyp(coeffs: &HypCoefficients, tol: f64) -> ResidualReport {
    family::validate(FAM, &coeffs.pq, tol)
}

/// `Sinh_{k;k0}` and `Cosh_{k;k0}` for `k = 0..=N+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypFunctions {
    pub base_point: usize,
    pub sinh: Vec<Matrix>,
    pub cosh: Vec<Matrix>,
}

impl HypFunctions {
    pub fn len(&self) -> usize {
        self.sinh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sinh.is_empty()
    }

    pub fn n(&self) -> usize {
        self.sinh[0].rows()
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.len() {
            return Err(Error::Index {
                index: k,
                max: self.len() - 1,
            });
        }
        Ok(())
    }
}

pub fn hyp_functions(coeffs: &HypCoefficients, k0: usize) -> Result<HypFunctions> {
    let (sinh, cosh) = family::functions(FAM, &coeffs.pq, k0)?;
    Ok(HypFunctions {
        base_point: k0,
        sinh,
        cosh,
    })
}

/// `X_k = Cosh_k X_0 + Sinh_k U_0`, `U_k = Sinh_k X_0 + Cosh_k U_0`.
pub fn hyp_general_solution(
    coeffs: &HypCoefficients,
    x0: &Matrix,
    u0: &Matrix,
) -> Result<Trajectory> {
    let f = hyp_functions(coeffs, 0)?;
    family::general_solution(FAM, &f.sinh, &f.cosh, x0, u0)
}

/// `(X, U) ↦ (U, X)`, which maps solutions to solutions.
pub fn swap_solution(traj: &Trajectory) -> Trajectory {
    family::twist(FAM, traj)
}

/// `Sinh_{k;l} = Sinh_k Cosh_lᵀ - Cosh_k Sinh_lᵀ`,
/// `Cosh_{k;l} = Cosh_k Cosh_lᵀ - Sinh_k Sinh_lᵀ`.
pub fn hyp_shifted_functions(funcs_at_0: &HypFunctions, l: usize) -> Result<HypFunctions> {
    let (sinh, cosh) = family::shifted(FAM, &funcs_at_0.sinh, &funcs_at_0.cosh, l)?;
    Ok(HypFunctions {
        base_point: l,
        sinh,
        cosh,
    })
}

/// Relative residuals of `Sinh_{k;l} + Sinh_{l;k}ᵀ` and `Cosh_{k;l} - Cosh_{l;k}ᵀ`.
pub fn hyp_parity_check(coeffs: &HypCoefficients, k: usize, l: usize) -> Result<(f64, f64)> {
    family::parity(FAM, &coeffs.pq, k, l)
}

/// `Cosh_k⁻¹ = Cosh_kᵀ - Sinh_kᵀ Cosh_k⁻ᵀ Sinh_kᵀ` and
/// `Sinh_k⁻¹ = Cosh_kᵀ Sinh_k⁻ᵀ Cosh_kᵀ - Sinh_kᵀ`, the latter `None` where
/// `Sinh_k` fails the pivot test. `Cosh_k` failing it is an inconsistency:
/// valid hyperbolic coefficients always give an invertible `Cosh_k`.
pub fn hyp_inverses(
    funcs: &HypFunctions,
    k: usize,
    pivot_tol: f64,
) -> Result<(Matrix, Option<Matrix>)> {
    funcs.check_index(k)?;
    let (cosh_inv, sinh_inv) =
        family::closed_form_inverses(FAM, &funcs.sinh[k], &funcs.cosh[k], pivot_tol)?;
    let cosh_inv = cosh_inv.ok_or_else(|| cosh_singular(k))?;
    Ok((cosh_inv, sinh_inv))
}

fn cosh_singular(k: usize) -> Error {
    Error::Inconsistency(format!("Cosh_{k} failed the pivot test"))
}

/// `Sinh±`, `Cosh±` of two systems.
#[derive(Debug, Clone, PartialEq)]
pub struct HypPairCombination {
    pub plus_sinh: Vec<Matrix>,
    pub plus_cosh: Vec<Matrix>,
    pub minus_sinh: Vec<Matrix>,
    pub minus_cosh: Vec<Matrix>,
}

impl HypPairCombination {
    pub fn sinh(&self, sign: Sign) -> &[Matrix] {
        match sign {
            Sign::Plus => &self.plus_sinh,
            Sign::Minus => &self.minus_sinh,
        }
    }

    pub fn cosh(&self, sign: Sign) -> &[Matrix] {
        match sign {
            Sign::Plus => &self.plus_cosh,
            Sign::Minus => &self.minus_cosh,
        }
    }

    /// `Tanh±_k = (Cosh±_k)⁻¹ Sinh±_k`.
    pub fn tanh(&self, sign: Sign, k: usize, pivot_tol: f64) -> Result<Matrix> {
        family::tangent(FAM, self.sinh(sign), self.cosh(sign), k, pivot_tol, false)
    }

    /// `Cotanh±_k = (Sinh±_k)⁻¹ Cosh±_k`.
    pub fn cotanh(&self, sign: Sign, k: usize, pivot_tol: f64) -> Result<Matrix> {
        family::tangent(FAM, self.sinh(sign), self.cosh(sign), k, pivot_tol, true)
    }
}

pub fn hyp_combine_pair(f1: &HypFunctions, f2: &HypFunctions) -> Result<HypPairCombination> {
    let (plus_sinh, plus_cosh, minus_sinh, minus_cosh) =
        family::combine(FAM, (&f1.sinh, &f1.cosh), (&f2.sinh, &f2.cosh))?;
    Ok(HypPairCombination {
        plus_sinh,
        plus_cosh,
        minus_sinh,
        minus_cosh,
    })
}

/// Direct evolution of the recurrence solved by `(Sinh±, Cosh±)`.
pub fn hyp_combination_system_step(
    f1_coeffs: &HypCoefficients,
    f2_coeffs: &HypCoefficients,
    sign: Sign,
) -> Result<Trajectory> {
    family::combination_recurrence(FAM, &f1_coeffs.pq, &f2_coeffs.pq, sign)
}

/// `X_k = 2 Sinh_k Cosh_kᵀ`, `U_k = Cosh_k Cosh_kᵀ + Sinh_k Sinh_kᵀ`.
pub fn hyp_double_angle(funcs: &HypFunctions) -> Trajectory {
    family::double_angle(FAM, &funcs.sinh, &funcs.cosh)
}

/// The recurrence solved by [`hyp_double_angle`].
pub fn hyp_double_angle_system_step(coeffs: &HypCoefficients) -> Result<Trajectory> {
    family::combination_recurrence(FAM, &coeffs.pq, &coeffs.pq, Sign::Plus)
}

/// `Tanh_k = Cosh_k⁻¹ Sinh_k`, always defined for valid coefficients.
pub fn hyp_tangent(funcs: &HypFunctions, k: usize) -> Result<Matrix> {
    match family::tangent(FAM, &funcs.sinh, &funcs.cosh, k, DEFAULT_PIVOT_TOL, false) {
        Err(Error::Undefined { k, .. }) => Err(cosh_singular(k)),
        other => other,
    }
}

/// `Cotanh_k = Sinh_k⁻¹ Cosh_k`.
pub fn hyp_cotangent(funcs: &HypFunctions, k: usize, pivot_tol: f64) -> Result<Matrix> {
    family::tangent(FAM, &funcs.sinh, &funcs.cosh, k, pivot_tol, true)
}

/// Every identity of the hyperbolic family, in report order, with relative
/// residuals throughout. Without a `partner`, the second system is generated
/// from `opts.partner_seed` and `opts.partner_amplitude`.
pub fn hyp_identity_suite(
    coeffs: &HypCoefficients,
    partner: Option<&HypCoefficients>,
    opts: &SuiteOptions,
) -> Result<ResidualReport> {
    let generated;
    let partner = match partner {
        Some(p) => p,
        None => {
            generated = gen_hyp(
                coeffs.n(),
                coeffs.horizon(),
                opts.partner_amplitude,
                None,
                opts.partner_seed,
            )?;
            &generated
        }
    };
    family::suite(FAM, &coeffs.pq, &partner.pq, opts)
}

/// Report ids produced by [`hyp_identity_suite`], in order.
pub fn hyp_suite_ids() -> Vec<String> {
    family::suite_ids(FAM)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn ln2(steps: usize) -> HypCoefficients {
        HypCoefficients::from_rates(&vec![LN_2; steps]).unwrap()
    }

    fn scalar(m: &Matrix) -> f64 {
        m.get(0, 0)
    }

    #[test]
    fn ln2_rates_are_dyadic() {
        let c = ln2(1);
        assert_eq!(scalar(&c.p()[0]), 1.25);
        assert_eq!(scalar(&c.q()[0]), 0.75);
    }

    #[test]
    fn validation_examples() {
        let id = HypCoefficients::new(vec![Matrix::identity(2)], vec![Matrix::zeros(2, 2)]).unwrap();
        assert!(validate_hyp(&id, 0.0).all_pass());
        let bad =
            HypCoefficients::new_unchecked(vec![Matrix::identity(2)], vec![Matrix::identity(2)])
                .unwrap();
        let r = validate_hyp(&bad, 1e-12);
        assert!(!r.get("eq53").unwrap().pass);
        assert!(HypCoefficients::new(vec![Matrix::identity(2)], vec![Matrix::identity(2)]).is_err());
    }

    #[test]
    fn singular_p_is_reported() {
        let c = HypCoefficients::new_unchecked(vec![Matrix::zeros(1, 1)], vec![Matrix::zeros(1, 1)])
            .unwrap();
        let r = validate_hyp(&c, 1e-12);
        assert!(!r.get("p_invertible").unwrap().pass);
        assert_eq!(r.get("p_inv_q_symmetric").unwrap().skipped_indices, vec![0]);
    }

    #[test]
    fn ln2_closed_form_values() {
        let f = hyp_functions(&ln2(3), 0).unwrap();
        assert_eq!(scalar(&f.sinh[1]), 0.75);
        assert_eq!(scalar(&f.sinh[2]), 1.875);
        assert_eq!(scalar(&f.cosh[2]), 2.125);
    }

    #[test]
    fn negative_p_alternates_sign() {
        let c = HypCoefficients::from_scalars(&[(-1.25, -0.75); 4]).unwrap();
        let f = hyp_functions(&c, 0).unwrap();
        for k in 0..f.len() {
            let kf = k as f64;
            let expected = (-1f64).powi(k as i32) * (kf * LN_2).sinh();
            assert!((scalar(&f.sinh[k]) - expected).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn general_solution_unit_data() {
        let c = ln2(4);
        let f = hyp_functions(&c, 0).unwrap();
        let z = hyp_general_solution(&c, &Matrix::scalar(0.0), &Matrix::scalar(1.0)).unwrap();
        assert_eq!(z.x(), &f.sinh[..]);
        assert_eq!(z.u(), &f.cosh[..]);
        let z = hyp_general_solution(&c, &Matrix::scalar(1.0), &Matrix::scalar(0.0)).unwrap();
        assert_eq!(z.x(), &f.cosh[..]);
        assert_eq!(z.u(), &f.sinh[..]);
    }

    #[test]
    fn swap_is_an_involution_and_a_solution() {
        let c = ln2(4);
        let f = hyp_functions(&c, 0).unwrap();
        let z = Trajectory::new(f.sinh.clone(), f.cosh.clone()).unwrap();
        assert_eq!(swap_solution(&swap_solution(&z)), z);
        assert_eq!(swap_solution(&z).restep_residual(&c.blocks()).unwrap(), 0.0);
    }

    #[test]
    fn shifted_scalar_values() {
        let f = hyp_functions(&ln2(6), 0).unwrap();
        let g = hyp_shifted_functions(&f, 2).unwrap();
        for k in 0..f.len() {
            let expected = ((k as f64 - 2.0) * LN_2).sinh();
            assert!((scalar(&g.sinh[k]) - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn scalar_inverses_and_tangents() {
        let f = hyp_functions(&ln2(2), 0).unwrap();
        let (ci, si) = hyp_inverses(&f, 1, 1e-12).unwrap();
        assert!((scalar(&ci) - 0.8).abs() < 1e-15);
        assert!((scalar(&si.unwrap()) - 4.0 / 3.0).abs() < 1e-15);
        let (ci, si) = hyp_inverses(&f, 0, 1e-12).unwrap();
        assert_eq!(ci, Matrix::identity(1));
        assert!(si.is_none());
        assert!((scalar(&hyp_tangent(&f, 1).unwrap()) - 0.6).abs() < 1e-15);
        assert!((scalar(&hyp_cotangent(&f, 1, 1e-12).unwrap()) - 5.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            hyp_cotangent(&f, 0, 1e-12),
            Err(Error::Undefined { function: "Cotanh", k: 0 })
        ));
    }

    #[test]
    fn double_angle_at_one() {
        let f = hyp_functions(&ln2(2), 0).unwrap();
        let d = hyp_double_angle(&f);
        assert_eq!(scalar(&d.x()[1]), 1.875);
        assert_eq!(scalar(&d.u()[1]), 2.125);
    }

    #[test]
    fn scalar_suite_is_tight() {
        let c = ln2(12);
        let partner = HypCoefficients::from_rates(&[0.3; 12]).unwrap();
        let r = hyp_identity_suite(&c, Some(&partner), &SuiteOptions::hyperbolic().with_tol(1e-11))
            .unwrap();
        for rec in &r.records {
            assert!(rec.pass, "{rec:?}");
        }
        assert_eq!(r.ids(), hyp_suite_ids());
    }
}
