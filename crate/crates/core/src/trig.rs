//! Discrete trigonometric systems `X' = PX + QU`, `U' = -QX + PU`.

use crate::error::Result;
use crate::family::{self, Family, Pq, Sign, SuiteOptions};
use crate::generators::gen_trig;
use crate::matrix::Matrix;
use crate::report::ResidualReport;
use crate::symplectic::{BlockSymplectic, Trajectory};

/// Tolerance of the checked coefficient constructors.
pub const VALIDATION_TOL: f64 = 1e-12;

const FAM: Family = Family::Trig;

/// `(P_k, Q_k)` for `k = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigCoefficients {
    pq: Pq,
}

impl TrigCoefficients {
    /// Rejects sequences that fail [`validate_trig`] at [`VALIDATION_TOL`].
    pub fn new(p: Vec<Matrix>, q: Vec<Matrix>) -> Result<Self> {
        let c = Self::new_unchecked(p, q)?;
        family::require_valid(&validate_trig(&c, VALIDATION_TOL))?;
        Ok(c)
    }

    pub fn new_unchecked(p: Vec<Matrix>, q: Vec<Matrix>) -> Result<Self> {
        Ok(Self {
            pq: Pq::new(p, q)?,
        })
    }

    /// Scalar system with `p_k = cos φ_k`, `q_k = sin φ_k`.
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        let p = angles.iter().map(|a| Matrix::scalar(a.cos())).collect();
        let q = angles.iter().map(|a| Matrix::scalar(a.sin())).collect();
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

    /// `S_k = [[P_k, Q_k], [-Q_k, P_k]]`.
    pub fn blocks(&self) -> Vec<BlockSymplectic> {
        self.pq.blocks(FAM)
    }

    pub fn into_parts(self) -> (Vec<Matrix>, Vec<Matrix>) {
        (self.pq.p, self.pq.q)
    }
}

/// Records `eq10`, `eq11`, `symplectic` and `self_reciprocal` over every step.
pub fn validate_trig(coeffs: &TrigCoefficients, tol: f64) -> ResidualReport {
    family::validate(FAM, &coeffs.pq, tol)
}

/// `Sin_{k;k0}` and `Cos_{k;k0}` for `k = 0..=N+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigFunctions {
    pub base_point: usize,
    pub sin: Vec<Matrix>,
    pub cos: Vec<Matrix>,
}

impl TrigFunctions {
    pub fn len(&self) -> usize {
        self.sin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sin.is_empty()
    }

    pub fn n(&self) -> usize {
        self.sin[0].rows()
    }
}

pub fn trig_functions(coeffs: &TrigCoefficients, k0: usize) -> Result<TrigFunctions> {
    let (sin, cos) = family::functions(FAM, &coeffs.pq, k0)?;
    Ok(TrigFunctions {
        base_point: k0,
        sin,
        cos,
    })
}

/// `X_k = Cos_k X_0 + Sin_k U_0`, `U_k = -Sin_k X_0 + Cos_k U_0`.
pub fn general_solution(coeffs: &TrigCoefficients, x0: &Matrix, u0: &Matrix) -> Result<Trajectory> {
    let f = trig_functions(coeffs, 0)?;
    family::general_solution(FAM, &f.sin, &f.cos, x0, u0)
}

/// `(X, U) ↦ (U, -X)`, which maps solutions to solutions.
pub fn rotate_solution(traj: &Trajectory) -> Trajectory {
    family::twist(FAM, traj)
}

/// `Sin_{k;l} = Sin_k Cos_lᵀ - Cos_k Sin_lᵀ`, `Cos_{k;l} = Cos_k Cos_lᵀ + Sin_k Sin_lᵀ`.
pub fn shifted_functions(funcs_at_0: &TrigFunctions, l: usize) -> Result<TrigFunctions> {
    let (sin, cos) = family::shifted(FAM, &funcs_at_0.sin, &funcs_at_0.cos, l)?;
    Ok(TrigFunctions {
        base_point: l,
        sin,
        cos,
    })
}

/// Residuals of `Sin_{k;l} + Sin_{l;k}ᵀ` and `Cos_{k;l} - Cos_{l;k}ᵀ`.
pub fn parity_check(coeffs: &TrigCoefficients, k: usize, l: usize) -> Result<(f64, f64)> {
    family::parity(FAM, &coeffs.pq, k, l)
}

/// `Cos_k⁻¹ = Cos_kᵀ + Sin_kᵀ Cos_k⁻ᵀ Sin_kᵀ` and
/// `Sin_k⁻¹ = Sin_kᵀ + Cos_kᵀ Sin_k⁻ᵀ Cos_kᵀ`, each `None` where the matrix
/// fails the pivot test.
pub fn closed_form_inverses(
    funcs: &TrigFunctions,
    k: usize,
    pivot_tol: f64,
) -> Result<(Option<Matrix>, Option<Matrix>)> {
    check_index(funcs, k)?;
    family::closed_form_inverses(FAM, &funcs.sin[k], &funcs.cos[k], pivot_tol)
}

fn check_index(funcs: &TrigFunctions, k: usize) -> Result<()> {
    if k >= funcs.len() {
        return Err(crate::error::Error::Index {
            index: k,
            max: funcs.len() - 1,
        });
    }
    Ok(())
}

/// `Sin±`, `Cos±` of two systems.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCombination {
    pub plus_sin: Vec<Matrix>,
    pub plus_cos: Vec<Matrix>,
    pub minus_sin: Vec<Matrix>,
    pub minus_cos: Vec<Matrix>,
}

impl PairCombination {
    pub fn sin(&self, sign: Sign) -> &[Matrix] {
        match sign {
            Sign::Plus => &self.plus_sin,
            Sign::Minus => &self.minus_sin,
        }
    }

    pub fn cos(&self, sign: Sign) -> &[Matrix] {
        match sign {
            Sign::Plus => &self.plus_cos,
            Sign::Minus => &self.minus_cos,
        }
    }

    /// `Tan±_k = (Cos±_k)⁻¹ Sin±_k`.
    pub fn tan(&self, sign: Sign, k: usize, pivot_tol: f64) -> Result<Matrix> {
        family::tangent(FAM, self.sin(sign), self.cos(sign), k, pivot_tol, false)
    }

    /// `Cotan±_k = (Sin±_k)⁻¹ Cos±_k`.
    pub fn cotan(&self, sign: Sign, k: usize, pivot_tol: f64) -> Result<Matrix> {
        family::tangent(FAM, self.sin(sign), self.cos(sign), k, pivot_tol, true)
    }
}

pub fn combine_pair(f1: &TrigFunctions, f2: &TrigFunctions) -> Result<PairCombination> {
    let (plus_sin, plus_cos, minus_sin, minus_cos) =
        family::combine(FAM, (&f1.sin, &f1.cos), (&f2.sin, &f2.cos))?;
    Ok(PairCombination {
        plus_sin,
        plus_cos,
        minus_sin,
        minus_cos,
    })
}

/// Direct evolution of the recurrence solved by `(Sin±, Cos±)`.
pub fn combination_system_step(
    f1_coeffs: &TrigCoefficients,
    f2_coeffs: &TrigCoefficients,
    sign: Sign,
) -> Result<Trajectory> {
    family::combination_recurrence(FAM, &f1_coeffs.pq, &f2_coeffs.pq, sign)
}

/// `X_k = 2 Sin_k Cos_kᵀ`, `U_k = Cos_k Cos_kᵀ - Sin_k Sin_kᵀ`.
pub fn double_angle(funcs: &TrigFunctions) -> Trajectory {
    family::double_angle(FAM, &funcs.sin, &funcs.cos)
}

/// The recurrence solved by [`double_angle`]: the plus-branch combination of
/// a system with itself.
pub fn double_angle_system_step(coeffs: &TrigCoefficients) -> Result<Trajectory> {
    family::combination_recurrence(FAM, &coeffs.pq, &coeffs.pq, Sign::Plus)
}

/// `Tan_k = Cos_k⁻¹ Sin_k`.
pub fn tangent(funcs: &TrigFunctions, k: usize, pivot_tol: f64) -> Result<Matrix> {
    family::tangent(FAM, &funcs.sin, &funcs.cos, k, pivot_tol, false)
}

/// `Cotan_k = Sin_k⁻¹ Cos_k`.
pub fn cotangent(funcs: &TrigFunctions, k: usize, pivot_tol: f64) -> Result<Matrix> {
    family::tangent(FAM, &funcs.sin, &funcs.cos, k, pivot_tol, true)
}

/// Every identity of the trigonometric family, in report order. Without a
/// `partner`, the second system of the two-system identities is generated
/// from `opts.partner_seed` and `opts.partner_amplitude`.
pub fn trig_identity_suite(
    coeffs: &TrigCoefficients,
    partner: Option<&TrigCoefficients>,
    opts: &SuiteOptions,
) -> Result<ResidualReport> {
    let generated;
    let partner = match partner {
        Some(p) => p,
        None => {
            generated = gen_trig(
                coeffs.n(),
                coeffs.horizon(),
                opts.partner_amplitude,
                opts.partner_seed,
            )?;
            &generated
        }
    };
    family::suite(FAM, &coeffs.pq, &partner.pq, opts)
}

/// Report ids produced by [`trig_identity_suite`], in order.
pub fn trig_suite_ids() -> Vec<String> {
    family::suite_ids(FAM)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    fn constant(phi: f64, steps: usize) -> TrigCoefficients {
        TrigCoefficients::from_angles(&vec![phi; steps]).unwrap()
    }

    fn scalar(m: &Matrix) -> f64 {
        m.get(0, 0)
    }

    #[test]
    fn identity_coefficients_validate_exactly() {
        let c = TrigCoefficients::new(vec![Matrix::identity(2); 3], vec![Matrix::zeros(2, 2); 3])
            .unwrap();
        let r = validate_trig(&c, 0.0);
        assert!(r.all_pass());
        let f = trig_functions(&c, 0).unwrap();
        assert!(f.sin.iter().all(|s| *s == Matrix::zeros(2, 2)));
        assert!(f.cos.iter().all(|c| *c == Matrix::identity(2)));
    }

    #[test]
    fn doubled_p_fails_validation() {
        let c = TrigCoefficients::new_unchecked(vec![Matrix::scalar(2.0)], vec![Matrix::scalar(0.0)])
            .unwrap();
        let r = validate_trig(&c, 1e-12);
        assert!(!r.get("eq10").unwrap().pass);
        assert!(TrigCoefficients::new(vec![Matrix::scalar(2.0)], vec![Matrix::scalar(0.0)]).is_err());
    }

    #[test]
    fn quarter_turns() {
        let f = trig_functions(&constant(FRAC_PI_2, 6), 0).unwrap();
        let expect = [0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0];
        for (s, e) in f.sin.iter().zip(expect) {
            assert!((scalar(s) - e).abs() < 1e-15);
        }
        let f = trig_functions(&constant(FRAC_PI_6, 4), 0).unwrap();
        assert!((scalar(&f.sin[3]) - 1.0).abs() < 1e-15);
        assert!(scalar(&f.cos[3]).abs() < 1e-15);
    }

    #[test]
    fn general_solution_matches_propagation() {
        let c = constant(0.4, 5);
        let x0 = Matrix::scalar(0.3);
        let u0 = Matrix::scalar(-1.7);
        let z = general_solution(&c, &x0, &u0).unwrap();
        let direct = crate::symplectic::propagate(&c.blocks(), &x0, &u0).unwrap();
        for (a, b) in z.x().iter().zip(direct.x()) {
            assert!((a - b).frobenius_norm() < 1e-14);
        }
        let f = trig_functions(&c, 0).unwrap();
        let z = general_solution(&c, &Matrix::scalar(1.0), &Matrix::scalar(0.0)).unwrap();
        for k in 0..f.len() {
            assert!((scalar(&z.u()[k]) + scalar(&f.sin[k])).abs() < 1e-15);
        }
    }

    #[test]
    fn rotation_twice_negates() {
        let f = trig_functions(&constant(0.7, 4), 0).unwrap();
        let z = Trajectory::new(f.sin.clone(), f.cos.clone()).unwrap();
        let r = rotate_solution(&rotate_solution(&z));
        for k in 0..z.len() {
            assert_eq!(r.x()[k], -&z.x()[k]);
            assert_eq!(r.u()[k], -&z.u()[k]);
        }
        let c = constant(0.7, 4);
        assert!(rotate_solution(&z).restep_residual(&c.blocks()).unwrap() < 1e-15);
    }

    #[test]
    fn shift_to_zero_is_the_identity_map() {
        let f = trig_functions(&constant(0.9, 6), 0).unwrap();
        let g = shifted_functions(&f, 0).unwrap();
        assert_eq!(f.sin, g.sin);
        let g = shifted_functions(&f, 3).unwrap();
        assert!(g.sin[3].frobenius_norm() < 1e-15);
        assert!((&g.cos[3] - &Matrix::identity(1)).frobenius_norm() < 1e-15);
    }

    #[test]
    fn scalar_inverses() {
        let f = trig_functions(&constant(FRAC_PI_3, 2), 0).unwrap();
        let (ci, si) = closed_form_inverses(&f, 1, 1e-12).unwrap();
        assert!((scalar(&ci.unwrap()) - 2.0).abs() < 1e-14);
        assert!((scalar(&si.unwrap()) - 2.0 / 3f64.sqrt()).abs() < 1e-14);
        let (ci, si) = closed_form_inverses(&f, 0, 1e-12).unwrap();
        assert_eq!(ci, Some(Matrix::identity(1)));
        assert!(si.is_none());
    }

    #[test]
    fn scalar_tangents() {
        let f = trig_functions(&constant(FRAC_PI_4, 2), 0).unwrap();
        assert!((scalar(&tangent(&f, 1, 1e-12).unwrap()) - 1.0).abs() < 1e-15);
        assert!((scalar(&cotangent(&f, 1, 1e-12).unwrap()) - 1.0).abs() < 1e-15);
        assert_eq!(tangent(&f, 0, 1e-12).unwrap(), Matrix::zeros(1, 1));
        assert!(matches!(
            cotangent(&f, 0, 1e-12),
            Err(crate::error::Error::Undefined { function: "Cotan", k: 0 })
        ));
    }

    #[test]
    fn scalar_addition_law() {
        let (a, b) = (0.3, 0.5);
        let f1 = trig_functions(&constant(a, 5), 0).unwrap();
        let f2 = trig_functions(&constant(b, 5), 0).unwrap();
        let comb = combine_pair(&f1, &f2).unwrap();
        for k in 0..f1.len() {
            let kf = k as f64;
            assert!((scalar(&comb.plus_sin[k]) - (kf * (a + b)).sin()).abs() < 1e-14);
            assert!((scalar(&comb.minus_cos[k]) - (kf * (a - b)).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn double_angle_scalar() {
        let phi = 0.35;
        let f = trig_functions(&constant(phi, 6), 0).unwrap();
        let d = double_angle(&f);
        for k in 0..f.len() {
            let t = 2.0 * k as f64 * phi;
            assert!((scalar(&d.x()[k]) - t.sin()).abs() < 1e-14);
            assert!((scalar(&d.u()[k]) - t.cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_system_suite_skips_every_cotangent() {
        let c = TrigCoefficients::new(vec![Matrix::identity(2); 4], vec![Matrix::zeros(2, 2); 4])
            .unwrap();
        let r = trig_identity_suite(&c, Some(&c), &SuiteOptions::trig()).unwrap();
        assert!(r.all_pass());
        for id in ["eq38", "eq39", "eq40", "eq47", "eq52", "inverse_sin"] {
            let rec = r.get(id).unwrap();
            assert_eq!(rec.evaluated, 0, "{id}");
            assert_eq!(rec.skipped_indices.len(), if id == "eq40" { 4 } else { 5 });
        }
        assert_eq!(r.get("eq35").unwrap().evaluated, 5);
        assert_eq!(r.ids(), trig_suite_ids());
    }
}
