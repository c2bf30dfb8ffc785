//! Shared machinery for trigonometric and hyperbolic systems.
//!
//! Both families are `X' = PX + QU`, `U' = σQX + PU` with `σ = -1`
//! (trigonometric) or `σ = +1` (hyperbolic). Every identity of one family
//! becomes the matching identity of the other after substituting `σ`, so the
//! identity suite is written once here and keyed by the trigonometric
//! equation number; [`Family::id`] maps keys to public report ids.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{invert, invert_scaled, Lu, Matrix, DEFAULT_PIVOT_TOL};
use crate::report::{scalar_residual, ResidualReport, Scaling, Tally};
use crate::symplectic::{
    check_block_recovery, check_normalized_conjoined, principal_solution, propagate,
    BlockSymplectic, Trajectory,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Family {
    Trig,
    Hyp,
}

impl Family {
    pub(crate) fn sigma(self) -> f64 {
        match self {
            Family::Trig => -1.0,
            Family::Hyp => 1.0,
        }
    }

    /// Public report id for an internal key.
    pub(crate) fn id(self, key: &str) -> String {
        match self {
            Family::Trig => match key.parse::<u32>() {
                Ok(n) => format!("eq{n}"),
                Err(_) => key.to_string(),
            },
            Family::Hyp => match key {
                "13" => "eq55".into(),
                "14" => "eq56".into(),
                "15" => "step_p".into(),
                "16" => "step_q".into(),
                "17" => "frobenius".into(),
                "inverse_cos" => "inverse_cosh".into(),
                "inverse_sin" => "inverse_sinh".into(),
                _ => match key.parse::<u32>() {
                    Ok(n) if n >= 18 => format!("eq{}", n + 39),
                    Ok(n) => format!("eq{n}"),
                    Err(_) => key.to_string(),
                },
            },
        }
    }

    fn scaling(self, key: &str) -> Scaling {
        match self {
            Family::Hyp => Scaling::Relative,
            Family::Trig => {
                let tangent = matches!(key.parse::<u32>(), Ok(35..=52));
                if tangent || key.starts_with("inverse_") {
                    Scaling::Relative
                } else {
                    Scaling::Absolute
                }
            }
        }
    }

    fn names(self) -> [&'static str; 4] {
        match self {
            Family::Trig => ["Tan", "Cotan", "Cos", "Sin"],
            Family::Hyp => ["Tanh", "Cotanh", "Cosh", "Sinh"],
        }
    }
}

/// Branch of a two-system combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Shape-checked `(P_k, Q_k)` for `k = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Pq {
    pub(crate) p: Vec<Matrix>,
    pub(crate) q: Vec<Matrix>,
}

impl Pq {
    pub(crate) fn new(p: Vec<Matrix>, q: Vec<Matrix>) -> Result<Self> {
        if p.is_empty() || p.len() != q.len() {
            return Err(Error::Shape(format!(
                "need N+1 >= 1 matrices each for P and Q, got {} and {}",
                p.len(),
                q.len()
            )));
        }
        let n = p[0].rows();
        if p.iter().chain(&q).any(|m| m.rows() != n || m.cols() != n) {
            return Err(Error::Shape(format!(
                "every P_k and Q_k must be {n}x{n}"
            )));
        }
        Ok(Self { p, q })
    }

    pub(crate) fn n(&self) -> usize {
        self.p[0].rows()
    }

    pub(crate) fn horizon(&self) -> usize {
        self.p.len() - 1
    }

    pub(crate) fn blocks(&self, fam: Family) -> Vec<BlockSymplectic> {
        self.p
            .iter()
            .zip(&self.q)
            .map(|(p, q)| {
                BlockSymplectic::new_unchecked(p.clone(), q.clone(), q * fam.sigma(), p.clone())
                    .expect("shapes checked on construction")
            })
            .collect()
    }
}

pub(crate) fn validate(fam: Family, pq: &Pq, tol: f64) -> ResidualReport {
    let sg = fam.sigma();
    let n = pq.n();
    let i = Matrix::identity(n);
    let (first, second) = match fam {
        Family::Trig => ("eq10", "eq11"),
        Family::Hyp => ("eq53", "eq54"),
    };
    let abs = Scaling::Absolute;
    let mut norm = Tally::new(first, abs, tol);
    let mut sym = Tally::new(second, abs, tol);
    let mut symp = Tally::new("symplectic", abs, tol);
    let mut recip = Tally::new("self_reciprocal", abs, tol);
    let mut p_inv = Tally::new("p_invertible", abs, 1.0);
    let mut plus = Tally::new("inverse_p_plus_q", abs, tol);
    let mut minus = Tally::new("inverse_p_minus_q", abs, tol);
    let mut pq_sym = Tally::new("p_inv_q_symmetric", abs, tol);

    for (k, (p, q)) in pq.p.iter().zip(&pq.q).enumerate() {
        let (pt, qt) = (p.t(), q.t());
        let a = &(&(&pt * p) - &(&(&qt * q) * sg)) - &i;
        let b = &(&(p * &pt) - &(&(q * &qt) * sg)) - &i;
        norm.record(a.frobenius_norm().max(b.frobenius_norm()));
        let a = &(&pt * q) - &(&qt * p);
        let b = &(p * &qt) - &(q * &pt);
        sym.record(a.frobenius_norm().max(b.frobenius_norm()));

        let s = BlockSymplectic::new_unchecked(p.clone(), q.clone(), q * sg, p.clone())
            .expect("shapes checked on construction");
        symp.record(s.symplectic_residual());

        match fam {
            Family::Trig => recip.record(s.reciprocity_residual()),
            Family::Hyp => {
                let lu = Lu::factor(p).expect("square");
                let ratio = lu.pivot_ratio(0.0);
                p_inv.record(DEFAULT_PIVOT_TOL / ratio);
                plus.record((&(&(p + q) * &(&pt - &qt)) - &i).frobenius_norm());
                minus.record((&(&(p - q) * &(&pt + &qt)) - &i).frobenius_norm());
                match invert(p, DEFAULT_PIVOT_TOL) {
                    Ok(pinv) => {
                        let m = &pinv * q;
                        pq_sym.record(m.asymmetry());
                    }
                    Err(_) => pq_sym.skip(k),
                }
            }
        }
    }
    let records = match fam {
        Family::Trig => vec![norm, sym, symp, recip],
        Family::Hyp => vec![norm, sym, symp, p_inv, plus, minus, pq_sym],
    };
    ResidualReport {
        records: records.into_iter().map(Tally::finish).collect(),
    }
}

/// First failing record as a validation error.
pub(crate) fn require_valid(report: &ResidualReport) -> Result<()> {
    match report.failures().next() {
        None => Ok(()),
        Some(r) => Err(Error::Validation {
            identity: r.id.clone(),
            residual: r.max_residual,
            tolerance: r.tolerance,
        }),
    }
}

/// `(Sin_{k;k0}, Cos_{k;k0})` or the hyperbolic pair.
pub(crate) fn functions(fam: Family, pq: &Pq, k0: usize) -> Result<(Vec<Matrix>, Vec<Matrix>)> {
    Ok(principal_solution(&pq.blocks(fam), k0)?.into_parts())
}

/// `X_k = C_k X_0 + S_k U_0`, `U_k = σS_k X_0 + C_k U_0`.
pub(crate) fn general_solution(
    fam: Family,
    s: &[Matrix],
    c: &[Matrix],
    x0: &Matrix,
    u0: &Matrix,
) -> Result<Trajectory> {
    let n = s[0].rows();
    if x0.rows() != n || u0.rows() != n || x0.cols() != u0.cols() {
        return Err(Error::Shape(format!(
            "initial values {}x{} and {}x{} do not fit dimension {n}",
            x0.rows(),
            x0.cols(),
            u0.rows(),
            u0.cols()
        )));
    }
    let sg = fam.sigma();
    let x = s.iter().zip(c).map(|(s, c)| &(c * x0) + &(s * u0)).collect();
    let u = s
        .iter()
        .zip(c)
        .map(|(s, c)| &(&(s * x0) * sg) + &(c * u0))
        .collect();
    Trajectory::new(x, u)
}

/// `(X, U) ↦ (U, σX)`.
pub(crate) fn twist(fam: Family, z: &Trajectory) -> Trajectory {
    let sg = fam.sigma();
    let x = z.u().to_vec();
    let u = z.x().iter().map(|m| m * sg).collect();
    Trajectory::new(x, u).expect("same shape as the input")
}

/// Shift of base-point-0 functions to base point `l`.
pub(crate) fn shifted(
    fam: Family,
    s: &[Matrix],
    c: &[Matrix],
    l: usize,
) -> Result<(Vec<Matrix>, Vec<Matrix>)> {
    if l >= s.len() {
        return Err(Error::Index {
            index: l,
            max: s.len() - 1,
        });
    }
    let sg = fam.sigma();
    let (slt, clt) = (s[l].t(), c[l].t());
    let sin = s
        .iter()
        .zip(c)
        .map(|(sk, ck)| &(sk * &clt) - &(ck * &slt))
        .collect();
    let cos = s
        .iter()
        .zip(c)
        .map(|(sk, ck)| &(ck * &clt) - &(&(sk * &slt) * sg))
        .collect();
    Ok((sin, cos))
}

/// Residuals of `S_{k;l} = -S_{l;k}ᵀ` and `C_{k;l} = C_{l;k}ᵀ` with both sides
/// taken from independently propagated principal solutions.
pub(crate) fn parity(fam: Family, pq: &Pq, k: usize, l: usize) -> Result<(f64, f64)> {
    let blocks = pq.blocks(fam);
    let zl = principal_solution(&blocks, l)?;
    let zk = principal_solution(&blocks, k)?;
    let (skl, ckl) = (&zl.x()[k], &zl.u()[k]);
    let (slk, clk) = (&zk.x()[l], &zk.u()[l]);
    let scale = match fam {
        Family::Trig => Scaling::Absolute,
        Family::Hyp => Scaling::Relative,
    };
    let slkt = slk.t();
    let clkt = clk.t();
    Ok((
        crate::report::residual(&(skl + &slkt), &[skl, &slkt], scale),
        crate::report::residual(&(ckl - &clkt), &[ckl, &clkt], scale),
    ))
}

/// `Cᵀ - σSᵀC⁻ᵀSᵀ` and `CᵀS⁻ᵀCᵀ - σSᵀ`, each only where the inverted factor
/// passes the pivot test.
pub(crate) fn closed_form_inverses(
    fam: Family,
    s: &Matrix,
    c: &Matrix,
    pivot_tol: f64,
) -> Result<(Option<Matrix>, Option<Matrix>)> {
    let cos_inv = gate(invert(c, pivot_tol))?.map(|ci| cos_inverse_formula(fam, s, c, &ci));
    let sin_inv = gate(invert(s, pivot_tol))?.map(|si| sin_inverse_formula(fam, s, c, &si));
    Ok((cos_inv, sin_inv))
}

fn gate(r: Result<Matrix>) -> Result<Option<Matrix>> {
    match r {
        Ok(m) => Ok(Some(m)),
        Err(Error::Singular { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn cos_inverse_formula(fam: Family, s: &Matrix, c: &Matrix, c_inv: &Matrix) -> Matrix {
    let st = s.t();
    &c.t() - &(&(&(&st * &c_inv.t()) * &st) * fam.sigma())
}

fn sin_inverse_formula(fam: Family, s: &Matrix, c: &Matrix, s_inv: &Matrix) -> Matrix {
    let ct = c.t();
    &(&(&ct * &s_inv.t()) * &ct) - &(&s.t() * fam.sigma())
}

/// `Tan = C⁻¹S` (`cot = false`) or `Cotan = S⁻¹C` (`cot = true`).
pub(crate) fn tangent(
    fam: Family,
    s: &[Matrix],
    c: &[Matrix],
    k: usize,
    pivot_tol: f64,
    cot: bool,
) -> Result<Matrix> {
    if k >= s.len() {
        return Err(Error::Index {
            index: k,
            max: s.len() - 1,
        });
    }
    let (den, num) = if cot { (&s[k], &c[k]) } else { (&c[k], &s[k]) };
    let names = fam.names();
    let function = if cot { names[1] } else { names[0] };
    match invert(den, pivot_tol) {
        Ok(inv) => Ok(&inv * num),
        Err(Error::Singular { .. }) => Err(Error::Undefined { function, k }),
        Err(e) => Err(e),
    }
}

/// Sum and difference products `(S⁺, C⁺, S⁻, C⁻)` at every index.
pub(crate) type Combination = (Vec<Matrix>, Vec<Matrix>, Vec<Matrix>, Vec<Matrix>);

pub(crate) fn combine(
    fam: Family,
    (s1, c1): (&[Matrix], &[Matrix]),
    (s2, c2): (&[Matrix], &[Matrix]),
) -> Result<Combination> {
    if s1.len() != s2.len() || s1[0].rows() != s2[0].rows() {
        return Err(Error::Shape(
            "combined systems differ in dimension or horizon".into(),
        ));
    }
    let sg = fam.sigma();
    let len = s1.len();
    let mut out: Combination = (
        Vec::with_capacity(len),
        Vec::with_capacity(len),
        Vec::with_capacity(len),
        Vec::with_capacity(len),
    );
    for k in 0..len {
        let (c2t, s2t) = (c2[k].t(), s2[k].t());
        let sc = &s1[k] * &c2t;
        let cs = &c1[k] * &s2t;
        let cc = &c1[k] * &c2t;
        let ss = &(&s1[k] * &s2t) * sg;
        out.0.push(&sc + &cs);
        out.1.push(&cc + &ss);
        out.2.push(&sc - &cs);
        out.3.push(&cc - &ss);
    }
    Ok(out)
}

/// Evolves the (non-symplectic) recurrence solved by the `sign` branch of
/// [`combine`], from `X_0 = 0`, `U_0 = I`.
pub(crate) fn combination_recurrence(
    fam: Family,
    pq1: &Pq,
    pq2: &Pq,
    sign: Sign,
) -> Result<Trajectory> {
    if pq1.n() != pq2.n() || pq1.horizon() != pq2.horizon() {
        return Err(Error::Shape(
            "combined systems differ in dimension or horizon".into(),
        ));
    }
    let sg = fam.sigma();
    let tau = sign.factor();
    let n = pq1.n();
    let mut xs = vec![Matrix::zeros(n, n)];
    let mut us = vec![Matrix::identity(n)];
    for k in 0..pq1.p.len() {
        let (p1, q1) = (&pq1.p[k], &pq1.q[k]);
        let (p2t, q2t) = (pq2.p[k].t(), pq2.q[k].t());
        let (x, u) = (&xs[k], &us[k]);
        let a = &(x * &p2t) + &(&(u * &q2t) * tau);
        let b = &(&(x * &q2t) * (tau * sg)) + &(u * &p2t);
        let nx = &(p1 * &a) + &(q1 * &b);
        let nu = &(&(q1 * &a) * sg) + &(p1 * &b);
        xs.push(nx);
        us.push(nu);
    }
    Trajectory::new(xs, us)
}

/// `X = 2SCᵀ`, `U = CCᵀ + σSSᵀ`.
pub(crate) fn double_angle(fam: Family, s: &[Matrix], c: &[Matrix]) -> Trajectory {
    let sg = fam.sigma();
    let x = s.iter().zip(c).map(|(s, c)| &(s * &c.t()) * 2.0).collect();
    let u = s
        .iter()
        .zip(c)
        .map(|(s, c)| &(c * &c.t()) + &(&(s * &s.t()) * sg))
        .collect();
    Trajectory::new(x, u).expect("same shape as the input")
}

/// Suite parameters shared by both families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub tol: f64,
    /// Invertibility gate: `min pivot >= pivot_tol * max(1, max|a_ij|)`.
    pub pivot_tol: f64,
    pub partner_seed: u64,
    pub partner_amplitude: f64,
}

pub const DEFAULT_SUITE_PIVOT_TOL: f64 = 1e-4;
pub const DEFAULT_PARTNER_SEED: u64 = 1;

impl SuiteOptions {
    pub fn trig() -> Self {
        Self {
            tol: 1e-10,
            pivot_tol: DEFAULT_SUITE_PIVOT_TOL,
            partner_seed: DEFAULT_PARTNER_SEED,
            partner_amplitude: 1.0,
        }
    }

    pub fn hyperbolic() -> Self {
        Self {
            tol: 1e-8,
            pivot_tol: DEFAULT_SUITE_PIVOT_TOL,
            partner_seed: DEFAULT_PARTNER_SEED,
            partner_amplitude: 0.5,
        }
    }

    pub fn with_tol(self, tol: f64) -> Self {
        Self { tol, ..self }
    }

    pub fn with_partner_seed(self, partner_seed: u64) -> Self {
        Self {
            partner_seed,
            ..self
        }
    }
}

/// Report keys in output order, keyed by trigonometric equation number.
const SUITE_KEYS: &[&str] = &[
    "4", "5", "6", "7", "8", "9", "wronskian", "13", "14", "15", "16", "17", "18", "19", "20",
    "21", "22", "28", "29", "30", "31", "comb_plus_recurrence", "comb_minus_recurrence",
    "double_angle_recurrence", "double_angle_commute", "32", "33", "34", "inverse_cos",
    "inverse_sin", "35", "36", "37", "38", "39", "40", "41", "42", "43", "44", "45", "46", "47",
    "48", "49", "50", "51", "52",
];

/// Public ids of the suite, in report order.
pub(crate) fn suite_ids(fam: Family) -> Vec<String> {
    SUITE_KEYS.iter().map(|k| fam.id(k)).collect()
}

struct Book {
    tallies: Vec<Tally>,
    index: HashMap<&'static str, usize>,
}

type Eval = Option<(Matrix, Vec<Matrix>)>;

impl Book {
    fn new(fam: Family, tol: f64) -> Self {
        let tallies = SUITE_KEYS
            .iter()
            .map(|k| Tally::new(fam.id(k), fam.scaling(k), tol))
            .collect();
        let index = SUITE_KEYS.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        Self { tallies, index }
    }

    fn tally(&mut self, key: &str) -> &mut Tally {
        let i = self.index[key];
        &mut self.tallies[i]
    }

    fn check(&mut self, key: &str, diff: &Matrix, terms: &[&Matrix]) {
        self.tally(key).check(diff, terms);
    }

    /// Evaluates where every needed inverse exists, otherwise marks `k` skipped.
    fn gated(&mut self, key: &str, k: usize, eval: impl FnOnce() -> Eval) {
        match eval() {
            Some((diff, terms)) => {
                let refs: Vec<&Matrix> = terms.iter().collect();
                self.tally(key).check(&diff, &refs);
            }
            None => self.tally(key).skip(k),
        }
    }

    fn finish(self) -> ResidualReport {
        ResidualReport {
            records: self.tallies.into_iter().map(Tally::finish).collect(),
        }
    }
}

/// Every identity of the family for the system `pq1`, with `pq2` as the
/// second system of the two-system identities.
pub(crate) fn suite(fam: Family, pq1: &Pq, pq2: &Pq, opts: &SuiteOptions) -> Result<ResidualReport> {
    if pq1.n() != pq2.n() || pq1.horizon() != pq2.horizon() {
        return Err(Error::Shape(
            "partner system differs in dimension or horizon".into(),
        ));
    }
    if !(opts.pivot_tol > 0.0) {
        return Err(Error::Domain(format!(
            "pivot tolerance must be positive, got {}",
            opts.pivot_tol
        )));
    }
    let sg = fam.sigma();
    let n = pq1.n();
    let i = Matrix::identity(n);
    let zero = Matrix::zeros(n, n);
    let mut book = Book::new(fam, opts.tol);
    let base_scaling = fam.scaling("4");

    let blocks = pq1.blocks(fam);
    let principal = principal_solution(&blocks, 0)?;
    let dual = propagate(&blocks, &i, &zero)?;
    let conj = check_normalized_conjoined(&dual, &principal, opts.tol, base_scaling)?;
    let recovered = check_block_recovery(&blocks, &dual, &principal, opts.tol, base_scaling)?;
    for (key, rec) in ["4", "5", "6", "7", "8", "9"]
        .into_iter()
        .zip(conj.records.into_iter().chain(recovered))
    {
        let i = book.index[key];
        book.tallies[i] = Tally::from_record(rec);
    }

    let (s1, c1) = (principal.x(), principal.u());
    let (dx, du) = (dual.x(), dual.u());
    let len = s1.len();

    let w0 = &(&dx[0].t() * &c1[0]) - &(&du[0].t() * &s1[0]);
    for k in 0..len {
        let a = &dx[k].t() * &c1[k];
        let b = &du[k].t() * &s1[k];
        book.check("wronskian", &(&(&a - &b) - &w0), &[&a, &b]);
    }

    // Pythagorean, cross, step and Frobenius identities.
    for k in 0..len {
        let (s, c) = (&s1[k], &c1[k]);
        let (st, ct) = (s.t(), c.t());
        let ctc = &ct * c;
        let sts = &(&st * s) * sg;
        let cct = c * &ct;
        let sst = &(s * &st) * sg;
        let r1 = crate::report::residual(&(&(&ctc - &sts) - &i), &[&ctc, &sts, &i], base_scaling);
        let r2 = crate::report::residual(&(&(&cct - &sst) - &i), &[&cct, &sst, &i], base_scaling);
        book.tally("13").record(r1.max(r2));

        let cts = &ct * s;
        let stc = &st * c;
        let cst = c * &st;
        let sct = s * &ct;
        let r1 = crate::report::residual(&(&cts - &stc), &[&cts, &stc], base_scaling);
        let r2 = crate::report::residual(&(&cst - &sct), &[&cst, &sct], base_scaling);
        book.tally("14").record(r1.max(r2));

        if k + 1 < len {
            let (sn, cn) = (&s1[k + 1], &c1[k + 1]);
            let a = cn * &ct;
            let b = &(sn * &st) * sg;
            book.check("15", &(&(&a - &b) - &pq1.p[k]), &[&a, &b, &pq1.p[k]]);
            let a = sn * &ct;
            let b = cn * &st;
            book.check("16", &(&(&a - &b) - &pq1.q[k]), &[&a, &b, &pq1.q[k]]);
        }

        let cf = c.frobenius_norm().powi(2);
        let sf = s.frobenius_norm().powi(2);
        let nf = n as f64;
        let r = scalar_residual(cf - sg * sf - nf, &[cf, sf, nf], base_scaling);
        book.tally("17").record(r);
    }

    // Shifted base points, reconstruction and parity over all index pairs.
    let shifted_all: Vec<Trajectory> = (0..len)
        .map(|l| principal_solution(&blocks, l))
        .collect::<Result<_>>()?;
    for l in 0..len {
        let (sl, cl) = (&s1[l], &c1[l]);
        let (slt, clt) = (sl.t(), cl.t());
        let zl = &shifted_all[l];
        for k in 0..len {
            let (skl, ckl) = (&zl.x()[k], &zl.u()[k]);
            let a = &s1[k] * &clt;
            let b = &c1[k] * &slt;
            book.check("18", &(&(&a - &b) - skl), &[&a, &b, skl]);
            let a = &c1[k] * &clt;
            let b = &(&s1[k] * &slt) * sg;
            book.check("19", &(&(&a - &b) - ckl), &[&a, &b, ckl]);

            let a = skl * cl;
            let b = ckl * sl;
            book.check("20", &(&(&a + &b) - &s1[k]), &[&a, &b, &s1[k]]);
            let a = ckl * cl;
            let b = &(skl * sl) * sg;
            book.check("21", &(&(&a + &b) - &c1[k]), &[&a, &b, &c1[k]]);

            let (slk, clk) = (&shifted_all[k].x()[l], &shifted_all[k].u()[l]);
            let slkt = slk.t();
            let clkt = clk.t();
            let r1 = crate::report::residual(&(skl + &slkt), &[skl, &slkt], base_scaling);
            let r2 = crate::report::residual(&(ckl - &clkt), &[ckl, &clkt], base_scaling);
            book.tally("22").record(r1.max(r2));
        }
    }
    drop(shifted_all);

    // Two-system identities.
    let (s2v, c2v) = functions(fam, pq2, 0)?;
    let (sp, cp, sm, cm) = combine(fam, (s1, c1), (&s2v, &c2v))?;
    for k in 0..len {
        for (key_pyth, key_cross, s, c) in [("28", "30", &sp[k], &cp[k]), ("29", "31", &sm[k], &cm[k])] {
            let (st, ct) = (s.t(), c.t());
            let a = c * &ct;
            let b = &(s * &st) * sg;
            let r1 = crate::report::residual(&(&(&a - &b) - &i), &[&a, &b, &i], base_scaling);
            let a = &ct * c;
            let b = &(&st * s) * sg;
            let r2 = crate::report::residual(&(&(&a - &b) - &i), &[&a, &b, &i], base_scaling);
            book.tally(key_pyth).record(r1.max(r2));

            let a = s * &ct;
            let b = c * &st;
            let r1 = crate::report::residual(&(&a - &b), &[&a, &b], base_scaling);
            let a = &st * c;
            let b = &ct * s;
            let r2 = crate::report::residual(&(&a - &b), &[&a, &b], base_scaling);
            book.tally(key_cross).record(r1.max(r2));
        }
    }
    for (key, sign, (xs, us)) in [
        ("comb_plus_recurrence", Sign::Plus, (&sp, &cp)),
        ("comb_minus_recurrence", Sign::Minus, (&sm, &cm)),
    ] {
        let z = combination_recurrence(fam, pq1, pq2, sign)?;
        for k in 0..len {
            let r1 = crate::report::residual(&(&z.x()[k] - &xs[k]), &[&z.x()[k], &xs[k]], base_scaling);
            let r2 = crate::report::residual(&(&z.u()[k] - &us[k]), &[&z.u()[k], &us[k]], base_scaling);
            book.tally(key).record(r1.max(r2));
        }
    }
    let dbl = double_angle(fam, s1, c1);
    let dbl_rec = combination_recurrence(fam, pq1, pq1, Sign::Plus)?;
    for k in 0..len {
        let (x, u) = (&dbl.x()[k], &dbl.u()[k]);
        let (rx, ru) = (&dbl_rec.x()[k], &dbl_rec.u()[k]);
        let r1 = crate::report::residual(&(rx - x), &[rx, x], base_scaling);
        let r2 = crate::report::residual(&(ru - u), &[ru, u], base_scaling);
        book.tally("double_angle_recurrence").record(r1.max(r2));
        let xu = x * u;
        let ux = u * x;
        book.check("double_angle_commute", &(&xu - &ux), &[&xu, &ux]);
    }
    for k in 0..len {
        let (s2t, c2t) = (s2v[k].t(), c2v[k].t());
        let half = |a: &Matrix, b: &Matrix, f: f64| &(a + b) * (0.5 * f);
        let lhs = &s1[k] * &s2t;
        let rhs = half(&cp[k], &(-&cm[k]), sg);
        book.check("32", &(&lhs - &rhs), &[&lhs, &cp[k], &cm[k]]);
        let lhs = &c1[k] * &c2t;
        let rhs = half(&cp[k], &cm[k], 1.0);
        book.check("33", &(&lhs - &rhs), &[&lhs, &cp[k], &cm[k]]);
        let lhs = &s1[k] * &c2t;
        let rhs = half(&sp[k], &sm[k], 1.0);
        book.check("34", &(&lhs - &rhs), &[&lhs, &sp[k], &sm[k]]);
    }

    // Inverses and the tangent family, gated per index.
    let inv = |m: &Matrix| invert_scaled(m, opts.pivot_tol, 1.0).ok();
    let ic1: Vec<Option<Matrix>> = c1.iter().map(inv).collect();
    let is1: Vec<Option<Matrix>> = s1.iter().map(inv).collect();
    let ic2: Vec<Option<Matrix>> = c2v.iter().map(inv).collect();
    let is2: Vec<Option<Matrix>> = s2v.iter().map(inv).collect();
    let tan = |ic: &Option<Matrix>, s: &Matrix| ic.as_ref().map(|ic| ic * s);

    for k in 0..len {
        let (s, c) = (&s1[k], &c1[k]);
        let t1 = tan(&ic1[k], s);
        let k1 = tan(&is1[k], c);
        let t2 = tan(&ic2[k], &s2v[k]);
        let k2 = tan(&is2[k], &c2v[k]);
        let (ic, is) = (ic1[k].as_ref(), is1[k].as_ref());
        let (ic2k, is2k) = (ic2[k].as_ref(), is2[k].as_ref());

        book.gated("inverse_cos", k, || {
            let ci = ic?;
            let f = cos_inverse_formula(fam, s, c, ci);
            Some((ci - &f, vec![ci.clone(), f]))
        });
        book.gated("inverse_sin", k, || {
            let si = is?;
            let f = sin_inverse_formula(fam, s, c, si);
            Some((si - &f, vec![si.clone(), f]))
        });

        book.gated("35", k, || {
            let t = t1.as_ref()?;
            Some((t - &t.t(), vec![t.clone()]))
        });
        book.gated("36", k, || {
            let (ci, t) = (ic?, t1.as_ref()?);
            let a = ci * &ci.t();
            let t2 = &(t * t) * sg;
            Some((&(&a - &i) + &t2, vec![a, i.clone(), t2]))
        });
        if k + 1 < len {
            book.gated("37", k, || {
                let (ci, cin, t) = (ic?, ic1[k + 1].as_ref()?, t1.as_ref()?);
                let tn = cin * &s1[k + 1];
                let rhs = &(cin * &pq1.q[k]) * &ci.t();
                Some((&(&tn - t) - &rhs, vec![tn, t.clone(), rhs]))
            });
        }
        book.gated("38", k, || {
            let kk = k1.as_ref()?;
            Some((kk - &kk.t(), vec![kk.clone()]))
        });
        book.gated("39", k, || {
            let (si, kk) = (is?, k1.as_ref()?);
            let a = si * &si.t();
            let k2m = kk * kk;
            let si_ = &i * sg;
            Some((&(&a - &k2m) + &si_, vec![a, k2m, i.clone()]))
        });
        if k + 1 < len {
            book.gated("40", k, || {
                let (si, sin, kk) = (is?, is1[k + 1].as_ref()?, k1.as_ref()?);
                let kn = sin * &c1[k + 1];
                let rhs = &(sin * &pq1.q[k]) * &si.t();
                Some((&(&kn - kk) + &rhs, vec![kn, kk.clone(), rhs]))
            });
        }

        book.gated("41", k, || {
            let (t1, t2, k1, k2) = (t1.as_ref()?, t2.as_ref()?, k1.as_ref()?, k2.as_ref()?);
            let lhs = t1 + t2;
            let rhs = &(t1 * &(k1 + k2)) * t2;
            Some((&lhs - &rhs, vec![lhs, rhs]))
        });
        book.gated("42", k, || {
            let (t1, t2, k1, k2) = (t1.as_ref()?, t2.as_ref()?, k1.as_ref()?, k2.as_ref()?);
            let lhs = t1 - t2;
            let rhs = &(t1 * &(k2 - k1)) * t2;
            Some((&lhs - &rhs, vec![lhs, rhs]))
        });
        book.gated("43", k, || {
            let (t1, t2, ci1, ci2) = (t1.as_ref()?, t2.as_ref()?, ic?, ic2k?);
            let lhs = t1 + t2;
            let rhs = &(ci2 * &sp[k].t()) * &ci1.t();
            Some((&lhs - &rhs, vec![lhs, rhs]))
        });
        book.gated("44", k, || {
            let (t1, t2, ci1, ci2) = (t1.as_ref()?, t2.as_ref()?, ic?, ic2k?);
            let lhs = t1 - t2;
            let rhs = &(ci2 * &sm[k].t()) * &ci1.t();
            Some((&lhs - &rhs, vec![lhs, rhs]))
        });
        for (key, sign, s_pm, c_pm) in [("45", 1.0, &sp[k], &cp[k]), ("46", -1.0, &sm[k], &cm[k])] {
            book.gated(key, k, || {
                let (t1, t2, ci2) = (t1.as_ref()?, t2.as_ref()?, ic2k?);
                let t_pm = &inv(c_pm)? * s_pm;
                let mid = inv(&(&i + &(&(t1 * t2) * (sign * sg))))?;
                let num = &(t1 + &(t2 * sign)) * &c2v[k].t();
                let rhs = &(&ci2.t() * &mid) * &num;
                Some((&t_pm - &rhs, vec![t_pm, rhs]))
            });
        }
        book.gated("47", k, || {
            let (t1, t2, k1, k2) = (t1.as_ref()?, t2.as_ref()?, k1.as_ref()?, k2.as_ref()?);
            let lhs = k1 + k2;
            let rhs = &(k1 * &(t1 + t2)) * k2;
            Some((&lhs - &rhs, vec![lhs, rhs]))
        });
        book.gated("48", k, || {
            let (t1, t2, k1, k2) = (t1.as_ref()?, t2.as_ref()?, k1.as_ref()?, k2.as_ref()?);
            let lhs = k1 - k2;
            let rhs = &(k1 * &(t2 - t1)) * k2;
            Some((&lhs - &rhs, vec![lhs, rhs]))
        });
        book.gated("49", k, || {
            let (k1, k2, si1, si2) = (k1.as_ref()?, k2.as_ref()?, is?, is2k?);
            let lhs = k1 + k2;
            let rhs = &(si2 * &sp[k].t()) * &si1.t();
            Some((&lhs - &rhs, vec![lhs, rhs]))
        });
        book.gated("50", k, || {
            let (k1, k2, si1, si2) = (k1.as_ref()?, k2.as_ref()?, is?, is2k?);
            let lhs = k1 - k2;
            let rhs = -&(&(si2 * &sm[k].t()) * &si1.t());
            Some((&lhs - &rhs, vec![lhs, rhs]))
        });
        for (key, sign, s_pm, c_pm) in [("51", 1.0, &sp[k], &cp[k]), ("52", -1.0, &sm[k], &cm[k])] {
            book.gated(key, k, || {
                let (k1, k2, si2) = (k1.as_ref()?, k2.as_ref()?, is2k?);
                let k_pm = &inv(s_pm)? * c_pm;
                // Plus branch: (k1 + k2)⁻¹(k1k2 + σI); minus: (k2 - k1)⁻¹(k1k2 - σI).
                let sum = if sign > 0.0 { k1 + k2 } else { k2 - k1 };
                let mid = inv(&sum)?;
                let num = &(&(k1 * k2) + &(&i * (sign * sg))) * &s2v[k].t();
                let rhs = &(&si2.t() * &mid) * &num;
                Some((&k_pm - &rhs, vec![k_pm, rhs]))
            });
        }
    }

    Ok(book.finish())
}
