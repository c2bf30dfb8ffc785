//! On-disk formats and the four batch commands behind the `symtrig` binary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use symtrig_core::generators::{gen_hyp, gen_trig};
use symtrig_core::hyperbolic::{
    hyp_functions, hyp_identity_suite, validate_hyp, HypCoefficients,
};
use symtrig_core::symplectic::{
    check_block_recovery, check_normalized_conjoined, principal_solution, propagate,
    wronskian_drift, BlockSymplectic,
};
use symtrig_core::trig::{
    trig_functions, trig_identity_suite, validate_trig, TrigCoefficients, VALIDATION_TOL,
};
use symtrig_core::{IdentityRecord, Matrix, ResidualReport, Scaling, SuiteOptions};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot load coefficients: {0}")]
    Load(String),

    #[error("coefficients failed validation")]
    Invalid(ResidualReport),

    #[error(transparent)]
    Core(#[from] symtrig_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Load(_) | CliError::Invalid(_) => 2,
            CliError::Usage(_) | CliError::Io { .. } | CliError::Core(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Trig,
    Hyperbolic,
    Symplectic,
}

/// Coefficient sequence as stored on disk. Each matrix is a flat row-major
/// array of `n²` numbers; every block array holds `N + 1` of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct CoefficientFile {
    pub kind: Kind,
    pub n: usize,
    pub N: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub P: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub Q: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub A: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub B: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub C: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub D: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign_diag: Option<Vec<f64>>,
}

/// A loaded, shape-checked but not yet validated system.
#[derive(Debug, Clone)]
pub enum System {
    Trig(TrigCoefficients),
    Hyperbolic(HypCoefficients),
    Symplectic(Vec<BlockSymplectic>),
}

fn flatten(ms: &[Matrix]) -> Vec<Vec<f64>> {
    ms.iter().map(|m| m.as_slice().to_vec()).collect()
}

impl CoefficientFile {
    fn pq(kind: Kind, p: &[Matrix], q: &[Matrix]) -> Self {
        CoefficientFile {
            kind,
            n: p[0].rows(),
            N: p.len() - 1,
            P: Some(flatten(p)),
            Q: Some(flatten(q)),
            A: None,
            B: None,
            C: None,
            D: None,
            seed: None,
            amplitude: None,
            sign_diag: None,
        }
    }

    pub fn from_trig(c: &TrigCoefficients) -> Self {
        Self::pq(Kind::Trig, c.p(), c.q())
    }

    pub fn from_hyp(c: &HypCoefficients) -> Self {
        Self::pq(Kind::Hyperbolic, c.p(), c.q())
    }

    pub fn from_symplectic(seq: &[BlockSymplectic]) -> Self {
        let blocks = |f: fn(&BlockSymplectic) -> &Matrix| {
            Some(seq.iter().map(|s| f(s).as_slice().to_vec()).collect())
        };
        CoefficientFile {
            kind: Kind::Symplectic,
            n: seq[0].n(),
            N: seq.len() - 1,
            P: None,
            Q: None,
            A: blocks(BlockSymplectic::a),
            B: blocks(BlockSymplectic::b),
            C: blocks(BlockSymplectic::c),
            D: blocks(BlockSymplectic::d),
            seed: None,
            amplitude: None,
            sign_diag: None,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::Load(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("plain data serializes");
        text.push('\n');
        fs::write(path, text).map_err(io_err(path))
    }

    fn matrices(&self, name: &str, field: &Option<Vec<Vec<f64>>>) -> Result<Vec<Matrix>> {
        let arrays = field
            .as_ref()
            .ok_or_else(|| CliError::Load(format!("missing {name} for kind {:?}", self.kind)))?;
        if arrays.len() != self.N + 1 {
            return Err(CliError::Load(format!(
                "{name} holds {} matrices, expected N + 1 = {}",
                arrays.len(),
                self.N + 1
            )));
        }
        arrays
            .iter()
            .enumerate()
            .map(|(k, a)| {
                if a.len() != self.n * self.n {
                    return Err(CliError::Load(format!(
                        "{name}[{k}] holds {} numbers, expected n² = {}",
                        a.len(),
                        self.n * self.n
                    )));
                }
                Matrix::from_row_major(self.n, self.n, a.clone())
                    .map_err(|e| CliError::Load(format!("{name}[{k}]: {e}")))
            })
            .collect()
    }

    /// Shape checks only; see [`validate`] for the algebraic conditions.
    pub fn to_system(&self) -> Result<System> {
        if self.n == 0 {
            return Err(CliError::Load("n must be at least 1".into()));
        }
        let load = |e: symtrig_core::Error| CliError::Load(e.to_string());
        Ok(match self.kind {
            Kind::Trig => System::Trig(
                TrigCoefficients::new_unchecked(
                    self.matrices("P", &self.P)?,
                    self.matrices("Q", &self.Q)?,
                )
                .map_err(load)?,
            ),
            Kind::Hyperbolic => System::Hyperbolic(
                HypCoefficients::new_unchecked(
                    self.matrices("P", &self.P)?,
                    self.matrices("Q", &self.Q)?,
                )
                .map_err(load)?,
            ),
            Kind::Symplectic => {
                let a = self.matrices("A", &self.A)?;
                let b = self.matrices("B", &self.B)?;
                let c = self.matrices("C", &self.C)?;
                let d = self.matrices("D", &self.D)?;
                let seq = a
                    .into_iter()
                    .zip(b)
                    .zip(c)
                    .zip(d)
                    .map(|(((a, b), c), d)| BlockSymplectic::new_unchecked(a, b, c, d))
                    .collect::<symtrig_core::Result<Vec<_>>>()
                    .map_err(load)?;
                System::Symplectic(seq)
            }
        })
    }
}

impl System {
    pub fn kind(&self) -> Kind {
        match self {
            System::Trig(_) => Kind::Trig,
            System::Hyperbolic(_) => Kind::Hyperbolic,
            System::Symplectic(_) => Kind::Symplectic,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            System::Trig(c) => c.n(),
            System::Hyperbolic(c) => c.n(),
            System::Symplectic(s) => s[0].n(),
        }
    }

    pub fn horizon(&self) -> usize {
        match self {
            System::Trig(c) => c.horizon(),
            System::Hyperbolic(c) => c.horizon(),
            System::Symplectic(s) => s.len() - 1,
        }
    }

    pub fn blocks(&self) -> Vec<BlockSymplectic> {
        match self {
            System::Trig(c) => c.blocks(),
            System::Hyperbolic(c) => c.blocks(),
            System::Symplectic(s) => s.clone(),
        }
    }

    /// Kind-specific coefficient conditions at `tol`.
    pub fn validate(&self, tol: f64) -> ResidualReport {
        match self {
            System::Trig(c) => validate_trig(c, tol),
            System::Hyperbolic(c) => validate_hyp(c, tol),
            System::Symplectic(seq) => {
                let residuals: Vec<f64> = seq.iter().map(|s| s.symplectic_residual()).collect();
                ResidualReport {
                    records: vec![record("symplectic", &residuals, tol, Scaling::Absolute)],
                }
            }
        }
    }
}

fn record(id: &str, residuals: &[f64], tol: f64, scaling: Scaling) -> IdentityRecord {
    let max_residual = residuals
        .iter()
        .map(|r| if r.is_finite() { *r } else { f64::MAX })
        .fold(0.0, f64::max);
    IdentityRecord {
        id: id.into(),
        max_residual,
        tolerance: tol,
        pass: max_residual <= tol,
        scaling,
        evaluated: residuals.len(),
        skipped_indices: Vec::new(),
    }
}

pub fn load(path: &Path) -> Result<System> {
    CoefficientFile::read(path)?.to_system()
}

/// Loads and rejects anything failing validation at [`VALIDATION_TOL`].
pub fn load_valid(path: &Path) -> Result<System> {
    let system = load(path)?;
    let report = system.validate(VALIDATION_TOL);
    if !report.all_pass() {
        return Err(CliError::Invalid(report));
    }
    Ok(system)
}

pub struct GenerateArgs<'a> {
    pub kind: Kind,
    pub n: usize,
    pub horizon: usize,
    pub amplitude: Option<f64>,
    pub seed: u64,
    pub sign_diag: Option<&'a [f64]>,
}

pub fn cmd_generate(args: &GenerateArgs, out: &Path) -> Result<CoefficientFile> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let usage = |e: symtrig_core::Error| CliError::Usage(e.to_string());
    let mut file = match args.kind {
        Kind::Trig => {
            if args.sign_diag.is_some() {
                return Err(CliError::Usage("--sign-diag applies to hyperbolic only".into()));
            }
            let amplitude = args.amplitude.unwrap_or(1.0);
            let mut f = CoefficientFile::from_trig(
                &gen_trig(args.n, args.horizon, amplitude, args.seed).map_err(usage)?,
            );
            f.amplitude = Some(amplitude);
            f
        }
        Kind::Hyperbolic => {
            let amplitude = args.amplitude.unwrap_or(0.5);
            let c = gen_hyp(args.n, args.horizon, amplitude, args.sign_diag, args.seed)
                .map_err(usage)?;
            let mut f = CoefficientFile::from_hyp(&c);
            f.amplitude = Some(amplitude);
            f.sign_diag = args.sign_diag.map(<[f64]>::to_vec);
            f
        }
        Kind::Symplectic => {
            return Err(CliError::Usage(
                "generate supports --kind trig or hyperbolic".into(),
            ))
        }
    };
    file.seed = Some(args.seed);
    file.write(out)?;
    Ok(file)
}

/// Principal solution at `k0` as CSV rows `k,i,j,X,U`.
pub fn cmd_simulate(coeffs: &Path, k0: usize, out: &Path) -> Result<usize> {
    let system = load_valid(coeffs)?;
    let max = system.horizon() + 1;
    if k0 > max {
        return Err(CliError::Usage(format!("--k0 {k0} is outside 0..={max}")));
    }
    let z = principal_solution(&system.blocks(), k0)?;
    let mut w = csv::Writer::from_path(out).map_err(|e| csv_err(out, e))?;
    w.write_record(["k", "i", "j", "X", "U"]).map_err(|e| csv_err(out, e))?;
    let n = system.n();
    let mut rows = 0;
    for (k, (x, u)) in z.x().iter().zip(z.u()).enumerate() {
        for i in 0..n {
            for j in 0..n {
                w.write_record([
                    k.to_string(),
                    i.to_string(),
                    j.to_string(),
                    format!("{:.16e}", x.get(i, j)),
                    format!("{:.16e}", u.get(i, j)),
                ])
                .map_err(|e| csv_err(out, e))?;
                rows += 1;
            }
        }
    }
    w.flush().map_err(io_err(out))?;
    Ok(rows)
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyArgs {
    pub tol: Option<f64>,
    pub partner_seed: Option<u64>,
    pub pivot_tol: Option<f64>,
    pub partner_amplitude: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct VerifyReport {
    pub kind: Kind,
    pub n: usize,
    pub N: usize,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner_seed: Option<u64>,
    pub validation: Vec<IdentityRecord>,
    pub records: Vec<IdentityRecord>,
    pub pass: bool,
}

impl VerifyReport {
    /// 0 pass, 1 identity failure, 2 validation failure.
    pub fn exit_code(&self) -> u8 {
        if !self.validation.iter().all(|r| r.pass) {
            2
        } else if !self.records.iter().all(|r| r.pass) {
            1
        } else {
            0
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityRecord> {
        self.validation.iter().chain(&self.records).filter(|r| !r.pass)
    }
}

/// Runs the full identity suite and writes the JSON report, also when
/// validation fails.
pub fn cmd_verify(coeffs: &Path, args: &VerifyArgs, out: &Path) -> Result<VerifyReport> {
    let system = load(coeffs)?;
    let validation = system.validate(VALIDATION_TOL).records;
    let (tol, partner_seed, records) = match &system {
        System::Trig(c) => {
            let opts = suite_options(SuiteOptions::trig(), args);
            (opts.tol, Some(opts.partner_seed), trig_identity_suite(c, None, &opts)?.records)
        }
        System::Hyperbolic(c) => {
            let opts = suite_options(SuiteOptions::hyperbolic(), args);
            (opts.tol, Some(opts.partner_seed), hyp_identity_suite(c, None, &opts)?.records)
        }
        System::Symplectic(seq) => {
            let tol = args.tol.unwrap_or(SuiteOptions::trig().tol);
            (tol, None, symplectic_records(seq, tol)?)
        }
    };
    let pass = validation.iter().chain(&records).all(|r| r.pass);
    let report = VerifyReport {
        kind: system.kind(),
        n: system.n(),
        N: system.horizon(),
        tol,
        partner_seed,
        validation,
        records,
        pass,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("plain data serializes");
    text.push('\n');
    fs::write(out, text).map_err(io_err(out))?;
    Ok(report)
}

fn suite_options(defaults: SuiteOptions, args: &VerifyArgs) -> SuiteOptions {
    SuiteOptions {
        tol: args.tol.unwrap_or(defaults.tol),
        pivot_tol: args.pivot_tol.unwrap_or(defaults.pivot_tol),
        partner_seed: args.partner_seed.unwrap_or(defaults.partner_seed),
        partner_amplitude: args.partner_amplitude.unwrap_or(defaults.partner_amplitude),
    }
}

fn symplectic_records(seq: &[BlockSymplectic], tol: f64) -> Result<Vec<IdentityRecord>> {
    let n = seq[0].n();
    let z1 = propagate(seq, &Matrix::identity(n), &Matrix::zeros(n, n))?;
    let z2 = principal_solution(seq, 0)?;
    let mut records = check_normalized_conjoined(&z1, &z2, tol, Scaling::Absolute)?.records;
    records.extend(check_block_recovery(seq, &z1, &z2, tol, Scaling::Absolute)?);
    let mut w = record("wronskian", &[wronskian_drift(&z1, &z2)?], tol, Scaling::Absolute);
    w.evaluated = z1.len();
    records.push(w);
    Ok(records)
}

/// Scalar recurrence against its closed form; returns the largest
/// absolute error.
pub fn cmd_scalar_demo(kind: Kind, steps: usize, value: f64, out: &Path) -> Result<f64> {
    if steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    if !value.is_finite() {
        return Err(CliError::Usage("--angle must be finite".into()));
    }
    let usage = |e: symtrig_core::Error| CliError::Usage(e.to_string());
    let rows: Vec<(f64, f64)> = match kind {
        Kind::Trig => {
            let c = TrigCoefficients::from_angles(&vec![value; steps]).map_err(usage)?;
            let f = trig_functions(&c, 0)?;
            f.sin
                .iter()
                .enumerate()
                .map(|(k, s)| (s.get(0, 0), (k as f64 * value).sin()))
                .collect()
        }
        Kind::Hyperbolic => {
            let c = HypCoefficients::from_rates(&vec![value; steps]).map_err(usage)?;
            let f = hyp_functions(&c, 0)?;
            let (p, q) = (c.p()[0].get(0, 0), c.q()[0].get(0, 0));
            let rate = (p + q).abs().ln();
            let sign = p.signum();
            f.sinh
                .iter()
                .enumerate()
                .map(|(k, s)| {
                    let closed = sign.powi(k as i32) * (k as f64 * rate).sinh();
                    (s.get(0, 0), closed)
                })
                .collect()
        }
        Kind::Symplectic => {
            return Err(CliError::Usage(
                "scalar-demo supports --kind trig or hyperbolic".into(),
            ))
        }
    };
    let mut w = csv::Writer::from_path(out).map_err(|e| csv_err(out, e))?;
    w.write_record(["k", "recurrence", "closed_form", "abs_err"])
        .map_err(|e| csv_err(out, e))?;
    let mut worst = 0.0_f64;
    for (k, (rec, closed)) in rows.iter().enumerate() {
        let err = (rec - closed).abs();
        worst = worst.max(err);
        w.write_record([
            k.to_string(),
            format!("{rec:.16e}"),
            format!("{closed:.16e}"),
            format!("{err:.16e}"),
        ])
        .map_err(|e| csv_err(out, e))?;
    }
    w.flush().map_err(io_err(out))?;
    Ok(worst)
}
