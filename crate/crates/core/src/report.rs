//! Residual reports: one record per identity, in a fixed order.

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

/// How a raw Frobenius residual is turned into the reported number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    Absolute,
    /// Divided by `max(1, largest term norm)`.
    Relative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRecord {
    pub id: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub scaling: Scaling,
    /// Number of indices (or index pairs) at which the identity was evaluated.
    pub evaluated: usize,
    pub skipped_indices: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub records: Vec<IdentityRecord>,
}

impl ResidualReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn get(&self, id: &str) -> Option<&IdentityRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn ids(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.id.as_str()).collect()
    }

    /// Largest residual over every record, ignoring tolerances.
    pub fn worst(&self) -> Option<&IdentityRecord> {
        self.records
            .iter()
            .max_by(|a, b| a.max_residual.total_cmp(&b.max_residual))
    }

    pub fn extend(&mut self, other: ResidualReport) {
        self.records.extend(other.records);
    }
}

/// Residual of an identity written as `diff = lhs - rhs`, where `terms` are
/// the individual products that make up both sides.
pub fn residual(diff: &Matrix, terms: &[&Matrix], scaling: Scaling) -> f64 {
    let raw = diff.frobenius_norm();
    match scaling {
        Scaling::Absolute => raw,
        Scaling::Relative => raw / term_scale(terms.iter().map(|t| t.frobenius_norm())),
    }
}

/// Scalar counterpart of [`residual`].
pub fn scalar_residual(diff: f64, terms: &[f64], scaling: Scaling) -> f64 {
    match scaling {
        Scaling::Absolute => diff.abs(),
        Scaling::Relative => diff.abs() / term_scale(terms.iter().map(|t| t.abs())),
    }
}

fn term_scale(norms: impl Iterator<Item = f64>) -> f64 {
    norms.fold(1.0_f64, f64::max)
}

/// Running maximum for one identity.
#[derive(Debug, Clone)]
pub(crate) struct Tally {
    id: String,
    scaling: Scaling,
    tolerance: f64,
    max: f64,
    evaluated: usize,
    skipped: Vec<usize>,
}

impl Tally {
    pub(crate) fn new(id: impl Into<String>, scaling: Scaling, tolerance: f64) -> Self {
        Self {
            id: id.into(),
            scaling,
            tolerance,
            max: 0.0,
            evaluated: 0,
            skipped: Vec::new(),
        }
    }

    pub(crate) fn from_record(r: IdentityRecord) -> Self {
        Self {
            id: r.id,
            scaling: r.scaling,
            tolerance: r.tolerance,
            max: r.max_residual,
            evaluated: r.evaluated,
            skipped: r.skipped_indices,
        }
    }

    pub(crate) fn record(&mut self, value: f64) {
        self.evaluated += 1;
        // NaN never satisfies a tolerance; keep it representable in JSON.
        let value = if value.is_finite() { value } else { f64::MAX };
        self.max = self.max.max(value);
    }

    /// Records `residual(diff, terms)` under this tally's scaling.
    pub(crate) fn check(&mut self, diff: &Matrix, terms: &[&Matrix]) {
        let r = residual(diff, terms, self.scaling);
        self.record(r);
    }

    pub(crate) fn skip(&mut self, k: usize) {
        if self.skipped.last() != Some(&k) {
            self.skipped.push(k);
        }
    }

    pub(crate) fn finish(self) -> IdentityRecord {
        IdentityRecord {
            pass: self.max <= self.tolerance,
            id: self.id,
            max_residual: self.max,
            tolerance: self.tolerance,
            scaling: self.scaling,
            evaluated: self.evaluated,
            skipped_indices: self.skipped,
        }
    }
}
