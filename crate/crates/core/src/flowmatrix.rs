//! Flow matrix construction and elementwise statistics.
//!
//! A [`FlowMatrix`] is a dense non-negative square matrix whose rows and
//! columns are indexed by the same ordered list of region labels. Row i holds
//! the flows out of region i; column j holds the flows into region j.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dense::{row_mapped_sum, Dense};
use crate::error::{Error, Result};

/// Entries at or below this magnitude count as zero in sparsity statistics.
pub const DEFAULT_NONZERO_THRESHOLD: f64 = 1e-10;

/// An entry b with |b - 1| at or below this counts as a unit entry.
pub const DEFAULT_UNIT_TOLERANCE: f64 = 1e-9;

/// Opaque region label. The leading two characters name the containing state
/// (FIPS-style codes put the state first), which is all the structure the
/// census operations rely on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegionId(String);

impl RegionId {
    pub fn new(code: impl Into<String>) -> Result<Self> {
        let code = code.into();
        if code.is_empty() {
            return Err(Error::EmptyCode);
        }
        Ok(RegionId(code))
    }

    pub fn code(&self) -> &str {
        &self.0
    }

    /// First two characters of the code, or the whole code when shorter.
    pub fn state_prefix(&self) -> &str {
        let end = self
            .0
            .char_indices()
            .nth(2)
            .map(|(i, _)| i)
            .unwrap_or(self.0.len());
        &self.0[..end]
    }
}

impl std::fmt::Display for RegionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// One origin-destination flow observation.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowRecord {
    pub origin: String,
    pub dest: String,
    pub flow: f64,
}

/// Dense non-negative square matrix with region labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMatrix {
    dense: Dense,
    labels: Vec<RegionId>,
    hollow: bool,
}

impl FlowMatrix {
    /// Validates entries (finite, non-negative) and the label count, and
    /// records whether the diagonal is identically zero.
    pub fn from_dense(dense: Dense, labels: Vec<RegionId>) -> Result<Self> {
        let n = dense.n();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        if labels.len() != n {
            return Err(Error::LabelCountMismatch {
                n,
                labels: labels.len(),
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.code()) {
                return Err(Error::DuplicateLabel {
                    code: l.code().to_string(),
                });
            }
        }
        if let Some((row, col)) = dense.first_non_finite() {
            return Err(Error::NonFiniteEntry { row, col });
        }
        if let Some((row, col, value)) = dense.first_negative() {
            return Err(Error::NegativeEntry { row, col, value });
        }
        let hollow = (0..n).all(|i| dense.get(i, i) == 0.0);
        Ok(FlowMatrix {
            dense,
            labels,
            hollow,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.dense.n()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dense.get(i, j)
    }

    #[inline]
    pub fn dense(&self) -> &Dense {
        &self.dense
    }

    #[inline]
    pub fn labels(&self) -> &[RegionId] {
        &self.labels
    }

    /// True when every diagonal entry is exactly zero.
    #[inline]
    pub fn hollow(&self) -> bool {
        self.hollow
    }

    /// Index of the label with this code, if present.
    pub fn index_of(&self, code: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.code() == code)
    }

    /// Same dimension and identical label sequence.
    pub fn check_compatible(&self, other: &FlowMatrix) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        for (index, (a, b)) in self.labels.iter().zip(&other.labels).enumerate() {
            if a != b {
                return Err(Error::LabelMismatch { index });
            }
        }
        Ok(())
    }
}

/// Builds a [`FlowMatrix`] from flow records.
///
/// Duplicate (origin, dest) pairs are summed. When `labels` is `None` the
/// label set is the lexicographically sorted union of all codes appearing as
/// origin or destination; otherwise every code in the records must appear in
/// `labels`, and labels never referenced give all-zero rows and columns.
pub fn load_flows(records: &[FlowRecord], labels: Option<Vec<RegionId>>) -> Result<FlowMatrix> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    for (i, r) in records.iter().enumerate() {
        if !r.flow.is_finite() {
            return Err(Error::NonFiniteFlow {
                record: i,
                origin: r.origin.clone(),
                dest: r.dest.clone(),
            });
        }
        if r.flow < 0.0 {
            return Err(Error::NegativeFlow {
                record: i,
                origin: r.origin.clone(),
                dest: r.dest.clone(),
                flow: r.flow,
            });
        }
        if r.origin.is_empty() || r.dest.is_empty() {
            return Err(Error::EmptyCode);
        }
    }

    let labels = match labels {
        Some(l) => l,
        None => {
            let mut codes = std::collections::BTreeSet::new();
            for r in records {
                codes.insert(r.origin.as_str());
                codes.insert(r.dest.as_str());
            }
            codes
                .into_iter()
                .map(RegionId::new)
                .collect::<Result<Vec<_>>>()?
        }
    };
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }

    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        if index.insert(l.code(), i).is_some() {
            return Err(Error::DuplicateLabel {
                code: l.code().to_string(),
            });
        }
    }

    let n = labels.len();
    let mut dense = Dense::zeros(n);
    for (rec, r) in records.iter().enumerate() {
        let i = *index
            .get(r.origin.as_str())
            .ok_or_else(|| Error::UnknownCode {
                record: rec,
                code: r.origin.clone(),
            })?;
        let j = *index
            .get(r.dest.as_str())
            .ok_or_else(|| Error::UnknownCode {
                record: rec,
                code: r.dest.clone(),
            })?;
        let v = dense.get(i, j) + r.flow;
        dense.set(i, j, v);
    }
    FlowMatrix::from_dense(dense, labels)
}

/// Pearson correlation between the flattened entries of two matrices with
/// identical shape and labels.
///
/// Constant matrices have no variance to correlate against, so they are
/// rejected rather than producing a 0/0.
pub fn correlation(a: &FlowMatrix, b: &FlowMatrix) -> Result<f64> {
    a.check_compatible(b)?;
    let da = a.dense();
    let db = b.dense();
    let n2 = (a.n() * a.n()) as f64;

    let constant = |d: &Dense| -> bool {
        let first = d.as_slice()[0];
        d.as_slice().iter().all(|&v| v == first)
    };
    if constant(da) {
        return Err(Error::UndefinedCorrelation { side: "left" });
    }
    if constant(db) {
        return Err(Error::UndefinedCorrelation { side: "right" });
    }

    let mean_a = da.total() / n2;
    let mean_b = db.total() / n2;

    let var_a = row_mapped_sum(da, |row| row.iter().map(|&v| (v - mean_a) * (v - mean_a)).sum());
    let var_b = row_mapped_sum(db, |row| row.iter().map(|&v| (v - mean_b) * (v - mean_b)).sum());
    if var_a == 0.0 {
        return Err(Error::UndefinedCorrelation { side: "left" });
    }
    if var_b == 0.0 {
        return Err(Error::UndefinedCorrelation { side: "right" });
    }

    let nn = a.n();
    let cov: f64 = {
        let partials: Vec<f64> = (0..nn)
            .map(|i| {
                da.row(i)
                    .iter()
                    .zip(db.row(i))
                    .map(|(&x, &y)| (x - mean_a) * (y - mean_b))
                    .sum()
            })
            .collect();
        partials.iter().sum()
    };

    Ok(cov / (var_a.sqrt() * var_b.sqrt()))
}

/// Elementwise census of a matrix.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixStats {
    /// Entries strictly above the nonzero threshold.
    pub nonzero_count: usize,
    /// 1 - nonzero_count / n^2.
    pub sparsity_fraction: f64,
    /// Sum of all diagonal entries.
    pub diag_sum: f64,
    /// Diagonal entries strictly above the nonzero threshold.
    pub diag_nonzero_count: usize,
    /// Diagonal entries above the nonzero threshold, largest first,
    /// ties broken by label order.
    pub top_diag: Vec<(RegionId, f64)>,
    /// Entries b with |b - 1| <= unit_tolerance.
    pub unit_entry_count: usize,
}

/// Counts nonzero entries, diagonal mass, and unit entries.
pub fn matrix_stats(
    a: &FlowMatrix,
    nonzero_threshold: f64,
    unit_tolerance: f64,
) -> Result<MatrixStats> {
    if !(nonzero_threshold >= 0.0) {
        return Err(Error::NegativeThreshold {
            value: nonzero_threshold,
        });
    }
    if !(unit_tolerance >= 0.0) {
        return Err(Error::NegativeThreshold {
            value: unit_tolerance,
        });
    }
    let d = a.dense();
    let n = a.n();

    let nonzero_count = row_mapped_sum(d, |row| {
        row.iter().filter(|&&v| v > nonzero_threshold).count() as f64
    }) as usize;
    let unit_entry_count = row_mapped_sum(d, |row| {
        row.iter().filter(|&&v| (v - 1.0).abs() <= unit_tolerance).count() as f64
    }) as usize;

    let mut diag_sum = 0.0;
    let mut diag = Vec::new();
    for i in 0..n {
        let v = d.get(i, i);
        diag_sum += v;
        if v > nonzero_threshold {
            diag.push((a.labels()[i].clone(), v));
        }
    }
    let diag_nonzero_count = diag.len();
    diag.sort_by(|(la, va), (lb, vb)| {
        vb.partial_cmp(va)
            .expect("finite diagonal entries")
            .then_with(|| la.cmp(lb))
    });

    Ok(MatrixStats {
        nonzero_count,
        sparsity_fraction: 1.0 - nonzero_count as f64 / (n as f64 * n as f64),
        diag_sum,
        diag_nonzero_count,
        top_diag: diag,
        unit_entry_count,
    })
}

/// k-th matrix power, k >= 1. Labels carry over unchanged.
pub fn matrix_power(a: &FlowMatrix, k: u32) -> Result<FlowMatrix> {
    if k == 0 {
        return Err(Error::ZeroPower);
    }
    let mut acc = a.dense().clone();
    for _ in 1..k {
        acc = acc.matmul(a.dense());
    }
    FlowMatrix::from_dense(acc, a.labels().to_vec())
}
