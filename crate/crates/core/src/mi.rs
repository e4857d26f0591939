//! Plug-in histogram estimators for entropy and one-dimensional mutual
//! information.
//!
//! Every estimate is the exact information quantity of the binned empirical
//! distribution, in bits. Cell contributions are summed in sorted order so a
//! value does not depend on how the rows or columns of the count table are
//! ordered: relabeling classes or swapping the two arguments of
//! [`mi_feature_feature`] gives bitwise-identical results.

use serde::{Deserialize, Serialize};

use crate::error::{MidaError, Result};

/// How the histogram range of a variable is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RangePolicy {
    /// Equal-width bins spanning the observed `[min, max]` of the variable.
    #[default]
    PerVariable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub bin_count: usize,
    pub range_policy: RangePolicy,
}

impl HistogramSpec {
    pub const DEFAULT_BINS: usize = 16;

    pub fn new(bin_count: usize) -> Result<Self> {
        if bin_count == 0 {
            return Err(MidaError::InvalidArgument("bin_count must be at least 1".into()));
        }
        Ok(Self {
            bin_count,
            range_policy: RangePolicy::PerVariable,
        })
    }
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self {
            bin_count: Self::DEFAULT_BINS,
            range_policy: RangePolicy::PerVariable,
        }
    }
}

/// Contingency table of two discrete variables, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointCountTable {
    counts: Vec<u64>,
    rows: usize,
    cols: usize,
    total: u64,
}

impl JointCountTable {
    /// Builds a table from nested rows. Rows must be equal length and the
    /// total count positive.
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 {
            return Err(MidaError::EmptySample);
        }
        let mut counts = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            if row.len() != n_cols {
                return Err(MidaError::LengthMismatch {
                    left: n_cols,
                    right: row.len(),
                });
            }
            counts.extend_from_slice(row);
        }
        let total = counts.iter().sum();
        if total == 0 {
            return Err(MidaError::EmptySample);
        }
        Ok(Self {
            counts,
            rows: n_rows,
            cols: n_cols,
            total,
        })
    }

    /// Cross-tabulates two code vectors with values in `0..rows` and `0..cols`.
    pub fn from_codes(row_codes: &[usize], rows: usize, col_codes: &[usize], cols: usize) -> Result<Self> {
        if row_codes.len() != col_codes.len() {
            return Err(MidaError::LengthMismatch {
                left: row_codes.len(),
                right: col_codes.len(),
            });
        }
        if row_codes.is_empty() {
            return Err(MidaError::EmptySample);
        }
        let mut counts = vec![0u64; rows * cols];
        for (&r, &c) in row_codes.iter().zip(col_codes) {
            if r >= rows || c >= cols {
                return Err(MidaError::InvalidArgument(format!(
                    "code ({r}, {c}) outside a {rows}x{cols} table"
                )));
            }
            counts[r * cols + c] += 1;
        }
        Ok(Self {
            counts,
            rows,
            cols,
            total: row_codes.len() as u64,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.cols + col]
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let mut sums = vec![0u64; self.cols];
        for row in self.counts.chunks(self.cols) {
            for (s, &c) in sums.iter_mut().zip(row) {
                *s += c;
            }
        }
        sums
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0u64; self.counts.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                counts[c * self.rows + r] = self.get(r, c);
            }
        }
        Self {
            counts,
            rows: self.cols,
            cols: self.rows,
            total: self.total,
        }
    }

    /// Merges rows through the deterministic map `row -> mapping[row]`,
    /// producing a table with `merged_rows` rows.
    pub fn merge_rows(&self, mapping: &[usize], merged_rows: usize) -> Result<Self> {
        if mapping.len() != self.rows {
            return Err(MidaError::LengthMismatch {
                left: self.rows,
                right: mapping.len(),
            });
        }
        let mut counts = vec![0u64; merged_rows * self.cols];
        for (r, &target) in mapping.iter().enumerate() {
            if target >= merged_rows {
                return Err(MidaError::InvalidArgument(format!(
                    "row {r} maps to {target}, outside {merged_rows} rows"
                )));
            }
            for c in 0..self.cols {
                counts[target * self.cols + c] += self.get(r, c);
            }
        }
        Ok(Self {
            counts,
            rows: merged_rows,
            cols: self.cols,
            total: self.total,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    /// Mutual information in bits.
    pub value: f64,
    /// Entropy of the row variable (feature bins).
    pub h_row: f64,
    /// Entropy of the column variable (classes or second feature bins).
    pub h_col: f64,
}

fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

fn entropy_of_counts(counts: &[u64], total: u64) -> f64 {
    let n = total as f64;
    let terms = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .collect();
    sorted_sum(terms).max(0.0)
}

/// Mutual information of the empirical joint distribution in `table`, in bits.
///
/// Empty cells contribute nothing. Rounding can push the raw sum a hair below
/// zero; the result is clamped at 0.
pub fn exact_mi_table(table: &JointCountTable) -> f64 {
    let rows = table.row_sums();
    let cols = table.col_sums();
    let n = table.total as f64;
    let mut terms = Vec::new();
    for (r, &nr) in rows.iter().enumerate() {
        for (c, &nc) in cols.iter().enumerate() {
            let nrc = table.get(r, c);
            if nrc == 0 {
                continue;
            }
            let ratio = (nrc as f64 * n) / (nr as f64 * nc as f64);
            terms.push(nrc as f64 / n * ratio.log2());
        }
    }
    sorted_sum(terms).max(0.0)
}

/// Mutual information together with both marginal entropies of a table.
pub fn estimate_from_table(table: &JointCountTable) -> MiEstimate {
    MiEstimate {
        value: exact_mi_table(table),
        h_row: entropy_of_counts(&table.row_sums(), table.total),
        h_col: entropy_of_counts(&table.col_sums(), table.total),
    }
}

/// Maps arbitrary label values to dense codes `0..k` in ascending label order.
pub fn dense_codes(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut distinct: Vec<usize> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let codes = labels
        .iter()
        .map(|l| distinct.binary_search(l).expect("label present"))
        .collect();
    (codes, distinct.len())
}

/// Shannon entropy of the empirical label distribution, in bits.
pub fn entropy_discrete(labels: &[usize]) -> Result<f64> {
    if labels.is_empty() {
        return Err(MidaError::EmptySample);
    }
    let (codes, k) = dense_codes(labels);
    let mut counts = vec![0u64; k];
    for c in codes {
        counts[c] += 1;
    }
    Ok(entropy_of_counts(&counts, labels.len() as u64))
}

/// Assigns each value to one of `spec.bin_count` equal-width bins over
/// `[min, max]`. The maximum lands in the last bin; a constant vector maps to
/// bin 0.
pub fn bin_feature(values: &[f64], spec: &HistogramSpec) -> Result<Vec<usize>> {
    if values.is_empty() {
        return Err(MidaError::EmptySample);
    }
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(MidaError::NonFinite(pos));
    }
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = max - min;
    if range <= 0.0 || spec.bin_count == 1 {
        return Ok(vec![0; values.len()]);
    }
    let bins = spec.bin_count as f64;
    let last = spec.bin_count - 1;
    Ok(values
        .iter()
        .map(|&v| {
            let pos = ((v - min) / range * bins).floor();
            (pos.max(0.0) as usize).min(last)
        })
        .collect())
}

/// Bin codes of `values` along with the number of bins actually addressable.
pub(crate) fn binned(values: &[f64], spec: &HistogramSpec) -> Result<(Vec<usize>, usize)> {
    Ok((bin_feature(values, spec)?, spec.bin_count))
}

/// Count table of (feature bin, class) for a scalar feature.
pub fn feature_class_table(feature: &[f64], labels: &[usize], spec: &HistogramSpec) -> Result<JointCountTable> {
    if feature.len() != labels.len() {
        return Err(MidaError::LengthMismatch {
            left: feature.len(),
            right: labels.len(),
        });
    }
    let (bins, n_bins) = binned(feature, spec)?;
    let (classes, n_classes) = dense_codes(labels);
    JointCountTable::from_codes(&bins, n_bins, &classes, n_classes)
}

/// Count table of the two binned features.
pub fn feature_feature_table(a: &[f64], b: &[f64], spec: &HistogramSpec) -> Result<JointCountTable> {
    if a.len() != b.len() {
        return Err(MidaError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (ba, na) = binned(a, spec)?;
    let (bb, nb) = binned(b, spec)?;
    JointCountTable::from_codes(&ba, na, &bb, nb)
}

/// `I(feature; class)` of the binned feature against the labels.
pub fn mi_feature_class(feature: &[f64], labels: &[usize], spec: &HistogramSpec) -> Result<MiEstimate> {
    Ok(estimate_from_table(&feature_class_table(feature, labels, spec)?))
}

/// `I(a; b)` with both features binned independently under the same spec.
pub fn mi_feature_feature(a: &[f64], b: &[f64], spec: &HistogramSpec) -> Result<MiEstimate> {
    Ok(estimate_from_table(&feature_feature_table(a, b, spec)?))
}

/// Bounds on the Bayes error implied by the class entropy and the information
/// a feature carries about the class.
///
/// Returns `(lower, upper)`: the Fano bound `(H(C) - I - 1) / log2(n_classes)`
/// clamped at zero, and the Hellman-Raviv bound `(H(C) - I) / 2`.
pub fn bayes_error_bounds(h_c: f64, mi: f64, n_classes: usize) -> Result<(f64, f64)> {
    if n_classes < 2 {
        return Err(MidaError::InvalidArgument("n_classes must be at least 2".into()));
    }
    if !(h_c.is_finite() && mi.is_finite()) || mi < 0.0 || h_c < mi {
        return Err(MidaError::InvalidArgument(format!(
            "require h_c >= mi >= 0, got h_c = {h_c}, mi = {mi}"
        )));
    }
    let upper = (h_c - mi) / 2.0;
    let lower = ((h_c - mi - 1.0) / (n_classes as f64).log2()).max(0.0);
    Ok((lower, upper))
}
