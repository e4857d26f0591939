use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{MidaError, Result};

/// Labeled sample matrix: one row per sample, one column per feature, and a
/// dense class code `0..C` per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    features: DMatrix<f64>,
    labels: Vec<usize>,
    pub feature_names: Vec<String>,
    /// Original label text for each dense class code.
    pub label_names: Vec<String>,
}

/// Dense-code mapping recorded for reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMapping {
    pub code: usize,
    pub label: String,
}

impl Dataset {
    /// Builds a dataset, checking shapes and finiteness. Labels must already
    /// be dense; use [`Dataset::from_raw_labels`] otherwise.
    pub fn new(name: impl Into<String>, features: DMatrix<f64>, labels: Vec<usize>) -> Result<Self> {
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        let label_names = (0..n_classes).map(|c| c.to_string()).collect();
        let feature_names = (0..features.ncols()).map(|j| format!("f{j}")).collect();
        Self::with_names(name, features, labels, feature_names, label_names)
    }

    pub fn with_names(
        name: impl Into<String>,
        features: DMatrix<f64>,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        let (m, n) = features.shape();
        if m == 0 || n == 0 {
            return Err(MidaError::EmptySample);
        }
        if labels.len() != m {
            return Err(MidaError::LengthMismatch {
                left: m,
                right: labels.len(),
            });
        }
        if feature_names.len() != n {
            return Err(MidaError::LengthMismatch {
                left: n,
                right: feature_names.len(),
            });
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(MidaError::NonFinite(pos));
        }
        let mut seen = vec![false; label_names.len()];
        for &l in &labels {
            if l >= seen.len() {
                return Err(MidaError::InvalidArgument(format!(
                    "label {l} has no name (only {} classes named)",
                    seen.len()
                )));
            }
            seen[l] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(MidaError::InvalidArgument("labels are not dense in 0..C".into()));
        }
        Ok(Self {
            name: name.into(),
            features,
            labels,
            feature_names,
            label_names,
        })
    }

    /// Builds a dataset from arbitrary integer labels, densifying them in
    /// ascending order.
    pub fn from_raw_labels(name: impl Into<String>, features: DMatrix<f64>, raw: &[usize]) -> Result<Self> {
        let (codes, _) = crate::mi::dense_codes(raw);
        let mut distinct = raw.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let names = distinct.iter().map(|v| v.to_string()).collect();
        let feature_names = (0..features.ncols()).map(|j| format!("f{j}")).collect();
        Self::with_names(name, features, codes, feature_names, names)
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    /// Column `j` as a contiguous slice (storage is column-major).
    pub fn column(&self, j: usize) -> &[f64] {
        let m = self.n_samples();
        &self.features.as_slice()[j * m..(j + 1) * m]
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    pub fn label_mapping(&self) -> Vec<LabelMapping> {
        self.label_names
            .iter()
            .enumerate()
            .map(|(code, label)| LabelMapping {
                code,
                label: label.clone(),
            })
            .collect()
    }

    /// Rows `indices` in the given order. Class codes and names are kept as
    /// they are, so a subset may leave some classes without samples.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let n = self.n_features();
        let features = DMatrix::from_fn(indices.len(), n, |i, j| self.features[(indices[i], j)]);
        Dataset {
            name: self.name.clone(),
            features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            label_names: self.label_names.clone(),
        }
    }

    /// Same labels and names over a replacement feature matrix with the same
    /// number of rows.
    pub fn with_features(&self, features: DMatrix<f64>) -> Result<Dataset> {
        if features.nrows() != self.n_samples() {
            return Err(MidaError::LengthMismatch {
                left: self.n_samples(),
                right: features.nrows(),
            });
        }
        let feature_names = if features.ncols() == self.n_features() {
            self.feature_names.clone()
        } else {
            (0..features.ncols()).map(|j| format!("f{j}")).collect()
        };
        Ok(Dataset {
            name: self.name.clone(),
            features,
            labels: self.labels.clone(),
            feature_names,
            label_names: self.label_names.clone(),
        })
    }
}
