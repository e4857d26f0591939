//! Cross-validated 1-NN evaluation of feature extractors.
//!
//! Per fold: scale by the training split's absolute maxima, fit the extractor
//! on the training rows only, project both splits, classify the held-out rows
//! with the nearest training neighbor, and record accuracy.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{self, ProjectionModel};
use crate::dataset::Dataset;
use crate::error::{MidaError, Result};
use crate::geneig::ProjectionMatrix;
use crate::mida::{CtSweep, MidaConfig, MidaModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Raw,
    Pca,
    Lda,
    Mida,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Raw, Method::Pca, Method::Lda, Method::Mida];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Raw => "raw",
            Method::Pca => "pca",
            Method::Lda => "lda",
            Method::Mida => "mida",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = MidaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "raw" => Ok(Method::Raw),
            "pca" => Ok(Method::Pca),
            "lda" => Ok(Method::Lda),
            "mida" => Ok(Method::Mida),
            other => Err(MidaError::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Each column divided by its own training absolute maximum.
    #[default]
    PerFeature,
    /// Every column divided by the largest absolute training value.
    Global,
}

impl FromStr for Normalization {
    type Err = MidaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-feature" => Ok(Normalization::PerFeature),
            "global" => Ok(Normalization::Global),
            other => Err(MidaError::InvalidArgument(format!("unknown normalization {other:?}"))),
        }
    }
}

/// Divides both matrices column-wise by the training split's absolute
/// maxima. Zero maxima are replaced by 1.
pub fn normalize_absmax(train: &DMatrix<f64>, other: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>, Vec<f64>)> {
    normalize_with(train, other, Normalization::PerFeature)
}

pub fn normalize_with(
    train: &DMatrix<f64>,
    other: &DMatrix<f64>,
    policy: Normalization,
) -> Result<(DMatrix<f64>, DMatrix<f64>, Vec<f64>)> {
    if train.nrows() == 0 || train.ncols() == 0 {
        return Err(MidaError::EmptySample);
    }
    if other.ncols() != train.ncols() {
        return Err(MidaError::ShapeMismatch {
            expected: format!("{} columns", train.ncols()),
            found: format!("{} columns", other.ncols()),
        });
    }
    let guard = |s: f64| if s == 0.0 { 1.0 } else { s };
    let col_max: Vec<f64> = (0..train.ncols()).map(|j| train.column(j).amax()).collect();
    let scale: Vec<f64> = match policy {
        Normalization::PerFeature => col_max.into_iter().map(guard).collect(),
        Normalization::Global => {
            let g = guard(col_max.into_iter().fold(0.0, f64::max));
            vec![g; train.ncols()]
        }
    };
    let apply = |m: &DMatrix<f64>| DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] / scale[j]);
    Ok((apply(train), apply(other), scale))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    /// Fold index of each sample.
    pub assignment: Vec<usize>,
    pub k: usize,
    pub seed: u64,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] != fold).collect()
    }
}

/// Shuffles each class with a seeded generator (classes in ascending order),
/// concatenates them, and deals the sequence round-robin into `k` folds.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(MidaError::InvalidArgument("at least two folds are required".into()));
    }
    if k > labels.len() {
        return Err(MidaError::InvalidArgument(format!(
            "{k} folds requested for {} samples",
            labels.len()
        )));
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut position = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignment[i] = position % k;
            position += 1;
        }
    }
    Ok(FoldPlan { assignment, k, seed })
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// k-nearest-neighbor labels under Euclidean distance. Distance ties go to
/// the smaller training index; vote ties go to the class whose nearest member
/// ranks first.
pub fn knn_classify(train: &DMatrix<f64>, train_labels: &[usize], queries: &DMatrix<f64>, k: usize) -> Result<Vec<usize>> {
    if train.nrows() == 0 {
        return Err(MidaError::EmptySample);
    }
    if train_labels.len() != train.nrows() {
        return Err(MidaError::LengthMismatch {
            left: train.nrows(),
            right: train_labels.len(),
        });
    }
    if queries.ncols() != train.ncols() {
        return Err(MidaError::ShapeMismatch {
            expected: format!("{} columns", train.ncols()),
            found: format!("{} columns", queries.ncols()),
        });
    }
    if k == 0 {
        return Err(MidaError::InvalidArgument("k must be at least 1".into()));
    }
    let d = train.ncols();
    let k = k.min(train.nrows());
    let train_rows = row_major(train);
    let query_rows = row_major(queries);
    let dist2 = |q: &[f64], r: usize| -> f64 {
        train_rows[r * d..(r + 1) * d]
            .iter()
            .zip(q)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    };
    Ok(query_rows
        .par_chunks(d.max(1))
        .take(queries.nrows())
        .map(|q| {
            if k == 1 {
                let mut best = 0;
                let mut best_d = dist2(q, 0);
                for r in 1..train.nrows() {
                    let dr = dist2(q, r);
                    if dr < best_d {
                        best_d = dr;
                        best = r;
                    }
                }
                return train_labels[best];
            }
            let mut ranked: Vec<(f64, usize)> = (0..train.nrows()).map(|r| (dist2(q, r), r)).collect();
            ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut votes: Vec<(usize, usize, usize)> = Vec::new(); // (label, count, first rank)
            for (rank, &(_, r)) in ranked.iter().take(k).enumerate() {
                let label = train_labels[r];
                match votes.iter_mut().find(|v| v.0 == label) {
                    Some(v) => v.1 += 1,
                    None => votes.push((label, 1, rank)),
                }
            }
            votes.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
            votes[0].0
        })
        .collect())
}

/// A fitted extractor for one fold.
#[derive(Debug, Clone, PartialEq)]
pub enum Extractor {
    /// The first `dims` original columns.
    Raw { dims: usize },
    Linear(ProjectionModel),
    Mida(MidaModel),
}

impl Extractor {
    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match self {
            Extractor::Raw { dims } => {
                if *dims > x.ncols() {
                    return Err(MidaError::ShapeMismatch {
                        expected: format!("at least {dims} columns"),
                        found: format!("{} columns", x.ncols()),
                    });
                }
                Ok(x.columns(0, *dims).into_owned())
            }
            Extractor::Linear(m) => m.transform(x),
            Extractor::Mida(m) => m.transform(x),
        }
    }

    pub fn projection(&self) -> Option<&ProjectionMatrix> {
        match self {
            Extractor::Raw { .. } => None,
            Extractor::Linear(m) => Some(&m.w),
            Extractor::Mida(m) => Some(&m.w),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    pub normalization: Normalization,
    pub mida: MidaConfig,
    /// Neighbors used by the classifier; 1 in the reference protocol.
    pub knn_k: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            seed: 0,
            normalization: Normalization::PerFeature,
            mida: MidaConfig::default(),
            knn_k: 1,
        }
    }
}

/// Normalized training and held-out splits of one fold.
#[derive(Debug, Clone)]
pub struct FoldData {
    pub train: Dataset,
    pub test: Dataset,
    pub scale: Vec<f64>,
}

pub fn prepare_fold(dataset: &Dataset, plan: &FoldPlan, fold: usize, policy: Normalization) -> Result<FoldData> {
    let train_idx = plan.train_indices(fold);
    let test_idx = plan.test_indices(fold);
    if train_idx.is_empty() || test_idx.is_empty() {
        return Err(MidaError::InvalidArgument(format!("fold {fold} has an empty split")));
    }
    let train = dataset.subset(&train_idx);
    let test = dataset.subset(&test_idx);
    let (train_x, test_x, scale) = normalize_with(train.features(), test.features(), policy)?;
    Ok(FoldData {
        train: train.with_features(train_x)?,
        test: test.with_features(test_x)?,
        scale,
    })
}

/// Largest dimension `method` can produce on a training split, ignoring the
/// request.
pub fn method_limit(method: Method, train: &Dataset) -> usize {
    match method {
        Method::Raw | Method::Pca | Method::Mida => train.n_features(),
        Method::Lda => {
            let present = train.class_counts().iter().filter(|&&c| c > 0).count();
            baselines::lda_limit(present, train.n_features())
        }
    }
}

/// One extractor per requested dimension, `None` where the method cannot
/// produce that many features.
pub fn fit_extractors(method: Method, train: &Dataset, dims: &[usize], config: &CvConfig) -> Result<Vec<Option<Extractor>>> {
    let limit = method_limit(method, train);
    let max_dim = dims.iter().copied().filter(|&d| d <= limit).max();
    let Some(max_dim) = max_dim else {
        return Ok(vec![None; dims.len()]);
    };
    let fitted: Box<dyn Fn(usize) -> Result<Extractor>> = match method {
        Method::Raw => Box::new(|d| Ok(Extractor::Raw { dims: d })),
        Method::Pca => {
            let model = baselines::fit_pca(train.features(), max_dim)?;
            Box::new(move |d| Ok(Extractor::Linear(truncate(&model, d)?)))
        }
        Method::Lda => {
            let model = baselines::fit_lda_with(train, max_dim, config.mida.epsilon_scale)?;
            Box::new(move |d| {
                let mut m = truncate(&model, d)?;
                m.requested_t = d;
                Ok(Extractor::Linear(m))
            })
        }
        Method::Mida => {
            let sweep = CtSweep::run(train, max_dim, &config.mida)?;
            Box::new(move |d| Ok(Extractor::Mida(sweep.model(d)?)))
        }
    };
    dims.iter()
        .map(|&d| if d >= 1 && d <= limit { fitted(d).map(Some) } else { Ok(None) })
        .collect()
}

fn truncate(model: &ProjectionModel, t: usize) -> Result<ProjectionModel> {
    Ok(ProjectionModel {
        w: ProjectionMatrix::new(model.w.matrix().columns(0, t).into_owned())?,
        eigenvalues: model.eigenvalues[..t].to_vec(),
        regularization_shift: model.regularization_shift,
        center: model.center.clone(),
        requested_t: t,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRecord {
    pub dataset: String,
    pub method: Method,
    pub dim: usize,
    pub fold: usize,
    /// `None` when the cell is skipped.
    pub accuracy: Option<f64>,
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub dataset: String,
    pub method: Method,
    pub dim: usize,
    pub mean_accuracy: Option<f64>,
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub records: Vec<AccuracyRecord>,
    pub aggregates: Vec<Aggregate>,
}

impl AccuracyTable {
    fn from_records(mut records: Vec<AccuracyRecord>) -> Self {
        records.sort_by(|a, b| (&a.dataset, a.method, a.dim, a.fold).cmp(&(&b.dataset, b.method, b.dim, b.fold)));
        let mut aggregates: Vec<Aggregate> = Vec::new();
        for chunk in records.chunk_by(|a, b| a.dataset == b.dataset && a.method == b.method && a.dim == b.dim) {
            let skipped = chunk.iter().any(|r| r.skipped);
            let mean_accuracy = if skipped {
                None
            } else {
                Some(chunk.iter().map(|r| r.accuracy.unwrap_or(0.0)).sum::<f64>() / chunk.len() as f64)
            };
            aggregates.push(Aggregate {
                dataset: chunk[0].dataset.clone(),
                method: chunk[0].method,
                dim: chunk[0].dim,
                mean_accuracy,
                skipped,
            });
        }
        Self { records, aggregates }
    }

    /// Combines tables, re-sorting records and recomputing aggregates.
    pub fn merge(tables: impl IntoIterator<Item = AccuracyTable>) -> Self {
        Self::from_records(tables.into_iter().flat_map(|t| t.records).collect())
    }

    pub fn mean(&self, method: Method, dim: usize) -> Option<f64> {
        self.aggregates
            .iter()
            .find(|a| a.method == method && a.dim == dim)
            .and_then(|a| a.mean_accuracy)
    }

    pub fn is_skipped(&self, method: Method, dim: usize) -> bool {
        self.aggregates.iter().any(|a| a.method == method && a.dim == dim && a.skipped)
    }
}

fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}

fn validate_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(MidaError::InvalidArgument("dims must be non-empty and each at least 1".into()));
    }
    Ok(())
}

/// Cross-validated accuracy of one method at each requested dimension.
/// Cells the method cannot produce (LDA beyond `C - 1`, any method beyond
/// `N`) are recorded as skipped.
pub fn run_cv(dataset: &Dataset, method: Method, dims: &[usize], config: &CvConfig) -> Result<AccuracyTable> {
    run_cv_plan(dataset, method, dims, &stratified_folds(dataset.labels(), config.folds, config.seed)?, config)
}

pub fn run_cv_plan(dataset: &Dataset, method: Method, dims: &[usize], plan: &FoldPlan, config: &CvConfig) -> Result<AccuracyTable> {
    validate_dims(dims)?;
    let per_fold: Vec<Vec<AccuracyRecord>> = (0..plan.k)
        .into_par_iter()
        .map(|fold| {
            let data = prepare_fold(dataset, plan, fold, config.normalization)?;
            let extractors = fit_extractors(method, &data.train, dims, config)?;
            dims.iter()
                .zip(extractors)
                .map(|(&dim, extractor)| {
                    let accuracy = match extractor {
                        None => None,
                        Some(e) => {
                            let train_y = e.transform(data.train.features())?;
                            let test_y = e.transform(data.test.features())?;
                            let predicted = knn_classify(&train_y, data.train.labels(), &test_y, config.knn_k)?;
                            Some(accuracy(&predicted, data.test.labels()))
                        }
                    };
                    Ok(AccuracyRecord {
                        dataset: dataset.name.clone(),
                        method,
                        dim,
                        fold,
                        skipped: accuracy.is_none(),
                        accuracy,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(AccuracyTable::from_records(per_fold.into_iter().flatten().collect()))
}
