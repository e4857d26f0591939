//! PCA and LDA reference extractors.

use nalgebra::{DMatrix, DVector};

use crate::dataset::Dataset;
use crate::error::{MidaError, Result};
use crate::geneig::{self, ProjectionMatrix};

/// Linear extractor produced by a baseline method.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionModel {
    pub w: ProjectionMatrix,
    pub eigenvalues: Vec<f64>,
    /// Shift applied to the denominator matrix (0 for PCA).
    pub regularization_shift: f64,
    /// Subtracted from inputs before projecting, when present.
    pub center: Option<Vec<f64>>,
    pub requested_t: usize,
}

impl ProjectionModel {
    pub fn effective_t(&self) -> usize {
        self.w.t()
    }

    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match &self.center {
            None => geneig::project(x, &self.w),
            Some(mean) => {
                if x.ncols() != mean.len() {
                    return Err(MidaError::ShapeMismatch {
                        expected: format!("{} columns", mean.len()),
                        found: format!("{} columns", x.ncols()),
                    });
                }
                let centered = DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] - mean[j]);
                geneig::project(&centered, &self.w)
            }
        }
    }
}

/// Between- and within-class scatter of the classic Fisher criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaScatter {
    /// `Σ_i (μ_i - μ)(μ_i - μ)ᵀ`, unweighted over classes.
    pub s_b: DMatrix<f64>,
    /// `(1/n) Σ_i Σ_j (x_ij - μ_i)(x_ij - μ_i)ᵀ`.
    pub s_w: DMatrix<f64>,
    /// One row per class present in the data, in class-code order.
    pub class_means: DMatrix<f64>,
    pub global_mean: DVector<f64>,
    pub class_counts: Vec<usize>,
}

pub fn lda_scatter(dataset: &Dataset) -> Result<LdaScatter> {
    let x = dataset.features();
    let (m, n) = x.shape();
    let counts_all = dataset.class_counts();
    let present: Vec<usize> = (0..counts_all.len()).filter(|&c| counts_all[c] > 0).collect();
    if present.len() < 2 {
        return Err(MidaError::DegenerateLabels);
    }
    let mut slot = vec![usize::MAX; counts_all.len()];
    for (k, &c) in present.iter().enumerate() {
        slot[c] = k;
    }

    let mut sums = DMatrix::<f64>::zeros(present.len(), n);
    for (i, &label) in dataset.labels().iter().enumerate() {
        let k = slot[label];
        for j in 0..n {
            sums[(k, j)] += x[(i, j)];
        }
    }
    let class_counts: Vec<usize> = present.iter().map(|&c| counts_all[c]).collect();
    let class_means = DMatrix::from_fn(present.len(), n, |k, j| sums[(k, j)] / class_counts[k] as f64);
    let global_mean = DVector::from_fn(n, |j, _| x.column(j).sum() / m as f64);

    let mut s_b = DMatrix::zeros(n, n);
    for k in 0..present.len() {
        let d = class_means.row(k).transpose() - &global_mean;
        s_b += &d * d.transpose();
    }

    let centered = DMatrix::from_fn(m, n, |i, j| x[(i, j)] - class_means[(slot[dataset.labels()[i]], j)]);
    let mut s_w = centered.transpose() * &centered / m as f64;
    s_w = (&s_w + s_w.transpose()) * 0.5;

    Ok(LdaScatter {
        s_b,
        s_w,
        class_means,
        global_mean,
        class_counts,
    })
}

/// LDA projection with at most `min(N, C - 1)` features; larger requests are
/// clamped and the model reports its effective `t`.
pub fn fit_lda(dataset: &Dataset, t: usize) -> Result<ProjectionModel> {
    fit_lda_with(dataset, t, geneig::DEFAULT_EPSILON_SCALE)
}

pub fn fit_lda_with(dataset: &Dataset, t: usize, epsilon_scale: f64) -> Result<ProjectionModel> {
    if t == 0 {
        return Err(MidaError::InvalidArgument("t must be at least 1".into()));
    }
    let scatter = lda_scatter(dataset)?;
    let limit = (scatter.class_counts.len() - 1).min(dataset.n_features());
    let effective = t.min(limit);
    let solution = geneig::solve_fisher_rao_with(&scatter.s_b, &scatter.s_w, effective, epsilon_scale)?;
    Ok(ProjectionModel {
        w: ProjectionMatrix::from_solution(&solution, effective)?,
        eigenvalues: solution.eigenvalues,
        regularization_shift: solution.regularization_shift,
        center: None,
        requested_t: t,
    })
}

/// Largest feature count LDA can produce on `dataset`.
pub fn lda_limit(n_classes: usize, n_features: usize) -> usize {
    n_classes.saturating_sub(1).min(n_features)
}

/// Principal components of the sample covariance, descending by variance.
pub fn fit_pca(x: &DMatrix<f64>, t: usize) -> Result<ProjectionModel> {
    let (m, n) = x.shape();
    if m < 2 {
        return Err(MidaError::InvalidArgument("PCA needs at least two samples".into()));
    }
    if t == 0 || t > n {
        return Err(MidaError::InvalidArgument(format!("t = {t} outside 1..={n}")));
    }
    let mean: Vec<f64> = (0..n).map(|j| x.column(j).sum() / m as f64).collect();
    let centered = DMatrix::from_fn(m, n, |i, j| x[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / (m - 1) as f64;
    let cov = (&cov + cov.transpose()) * 0.5;
    let (values, vectors) = geneig::symmetric_eigen_sorted(&cov)?;
    Ok(ProjectionModel {
        w: ProjectionMatrix::new(vectors.columns(0, t).into_owned())?,
        eigenvalues: values[..t].to_vec(),
        regularization_shift: 0.0,
        center: Some(mean),
        requested_t: t,
    })
}
