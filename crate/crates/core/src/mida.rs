//! Mutual information discriminant analysis.
//!
//! For each integer trade-off constant `ct` in `0..=ct_max` the MI scatter
//! pair is built, the trace-ratio eigenproblem solved, the training data
//! projected, and the projection scored with the K criterion
//!
//! ```text
//! K = Σ_i [ I(y_i; C) - (1 / (i - 1)) Σ_{j < i} I(y_i; y_j) ]
//! ```
//!
//! where the first feature contributes its relevance alone. The `ct` with the
//! largest K (smallest `ct` on ties) fixes the final projection.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{MidaError, Result};
use crate::geneig::{self, EigenSolution, ProjectionMatrix};
use crate::mi::{self, HistogramSpec, JointCountTable};
use crate::scatter::{self, MiProfile};

pub const DEFAULT_CT_MAX: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MidaConfig {
    pub spec: HistogramSpec,
    /// Largest `ct` on the search grid.
    pub ct_max: u32,
    pub epsilon_scale: f64,
}

impl Default for MidaConfig {
    fn default() -> Self {
        Self {
            spec: HistogramSpec::default(),
            ct_max: DEFAULT_CT_MAX,
            epsilon_scale: geneig::DEFAULT_EPSILON_SCALE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MidaModel {
    pub w: ProjectionMatrix,
    pub ct_opt: u32,
    /// K value for each `ct` in `0..=ct_max`.
    pub k_curve: Vec<f64>,
    pub spec: HistogramSpec,
    pub t: usize,
    pub regularization_shift: f64,
    /// Leading `t` generalized eigenvalues at `ct_opt`.
    pub eigenvalues: Vec<f64>,
}

impl MidaModel {
    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        geneig::project(x, &self.w)
    }
}

fn column(y: &DMatrix<f64>, k: usize) -> &[f64] {
    let m = y.nrows();
    &y.as_slice()[k * m..(k + 1) * m]
}

/// Per-feature K contributions of the columns of `y`, in column order.
fn k_terms(y: &DMatrix<f64>, labels: &[usize], spec: &HistogramSpec) -> Result<Vec<f64>> {
    if y.nrows() != labels.len() {
        return Err(MidaError::LengthMismatch {
            left: y.nrows(),
            right: labels.len(),
        });
    }
    let (classes, n_classes) = mi::dense_codes(labels);
    let bins = spec.bin_count;
    let codes: Vec<Vec<usize>> = (0..y.ncols())
        .map(|k| mi::bin_feature(column(y, k), spec))
        .collect::<Result<_>>()?;
    let mut terms = Vec::with_capacity(codes.len());
    for (i, ci) in codes.iter().enumerate() {
        let relevance = mi::exact_mi_table(&JointCountTable::from_codes(ci, bins, &classes, n_classes)?);
        if i == 0 {
            terms.push(relevance);
            continue;
        }
        let mut redundancy = 0.0;
        for cj in &codes[..i] {
            redundancy += mi::exact_mi_table(&JointCountTable::from_codes(ci, bins, cj, bins)?);
        }
        terms.push(relevance - redundancy / i as f64);
    }
    Ok(terms)
}

fn prefix_sums(terms: &[f64]) -> Vec<f64> {
    terms
        .iter()
        .scan(0.0, |acc, &t| {
            *acc += t;
            Some(*acc)
        })
        .collect()
}

/// K criterion of projected features `y` (columns in extraction order).
pub fn quality_k(y: &DMatrix<f64>, labels: &[usize], spec: &HistogramSpec) -> Result<f64> {
    if y.ncols() == 0 {
        return Err(MidaError::InvalidArgument("at least one projected feature is required".into()));
    }
    let terms = k_terms(y, labels, spec)?;
    Ok(*prefix_sums(&terms).last().expect("non-empty"))
}

fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = k;
        }
    }
    best
}

/// The full `ct` grid evaluated once for up to `max_t` features.
///
/// Every projected column depends only on its own eigenvector and each K
/// term only on columns up to its own, so a sweep at `max_t` answers every
/// `t <= max_t` exactly as a dedicated fit would.
#[derive(Debug, Clone)]
pub struct CtSweep {
    pub profile: MiProfile,
    solutions: Vec<EigenSolution>,
    /// `k_prefix[ct][t - 1]` is K of the first `t` features at `ct`.
    k_prefix: Vec<Vec<f64>>,
    spec: HistogramSpec,
}

impl CtSweep {
    pub fn run(dataset: &Dataset, max_t: usize, config: &MidaConfig) -> Result<Self> {
        let n = dataset.n_features();
        if max_t == 0 || max_t > n {
            return Err(MidaError::InvalidArgument(format!("t = {max_t} outside 1..={n}")));
        }
        let profile = scatter::compute_mi_profile(dataset, &config.spec)?;
        let evaluated: Vec<(EigenSolution, Vec<f64>)> = (0..=config.ct_max)
            .into_par_iter()
            .map(|ct| {
                let pair = scatter::build_scatter_pair(&profile, ct)?;
                let solution = geneig::solve_fisher_rao_with(&pair.s_b, &pair.s_w, max_t, config.epsilon_scale)?;
                let w = ProjectionMatrix::from_solution(&solution, max_t)?;
                let y = geneig::project(dataset.features(), &w)?;
                let terms = k_terms(&y, dataset.labels(), &config.spec)?;
                Ok((solution, prefix_sums(&terms)))
            })
            .collect::<Result<_>>()?;
        let (solutions, k_prefix) = evaluated.into_iter().unzip();
        Ok(Self {
            profile,
            solutions,
            k_prefix,
            spec: config.spec,
        })
    }

    pub fn max_t(&self) -> usize {
        self.solutions[0].eigenvectors.ncols()
    }

    /// `(ct_opt, k_curve)` for `t` extracted features.
    pub fn select(&self, t: usize) -> Result<(u32, Vec<f64>)> {
        if t == 0 || t > self.max_t() {
            return Err(MidaError::InvalidArgument(format!("t = {t} outside 1..={}", self.max_t())));
        }
        let curve: Vec<f64> = self.k_prefix.iter().map(|k| k[t - 1]).collect();
        Ok((argmax_first(&curve) as u32, curve))
    }

    pub fn model(&self, t: usize) -> Result<MidaModel> {
        let (ct_opt, k_curve) = self.select(t)?;
        let solution = &self.solutions[ct_opt as usize];
        Ok(MidaModel {
            w: ProjectionMatrix::from_solution(solution, t)?,
            ct_opt,
            k_curve,
            spec: self.spec,
            t,
            regularization_shift: solution.regularization_shift,
            eigenvalues: solution.eigenvalues[..t].to_vec(),
        })
    }
}

/// Grid search over `ct`: returns the K-maximizing `ct` and the K curve.
pub fn select_ct(dataset: &Dataset, t: usize, config: &MidaConfig) -> Result<(u32, Vec<f64>)> {
    CtSweep::run(dataset, t, config)?.select(t)
}

/// Fits a `t`-feature MIDA projection.
pub fn fit_mida(dataset: &Dataset, t: usize, config: &MidaConfig) -> Result<MidaModel> {
    CtSweep::run(dataset, t, config)?.model(t)
}

pub fn transform(model: &MidaModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    model.transform(x)
}
