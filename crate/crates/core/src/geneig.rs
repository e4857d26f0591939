//! Dense symmetric-definite generalized eigensolver for the trace-ratio
//! criterion `A v = λ B v`.
//!
//! `B` is first shifted to be positive definite, then the problem is reduced
//! to a standard symmetric one through the Cholesky factor `B' = L Lᵀ`:
//! `C = L⁻¹ A L⁻ᵀ`, `C u = λ u`, `v = L⁻ᵀ u`. Returned eigenvectors are scaled
//! to unit Euclidean norm with their largest-magnitude entry positive.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{MidaError, Result};

pub const DEFAULT_EPSILON_SCALE: f64 = 1e-6;
const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    /// Descending; equal values keep the solver's index order.
    pub eigenvalues: Vec<f64>,
    /// Column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
    /// `σ` with `B' = B + σ I`.
    pub regularization_shift: f64,
}

/// An `N x t` projection; samples are rows, so features are `X W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionMatrix {
    w: DMatrix<f64>,
}

impl ProjectionMatrix {
    pub fn new(w: DMatrix<f64>) -> Result<Self> {
        if w.ncols() == 0 || w.ncols() > w.nrows() {
            return Err(MidaError::ShapeMismatch {
                expected: format!("N x t with 1 <= t <= N = {}", w.nrows()),
                found: format!("{} x {}", w.nrows(), w.ncols()),
            });
        }
        Ok(Self { w })
    }

    /// First `t` columns of an eigen solution.
    pub fn from_solution(solution: &EigenSolution, t: usize) -> Result<Self> {
        if t == 0 || t > solution.eigenvectors.ncols() {
            return Err(MidaError::InvalidArgument(format!(
                "t = {t} outside 1..={}",
                solution.eigenvectors.ncols()
            )));
        }
        Self::new(solution.eigenvectors.columns(0, t).into_owned())
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn n_inputs(&self) -> usize {
        self.w.nrows()
    }

    pub fn t(&self) -> usize {
        self.w.ncols()
    }
}

pub(crate) fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(MidaError::ShapeMismatch {
            expected: "square matrix".into(),
            found: format!("{} x {}", m.nrows(), m.ncols()),
        });
    }
    let asym = max_asymmetry(m);
    if asym > SYMMETRY_TOL {
        return Err(MidaError::NotSymmetric(asym));
    }
    Ok(())
}

fn eigen(m: DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let n = m.nrows();
    let max_iter = 1000 + 100 * n;
    SymmetricEigen::try_new(m, f64::EPSILON, max_iter).ok_or(MidaError::NoConvergence { n, max_iter })
}

/// Unit norm, largest-magnitude entry positive (first such entry on ties).
pub(crate) fn canonicalize_column(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    let mut pivot = 0;
    for (k, x) in v.iter().enumerate() {
        if x.abs() > v[pivot].abs() {
            pivot = k;
        }
    }
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Descending order of `values`; ties keep ascending index.
pub(crate) fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

/// Eigen-decomposition of a symmetric matrix, sorted descending, columns
/// canonicalized.
pub fn symmetric_eigen_sorted(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    check_symmetric(m)?;
    let n = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    let decomposition = eigen(sym)?;
    let order = descending_order(decomposition.eigenvalues.as_slice());
    let values = order.iter().map(|&k| decomposition.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: Vec<f64> = decomposition.eigenvectors.column(src).iter().copied().collect();
        canonicalize_column(&mut col);
        vectors.column_mut(dst).copy_from_slice(&col);
    }
    Ok((values, vectors))
}

/// Shifts a symmetric matrix to be positive definite.
///
/// Returns `(b + σ I, σ)` where `σ = max(0, -λ_min(b)) + ε` and
/// `ε = epsilon_scale · max(1, |tr b| / N)`.
pub fn regularize_spd(b: &DMatrix<f64>, epsilon_scale: f64) -> Result<(DMatrix<f64>, f64)> {
    check_symmetric(b)?;
    if !(epsilon_scale > 0.0 && epsilon_scale.is_finite()) {
        return Err(MidaError::InvalidArgument(format!(
            "epsilon_scale must be positive, got {epsilon_scale}"
        )));
    }
    let n = b.nrows();
    if n == 0 {
        return Err(MidaError::EmptySample);
    }
    let decomposition = eigen((b + b.transpose()) * 0.5)?;
    let lambda_min = decomposition.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let epsilon = epsilon_scale * (b.trace().abs() / n as f64).max(1.0);
    let shift = (-lambda_min).max(0.0) + epsilon;
    let mut shifted = b.clone();
    for i in 0..n {
        shifted[(i, i)] += shift;
    }
    Ok((shifted, shift))
}

/// Top-`t` generalized eigenpairs of `(a, b)` with the default regularization.
pub fn solve_fisher_rao(a: &DMatrix<f64>, b: &DMatrix<f64>, t: usize) -> Result<EigenSolution> {
    solve_fisher_rao_with(a, b, t, DEFAULT_EPSILON_SCALE)
}

pub fn solve_fisher_rao_with(a: &DMatrix<f64>, b: &DMatrix<f64>, t: usize, epsilon_scale: f64) -> Result<EigenSolution> {
    check_symmetric(a)?;
    let n = a.nrows();
    if b.shape() != a.shape() {
        return Err(MidaError::ShapeMismatch {
            expected: format!("{n} x {n}"),
            found: format!("{} x {}", b.nrows(), b.ncols()),
        });
    }
    if t == 0 || t > n {
        return Err(MidaError::InvalidArgument(format!("t = {t} outside 1..={n}")));
    }
    let (b_reg, shift) = regularize_spd(b, epsilon_scale)?;
    let chol = b_reg
        .clone()
        .cholesky()
        .ok_or(MidaError::NotPositiveDefinite { shift, n })?;
    let l = chol.l();

    // C = L⁻¹ A L⁻ᵀ, using the symmetry of A.
    let left = l
        .solve_lower_triangular(a)
        .ok_or(MidaError::NotPositiveDefinite { shift, n })?;
    let c = l
        .solve_lower_triangular(&left.transpose())
        .ok_or(MidaError::NotPositiveDefinite { shift, n })?;
    let c = (&c + c.transpose()) * 0.5;

    let decomposition = eigen(c)?;
    let order = descending_order(decomposition.eigenvalues.as_slice());
    let mut eigenvectors = DMatrix::zeros(n, t);
    let mut eigenvalues = Vec::with_capacity(t);
    for (dst, &src) in order.iter().take(t).enumerate() {
        let u = decomposition.eigenvectors.column(src).into_owned();
        let v = l
            .tr_solve_lower_triangular(&u)
            .ok_or(MidaError::NotPositiveDefinite { shift, n })?;
        let mut col: Vec<f64> = v.iter().copied().collect();
        canonicalize_column(&mut col);
        eigenvectors.column_mut(dst).copy_from_slice(&col);
        eigenvalues.push(decomposition.eigenvalues[src]);
    }
    Ok(EigenSolution {
        eigenvalues,
        eigenvectors,
        regularization_shift: shift,
    })
}

/// `X W`: rows of `x` are samples. Each output column depends only on the
/// matching column of `W`, so truncating `W` never changes earlier columns.
pub fn project(x: &DMatrix<f64>, w: &ProjectionMatrix) -> Result<DMatrix<f64>> {
    if x.ncols() != w.n_inputs() {
        return Err(MidaError::ShapeMismatch {
            expected: format!("{} columns", w.n_inputs()),
            found: format!("{} columns", x.ncols()),
        });
    }
    let mut y = DMatrix::zeros(x.nrows(), w.t());
    for k in 0..w.t() {
        y.set_column(k, &(x * w.matrix().column(k)));
    }
    Ok(y)
}
