//! Relevance/redundancy profile of a feature set and the MI-based scatter
//! matrices built from it.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{MidaError, Result};
use crate::mi::{self, HistogramSpec, JointCountTable};

/// Per-feature class relevance and pairwise feature redundancy, in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct MiProfile {
    /// `relevance[i] = I(f_i; C)`.
    pub relevance: Vec<f64>,
    /// `redundancy[(i, j)] = I(f_i; f_j)`, symmetric. The diagonal holds the
    /// binned entropy of each feature and is never read by the scatter builder.
    pub redundancy: DMatrix<f64>,
}

impl MiProfile {
    pub fn n_features(&self) -> usize {
        self.relevance.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPair {
    /// Diagonal matrix of relevances.
    pub s_b: DMatrix<f64>,
    /// Zero diagonal, `ct + I(f_i; f_j)` off the diagonal.
    pub s_w: DMatrix<f64>,
    pub ct: u32,
}

#[derive(Debug, Clone)]
struct PairValue {
    i: usize,
    j: usize,
    value: f64,
}

/// Computes the MI profile of every column of `dataset`. Each unordered
/// feature pair is estimated once and mirrored.
pub fn compute_mi_profile(dataset: &Dataset, spec: &HistogramSpec) -> Result<MiProfile> {
    let m = dataset.n_samples();
    let n = dataset.n_features();
    if m < 2 {
        return Err(MidaError::InvalidArgument("at least two samples are required".into()));
    }
    let (classes, n_classes) = mi::dense_codes(dataset.labels());
    if n_classes < 2 {
        return Err(MidaError::DegenerateLabels);
    }

    let binned: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|j| mi::bin_feature(dataset.column(j), spec))
        .collect::<Result<_>>()?;
    let bins = spec.bin_count;

    let relevance: Vec<f64> = binned
        .par_iter()
        .map(|codes| JointCountTable::from_codes(codes, bins, &classes, n_classes).map(|t| mi::exact_mi_table(&t)))
        .collect::<Result<_>>()?;

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values: Vec<PairValue> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let table = JointCountTable::from_codes(&binned[i], bins, &binned[j], bins)?;
            Ok(PairValue {
                i,
                j,
                value: mi::exact_mi_table(&table),
            })
        })
        .collect::<Result<_>>()?;

    let mut redundancy = DMatrix::zeros(n, n);
    for pv in values {
        redundancy[(pv.i, pv.j)] = pv.value;
        redundancy[(pv.j, pv.i)] = pv.value;
    }
    Ok(MiProfile { relevance, redundancy })
}

/// Assembles `S_B = diag(relevance)` and `S_W` with `ct + I(f_i; f_j)` off
/// the diagonal.
pub fn build_scatter_pair(profile: &MiProfile, ct: u32) -> Result<ScatterPair> {
    if profile.relevance.iter().all(|&r| r <= 0.0) {
        return Err(MidaError::UninformativeFeatures);
    }
    let n = profile.n_features();
    let s_b = DMatrix::from_diagonal(&DVector::from_column_slice(&profile.relevance));
    let ct_f = f64::from(ct);
    let s_w = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            ct_f + profile.redundancy[(i, j)]
        }
    });
    Ok(ScatterPair { s_b, s_w, ct })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn profile(relevance: Vec<f64>, off: f64) -> MiProfile {
        let n = relevance.len();
        let redundancy = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { off });
        MiProfile { relevance, redundancy }
    }

    #[test]
    fn scatter_examples() {
        let p = profile(vec![0.5, 0.2], 0.0);
        let s = build_scatter_pair(&p, 0).unwrap();
        assert_eq!(s.s_b, DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.2]));
        assert_eq!(s.s_w, DMatrix::zeros(2, 2));
        let s = build_scatter_pair(&p, 1).unwrap();
        assert_eq!(s.s_w, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let p = profile(vec![0.5, 0.2], 0.3);
        let s = build_scatter_pair(&p, 2).unwrap();
        assert_eq!(s.s_w, DMatrix::from_row_slice(2, 2, &[0.0, 2.3, 2.3, 0.0]));
    }

    #[test]
    fn uninformative_is_an_error() {
        let p = profile(vec![0.0, 0.0], 0.1);
        assert!(matches!(build_scatter_pair(&p, 0), Err(MidaError::UninformativeFeatures)));
    }

    #[test]
    fn profile_examples() {
        let x = DMatrix::from_row_slice(4, 1, &[0.0, 1.0, 2.0, 3.0]);
        let d = Dataset::new("one", x, vec![0, 0, 1, 1]).unwrap();
        let p = compute_mi_profile(&d, &HistogramSpec::default()).unwrap();
        assert_eq!(p.relevance.len(), 1);
        assert_eq!(p.redundancy.shape(), (1, 1));

        let col = [0.0, 1.0, 2.0, 3.0, 0.5, 2.5];
        let x = DMatrix::from_fn(6, 2, |i, _| col[i]);
        let d = Dataset::new("dup", x, vec![0, 1, 0, 1, 0, 1]).unwrap();
        let spec = HistogramSpec::new(4).unwrap();
        let p = compute_mi_profile(&d, &spec).unwrap();
        let h = mi::entropy_discrete(&mi::bin_feature(&col, &spec).unwrap()).unwrap();
        assert!((p.redundancy[(0, 1)] - h).abs() < 1e-12);
        assert_eq!(p.redundancy[(1, 0)], p.redundancy[(0, 1)]);

        let single = Dataset::new("one-class", DMatrix::from_row_slice(2, 1, &[1.0, 2.0]), vec![0, 0]).unwrap();
        assert!(matches!(compute_mi_profile(&single, &spec), Err(MidaError::DegenerateLabels)));
    }

    #[test]
    fn relevant_feature_ranks_first() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = 2000;
        let labels: Vec<usize> = (0..m).map(|i| i % 2).collect();
        let x = DMatrix::from_fn(m, 3, |i, j| match j {
            0 => labels[i] as f64 + 0.1 * rng.random::<f64>(),
            _ => rng.random::<f64>(),
        });
        let d = Dataset::new("syn", x, labels).unwrap();
        let p = compute_mi_profile(&d, &HistogramSpec::default()).unwrap();
        assert!(p.relevance[0] > p.relevance[1]);
        assert!(p.relevance[0] > p.relevance[2]);
        let table = mi::feature_class_table(d.column(0), d.labels(), &HistogramSpec::default()).unwrap();
        assert_eq!(p.relevance[0], mi::exact_mi_table(&table));
    }

    #[test]
    fn ct_step_adds_ones_off_diagonal() {
        let p = profile(vec![0.4, 0.3, 0.1], 0.25);
        let s_b0 = build_scatter_pair(&p, 0).unwrap().s_b;
        for ct in 0..5 {
            let a = build_scatter_pair(&p, ct).unwrap();
            let b = build_scatter_pair(&p, ct + 1).unwrap();
            let diff = &b.s_w - &a.s_w;
            let expected = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 1.0 });
            assert_eq!(diff, expected);
            assert_eq!(a.s_b, s_b0);
        }
    }
}
