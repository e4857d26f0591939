//! Strategies and property checks shared by the proptest suite and the
//! acceptance binary.
#![allow(dead_code)]

use nalgebra::DMatrix;
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use mida::baselines::{fit_lda, fit_pca, lda_scatter};
use mida::data::{load_csv, registry_check, write_csv, CsvSchema};
use mida::eval::{fit_extractors, prepare_fold, stratified_folds, CvConfig, Method, Normalization};
use mida::experiment::{run_on_dataset, ExperimentConfig};
use mida::geneig::{solve_fisher_rao, EigenSolution};
use mida::mi::{
    bin_feature, exact_mi_table, feature_class_table, feature_feature_table, mi_feature_class, mi_feature_feature,
    HistogramSpec, JointCountTable,
};
use mida::mida::{fit_mida, select_ct, MidaConfig};
use mida::{build_scatter_pair, compute_mi_profile, Dataset, MidaError};

pub type Check = Result<(), TestCaseError>;

pub const CASES: u32 = 256;

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

// ---------------------------------------------------------------- strategies

/// Mix of continuous values and small integers so ties and constant
/// columns show up.
pub fn value() -> impl Strategy<Value = f64> {
    prop_oneof![
        3 => -10.0..10.0f64,
        1 => (-3i32..=3).prop_map(f64::from),
    ]
}

/// Two features and labels of a common length.
pub fn paired_sample() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<usize>, usize)> {
    (2usize..60, 1usize..=12, 1usize..=5).prop_flat_map(|(m, bins, classes)| {
        (vec(value(), m), vec(value(), m), vec(0..classes, m), Just(bins))
    })
}

pub fn count_table() -> impl Strategy<Value = JointCountTable> {
    (1usize..=6, 1usize..=6)
        .prop_flat_map(|(r, c)| (Just(r), Just(c), vec(0u64..15, r * c)))
        .prop_map(|(r, c, mut cells)| {
            cells[0] += 1;
            let rows: Vec<Vec<u64>> = cells.chunks(c).map(<[u64]>::to_vec).collect();
            let table = JointCountTable::from_rows(&rows).expect("valid table");
            debug_assert_eq!(table.n_rows(), r);
            table
        })
}

/// Table plus a row merge map onto `1..=rows` groups.
pub fn table_and_merge() -> impl Strategy<Value = (JointCountTable, Vec<usize>, usize)> {
    count_table().prop_flat_map(|t| {
        let r = t.n_rows();
        (Just(t), 1..=r).prop_flat_map(move |(t, groups)| (Just(t), vec(0..groups, r), Just(groups)))
    })
}

pub fn symmetric(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    vec(-2.0..2.0f64, n * n).prop_map(move |v| {
        let m = DMatrix::from_vec(n, n, v);
        (&m + m.transpose()) * 0.5
    })
}

pub fn symmetric_pair() -> impl Strategy<Value = (DMatrix<f64>, DMatrix<f64>)> {
    (2usize..=8).prop_flat_map(|n| (symmetric(n), symmetric(n)))
}

/// Labeled dataset with every class present.
pub fn dataset(max_features: usize, max_classes: usize) -> impl Strategy<Value = Dataset> {
    (1usize..=max_features, 2usize..=max_classes, 12usize..48).prop_flat_map(|(n, c, m)| {
        (vec(value(), m * n), vec(0..c, m), Just((m, n, c)))
            .prop_map(|(values, mut labels, (m, n, c))| {
                for (k, l) in labels.iter_mut().take(c).enumerate() {
                    *l = k;
                }
                Dataset::new("random", DMatrix::from_row_slice(m, n, &values), labels).expect("valid dataset")
            })
    })
}

pub fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn small_config() -> MidaConfig {
    MidaConfig {
        spec: HistogramSpec::new(6).unwrap(),
        ct_max: 4,
        ..MidaConfig::default()
    }
}

fn tolerate_uninformative<T>(r: mida::Result<T>) -> Result<Option<T>, TestCaseError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(MidaError::UninformativeFeatures) => Ok(None),
        Err(e) => Err(fail(format!("unexpected error {e}"))),
    }
}

fn frob(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

/// Smallest distance from `values[k]` to any other entry, scaled.
fn relative_gap(values: &[f64], k: usize) -> f64 {
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    values
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .map(|(_, v)| (v - values[k]).abs())
        .fold(f64::INFINITY, f64::min)
        / scale
}

fn same_up_to_sign(a: &[f64], b: &[f64], tol: f64) -> bool {
    let plus: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let minus: f64 = a.iter().zip(b).map(|(x, y)| (x + y).powi(2)).sum::<f64>().sqrt();
    plus.min(minus) <= tol
}

// ------------------------------------------------------------- MI properties

pub fn mi_bounds((a, b, labels, bins): (Vec<f64>, Vec<f64>, Vec<usize>, usize)) -> Check {
    let spec = HistogramSpec::new(bins).unwrap();
    for est in [
        mi_feature_class(&a, &labels, &spec).unwrap(),
        mi_feature_feature(&a, &b, &spec).unwrap(),
    ] {
        prop_assert!(est.value >= -1e-12, "negative MI {}", est.value);
        prop_assert!(
            est.value <= est.h_row.min(est.h_col) + 1e-9,
            "MI {} above entropies {} {}",
            est.value,
            est.h_row,
            est.h_col
        );
    }
    Ok(())
}

pub fn mi_symmetry((a, b, _, bins): (Vec<f64>, Vec<f64>, Vec<usize>, usize)) -> Check {
    let spec = HistogramSpec::new(bins).unwrap();
    let ab = mi_feature_feature(&a, &b, &spec).unwrap().value;
    let ba = mi_feature_feature(&b, &a, &spec).unwrap().value;
    prop_assert_eq!(ab.to_bits(), ba.to_bits());
    Ok(())
}

pub fn mi_data_processing((table, mapping, groups): (JointCountTable, Vec<usize>, usize)) -> Check {
    let merged = table.merge_rows(&mapping, groups).unwrap();
    prop_assert_eq!(merged.total(), table.total());
    let before = exact_mi_table(&table);
    let after = exact_mi_table(&merged);
    prop_assert!(after <= before + 1e-12, "merging raised MI: {after} > {before}");
    Ok(())
}

pub fn mi_agreement((a, b, labels, bins): (Vec<f64>, Vec<f64>, Vec<usize>, usize)) -> Check {
    let spec = HistogramSpec::new(bins).unwrap();
    let fc = mi_feature_class(&a, &labels, &spec).unwrap().value;
    let fc_table = exact_mi_table(&feature_class_table(&a, &labels, &spec).unwrap());
    prop_assert!((fc - fc_table).abs() <= 1e-12, "feature-class {fc} vs {fc_table}");
    let ff = mi_feature_feature(&a, &b, &spec).unwrap().value;
    let ff_table = exact_mi_table(&feature_feature_table(&a, &b, &spec).unwrap());
    prop_assert!((ff - ff_table).abs() <= 1e-12, "feature-feature {ff} vs {ff_table}");
    Ok(())
}

// ---------------------------------------------------------- eigen properties

fn regularized(b: &DMatrix<f64>, sol: &EigenSolution) -> DMatrix<f64> {
    b + DMatrix::identity(b.nrows(), b.ncols()) * sol.regularization_shift
}

pub fn eigen_residual((a, b): (DMatrix<f64>, DMatrix<f64>)) -> Check {
    let n = a.nrows();
    let sol = solve_fisher_rao(&a, &b, n).map_err(|e| fail(e.to_string()))?;
    let b_reg = regularized(&b, &sol);
    prop_assert!(sol.eigenvalues.windows(2).all(|p| p[0] >= p[1]));
    for (k, &lambda) in sol.eigenvalues.iter().enumerate() {
        let v = sol.eigenvectors.column(k);
        let residual = (&a * v - (&b_reg * v) * lambda).norm();
        let bound = 1e-8 * (frob(&a) + lambda.abs() * frob(&b_reg));
        prop_assert!(residual <= bound, "pair {k}: residual {residual:e} > {bound:e}");
        prop_assert!((v.norm() - 1.0).abs() <= 1e-12);
        let max = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        prop_assert!(max > 0.0);
    }
    Ok(())
}

/// Eigenvalues of the general matrix `(B')⁻¹ A` via a Schur decomposition,
/// compared with the symmetric-definite route.
pub fn eigen_brute_force((a, b): (DMatrix<f64>, DMatrix<f64>)) -> Check {
    let n = a.nrows();
    let sol = solve_fisher_rao(&a, &b, n).map_err(|e| fail(e.to_string()))?;
    let b_reg = regularized(&b, &sol);
    let op = b_reg.clone().try_inverse().ok_or_else(|| fail("B' singular".into()))? * &a;
    let mut brute: Vec<(f64, f64)> = op.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect();
    brute.sort_by(|x, y| y.0.total_cmp(&x.0));
    let scale = sol.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for (k, (&lambda, (re, im))) in sol.eigenvalues.iter().zip(&brute).enumerate() {
        prop_assert!(im.abs() <= 1e-8 * scale, "eigenvalue {k} has imaginary part {im:e}");
        prop_assert!(
            (lambda - re).abs() <= 1e-8 * scale,
            "eigenvalue {k}: {lambda} vs brute force {re} (scale {scale})"
        );
    }
    Ok(())
}

pub fn eigen_scaling(((a, b), c): ((DMatrix<f64>, DMatrix<f64>), f64)) -> Check {
    let n = a.nrows();
    let base = solve_fisher_rao(&a, &b, n).map_err(|e| fail(e.to_string()))?;
    let scaled = solve_fisher_rao(&(&a * c), &b, n).map_err(|e| fail(e.to_string()))?;
    let scale = base.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for k in 0..n {
        let expected = c * base.eigenvalues[k];
        prop_assert!((scaled.eigenvalues[k] - expected).abs() <= 1e-9 * c * scale);
        if relative_gap(&base.eigenvalues, k) > 1e-4 {
            let u: Vec<f64> = base.eigenvectors.column(k).iter().copied().collect();
            let v: Vec<f64> = scaled.eigenvectors.column(k).iter().copied().collect();
            prop_assert!(same_up_to_sign(&u, &v, 1e-6), "eigenvector {k} moved under scaling");
        }
    }
    Ok(())
}

pub fn eigen_determinism((a, b): (DMatrix<f64>, DMatrix<f64>)) -> Check {
    let n = a.nrows();
    let first = solve_fisher_rao(&a, &b, n).map_err(|e| fail(e.to_string()))?;
    let second = solve_fisher_rao(&a, &b, n).map_err(|e| fail(e.to_string()))?;
    prop_assert_eq!(first, second);
    Ok(())
}

// --------------------------------------------------------- scatter and MIDA

pub fn scatter_equivariance((ds, perm): (Dataset, Vec<usize>)) -> Check {
    let spec = HistogramSpec::new(6).unwrap();
    let n = ds.n_features();
    let x = ds.features();
    let permuted = DMatrix::from_fn(ds.n_samples(), n, |i, j| x[(i, perm[j])]);
    let p = compute_mi_profile(&ds, &spec).unwrap();
    let q = compute_mi_profile(&ds.with_features(permuted).unwrap(), &spec).unwrap();
    for i in 0..n {
        prop_assert_eq!(q.relevance[i].to_bits(), p.relevance[perm[i]].to_bits());
        for j in 0..n {
            prop_assert_eq!(q.redundancy[(i, j)].to_bits(), p.redundancy[(perm[i], perm[j])].to_bits());
        }
    }
    let Some(sp) = tolerate_uninformative(build_scatter_pair(&p, 2))? else {
        return Ok(());
    };
    let sq = build_scatter_pair(&q, 2).unwrap();
    let next = build_scatter_pair(&p, 3).unwrap();
    prop_assert_eq!(&next.s_b, &sp.s_b);
    for i in 0..n {
        for j in 0..n {
            prop_assert_eq!(sq.s_b[(i, j)], sp.s_b[(perm[i], perm[j])]);
            prop_assert_eq!(sq.s_w[(i, j)], sp.s_w[(perm[i], perm[j])]);
            let step = next.s_w[(i, j)] - sp.s_w[(i, j)];
            let expected = if i == j { 0.0 } else { 1.0 };
            prop_assert!((step - expected).abs() <= 1e-12);
        }
    }
    Ok(())
}

pub fn k_at_ct_opt_is_max((ds, t_seed): (Dataset, usize)) -> Check {
    let t = 1 + t_seed % ds.n_features();
    let config = small_config();
    let Some((ct_opt, curve)) = tolerate_uninformative(select_ct(&ds, t, &config))? else {
        return Ok(());
    };
    prop_assert_eq!(curve.len(), config.ct_max as usize + 1);
    let best = curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    prop_assert_eq!(curve[ct_opt as usize], best);
    prop_assert!(curve[..ct_opt as usize].iter().all(|&k| k < best), "not the first maximum");
    let model = fit_mida(&ds, t, &config).unwrap();
    prop_assert_eq!(model.w.t(), t);
    prop_assert_eq!(model.ct_opt, ct_opt);
    Ok(())
}

pub fn class_relabel_invariance((ds, perm): (Dataset, Vec<usize>)) -> Check {
    let relabeled: Vec<usize> = ds.labels().iter().map(|&l| perm[l]).collect();
    let other = Dataset::new("random", ds.features().clone(), relabeled).unwrap();
    let t = ds.n_features();
    let config = small_config();
    let Some(a) = tolerate_uninformative(fit_mida(&ds, t, &config))? else {
        return Ok(());
    };
    let b = fit_mida(&other, t, &config).unwrap();
    prop_assert_eq!(a.w.matrix(), b.w.matrix());
    prop_assert_eq!(a.ct_opt, b.ct_opt);
    Ok(())
}

pub fn affine_rescale_invariance((ds, scales, offsets): (Dataset, Vec<f64>, Vec<f64>)) -> Check {
    let spec = HistogramSpec::new(6).unwrap();
    let n = ds.n_features();
    let x = ds.features();
    let y = DMatrix::from_fn(ds.n_samples(), n, |i, j| scales[j % scales.len()] * x[(i, j)] + offsets[j % offsets.len()]);
    let rescaled = ds.with_features(y).unwrap();
    for j in 0..n {
        prop_assume!(bin_feature(ds.column(j), &spec).unwrap() == bin_feature(rescaled.column(j), &spec).unwrap());
    }
    let p = compute_mi_profile(&ds, &spec).unwrap();
    let q = compute_mi_profile(&rescaled, &spec).unwrap();
    prop_assert_eq!(p, q);
    Ok(())
}

// ------------------------------------------------------------------ baselines

pub fn pca_orthonormal(x: DMatrix<f64>) -> Check {
    let n = x.ncols();
    let model = fit_pca(&x, n).unwrap();
    let w = model.w.matrix();
    let gram = w.transpose() * w;
    let err = (gram - DMatrix::identity(n, n)).abs().max();
    prop_assert!(err <= 1e-10, "orthonormality error {err:e}");
    prop_assert!(model.eigenvalues.windows(2).all(|p| p[0] >= p[1]));
    Ok(())
}

pub fn pca_input() -> impl Strategy<Value = DMatrix<f64>> {
    (3usize..30, 1usize..=6).prop_flat_map(|(m, n)| vec(value(), m * n).prop_map(move |v| DMatrix::from_vec(m, n, v)))
}

pub fn lda_rank(ds: Dataset) -> Check {
    let sc = lda_scatter(&ds).unwrap();
    let sv = sc.s_b.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0f64, f64::max);
    let rank = sv.iter().filter(|&&s| s > 1e-8 * top.max(1e-300)).count();
    prop_assert!(rank < ds.n_classes(), "rank {rank} with {} classes", ds.n_classes());
    Ok(())
}

/// Permuting and offsetting class codes leaves the LDA directions unchanged.
pub fn lda_recoding_invariance((ds, perm): (Dataset, Vec<usize>)) -> Check {
    let relabeled: Vec<usize> = ds.labels().iter().map(|&l| perm[l]).collect();
    let other = Dataset::new("random", ds.features().clone(), relabeled).unwrap();
    let t = ds.n_features();
    let a = fit_lda(&ds, t).unwrap();
    let b = fit_lda(&other, t).unwrap();
    prop_assert_eq!(a.effective_t(), b.effective_t());
    let scale = a.eigenvalues.iter().fold(1e-12f64, |m, v| m.max(v.abs()));
    for k in 0..a.effective_t() {
        prop_assert!((a.eigenvalues[k] - b.eigenvalues[k]).abs() <= 1e-8 * scale);
        if relative_gap(&a.eigenvalues, k) > 1e-4 && a.eigenvalues[k] > 1e-6 * scale {
            let u: Vec<f64> = a.w.matrix().column(k).iter().copied().collect();
            let v: Vec<f64> = b.w.matrix().column(k).iter().copied().collect();
            prop_assert!(same_up_to_sign(&u, &v, 1e-6), "direction {k} changed");
        }
    }
    Ok(())
}

// ------------------------------------------------------------ harness / IO

/// The per-fold extractor depends only on training rows: refitting on the
/// dataset with the fold's test rows deleted gives the same projection.
pub fn no_leakage((ds, k, seed, fold_seed): (Dataset, usize, u64, usize)) -> Check {
    let plan = stratified_folds(ds.labels(), k, seed).unwrap();
    let fold = fold_seed % k;
    let train_idx = plan.train_indices(fold);
    let cfg = CvConfig {
        mida: small_config(),
        ..CvConfig::default()
    };
    let data = prepare_fold(&ds, &plan, fold, Normalization::PerFeature).unwrap();
    prop_assume!(data.train.n_classes() >= 2 && data.train.class_counts().iter().all(|&c| c > 0));

    let kept = ds.subset(&train_idx);
    let (alone, _, _) = mida::eval::normalize_with(kept.features(), kept.features(), Normalization::PerFeature).unwrap();
    let kept = kept.with_features(alone).unwrap();
    prop_assert_eq!(kept.features(), data.train.features());

    let dims = [1usize];
    for method in [Method::Pca, Method::Lda, Method::Mida] {
        let fold_fit = match fit_extractors(method, &data.train, &dims, &cfg) {
            Err(MidaError::UninformativeFeatures) => continue,
            other => other.unwrap(),
        };
        let alone_fit = fit_extractors(method, &kept, &dims, &cfg).unwrap();
        let w1 = fold_fit[0].as_ref().and_then(|e| e.projection()).map(|w| w.matrix().clone());
        let w2 = alone_fit[0].as_ref().and_then(|e| e.projection()).map(|w| w.matrix().clone());
        prop_assert_eq!(w1, w2, "{} projection differs", method);
    }
    Ok(())
}

pub fn leakage_input() -> impl Strategy<Value = (Dataset, usize, u64, usize)> {
    (dataset(4, 3), 2usize..=4, any::<u64>(), any::<usize>())
}

pub fn report_determinism((ds, seed): (Dataset, u64)) -> Check {
    let mut config = ExperimentConfig::new("unused.csv", "custom");
    config.methods = vec![Method::Raw, Method::Pca, Method::Lda, Method::Mida];
    config.dims = vec![1, 2];
    config.folds = 2;
    config.seed = seed;
    config.bins = 6;
    config.ct_max = 3;
    let first = match run_on_dataset(&config, &ds) {
        Err(MidaError::UninformativeFeatures) | Err(MidaError::DegenerateLabels) => return Ok(()),
        other => other.unwrap(),
    };
    let second = run_on_dataset(&config, &ds).unwrap();
    let a = serde_json::to_string(&first.report).unwrap();
    let b = serde_json::to_string(&second.report).unwrap();
    prop_assert_eq!(a, b);
    prop_assert_eq!(first.grid, second.grid);
    for agg in &first.table.aggregates {
        if let Some(mean) = agg.mean_accuracy {
            let folds: Vec<f64> = first
                .table
                .records
                .iter()
                .filter(|r| r.method == agg.method && r.dim == agg.dim)
                .map(|r| r.accuracy.unwrap())
                .collect();
            prop_assert!(folds.iter().all(|a| (0.0..=1.0).contains(a)));
            let direct = folds.iter().sum::<f64>() / folds.len() as f64;
            prop_assert!((mean - direct).abs() <= 1e-12);
        }
    }
    Ok(())
}

pub fn csv_round_trip((values, labels, n): (Vec<f64>, Vec<usize>, usize)) -> Check {
    let m = labels.len();
    let x = DMatrix::from_row_slice(m, n, &values);
    let ds = Dataset::from_raw_labels("custom", x, &labels).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rt.csv");
    write_csv(&ds, &path).unwrap();
    let back = load_csv(&path, &CsvSchema::default()).unwrap();
    prop_assert_eq!(back.features(), ds.features());
    prop_assert_eq!(back.labels(), ds.labels());
    let before = ds.clone();
    let _ = registry_check(&ds);
    prop_assert_eq!(before, ds);
    Ok(())
}

pub fn csv_values() -> impl Strategy<Value = (Vec<f64>, Vec<usize>, usize)> {
    (1usize..20, 1usize..5).prop_flat_map(|(m, n)| {
        (
            vec(prop_oneof![prop::num::f64::NORMAL, prop::num::f64::SUBNORMAL, Just(0.0), Just(-0.0)], m * n),
            vec(0usize..4, m),
            Just(n),
        )
    })
}
