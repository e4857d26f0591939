//! C ABI over the `mida` crate.
//!
//! Datasets and models are opaque heap handles released with their `_free`
//! functions. Every fallible call returns a [`MidaStatus`]; on failure the
//! message is available from [`mida_last_error_message`] on the same thread.
//! Matrices cross the boundary as row-major `double` buffers.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use nalgebra::DMatrix;

use mida::baselines::{fit_lda, fit_pca, ProjectionModel};
use mida::data::{load_csv, CsvSchema};
use mida::mi::{mi_feature_class, HistogramSpec};
use mida::mida::{fit_mida, MidaConfig};
use mida::{Dataset, MidaError, MidaModel as CoreMidaModel};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MidaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    DegenerateLabels = 4,
    UninformativeFeatures = 5,
    Numerical = 6,
    Io = 7,
    Parse = 8,
    /// The model kind does not carry the requested value.
    Unsupported = 9,
    BufferTooSmall = 10,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MidaMethod {
    Pca = 0,
    Lda = 1,
    Mida = 2,
}

/// Opaque labeled dataset.
pub struct MidaDataset {
    inner: Dataset,
}

enum Fitted {
    Mida(CoreMidaModel),
    Baseline(ProjectionModel),
}

/// Opaque fitted projection.
pub struct MidaModel {
    inner: Fitted,
}

impl MidaModel {
    fn weights(&self) -> &DMatrix<f64> {
        match &self.inner {
            Fitted::Mida(m) => m.w.matrix(),
            Fitted::Baseline(m) => m.w.matrix(),
        }
    }

    fn transform(&self, x: &DMatrix<f64>) -> mida::Result<DMatrix<f64>> {
        match &self.inner {
            Fitted::Mida(m) => m.transform(x),
            Fitted::Baseline(m) => m.transform(x),
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &MidaError) -> MidaStatus {
    match err {
        MidaError::EmptySample | MidaError::InvalidArgument(_) | MidaError::NotSymmetric(_) => MidaStatus::InvalidArgument,
        MidaError::NonFinite(_) => MidaStatus::InvalidArgument,
        MidaError::LengthMismatch { .. } | MidaError::ShapeMismatch { .. } => MidaStatus::ShapeMismatch,
        MidaError::DegenerateLabels => MidaStatus::DegenerateLabels,
        MidaError::UninformativeFeatures => MidaStatus::UninformativeFeatures,
        MidaError::NoConvergence { .. } | MidaError::NotPositiveDefinite { .. } => MidaStatus::Numerical,
        MidaError::MissingFile { .. } | MidaError::EmptyFile { .. } | MidaError::Io(_) => MidaStatus::Io,
        MidaError::RaggedRow { .. }
        | MidaError::NonNumeric { .. }
        | MidaError::MissingLabelColumn { .. }
        | MidaError::Json(_)
        | MidaError::Csv(_) => MidaStatus::Parse,
    }
}

struct Failure(MidaStatus, String);

impl From<MidaError> for Failure {
    fn from(e: MidaError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(MidaStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MidaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            MidaStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("panic inside mida".into());
            MidaStatus::Panic
        }
    }
}

unsafe fn matrix_from(data: *const f64, rows: usize, cols: usize) -> Result<DMatrix<f64>, Failure> {
    if data.is_null() {
        return Err(null("matrix buffer"));
    }
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| Failure(MidaStatus::InvalidArgument, "matrix size overflows".into()))?;
    let values = slice::from_raw_parts(data, len);
    Ok(DMatrix::from_row_slice(rows, cols, values))
}

unsafe fn write_row_major(m: &DMatrix<f64>, out: *mut f64, out_len: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    let needed = m.nrows() * m.ncols();
    if out_len < needed {
        return Err(Failure(
            MidaStatus::BufferTooSmall,
            format!("output buffer holds {out_len} values, {needed} needed"),
        ));
    }
    let dst = slice::from_raw_parts_mut(out, needed);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            dst[i * m.ncols() + j] = m[(i, j)];
        }
    }
    Ok(())
}

unsafe fn out_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn mida_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mida_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a dataset from a row-major `n_samples x n_features` buffer and one
/// label per sample. Labels may be any integers; they are mapped to dense
/// codes in ascending order.
///
/// # Safety
/// `features` must point to `n_samples * n_features` doubles, `labels` to
/// `n_samples` values and `out` to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn mida_dataset_new(
    features: *const f64,
    n_samples: usize,
    n_features: usize,
    labels: *const usize,
    out: *mut *mut MidaDataset,
) -> MidaStatus {
    guard(|| {
        let x = matrix_from(features, n_samples, n_features)?;
        if labels.is_null() {
            return Err(null("labels"));
        }
        let raw = slice::from_raw_parts(labels, n_samples);
        let inner = Dataset::from_raw_labels("custom", x, raw)?;
        out_handle(out, MidaDataset { inner })
    })
}

/// Loads a comma- or whitespace-delimited file with the label in the last
/// column; a header row is detected automatically.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mida_dataset_load_csv(path: *const c_char, out: *mut *mut MidaDataset) -> MidaStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure(MidaStatus::InvalidArgument, "path is not UTF-8".into()))?;
        let inner = load_csv(path, &CsvSchema::default())?;
        out_handle(out, MidaDataset { inner })
    })
}

/// # Safety
/// `dataset` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mida_dataset_free(dataset: *mut MidaDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// # Safety
/// `dataset` must be a live handle; each output pointer may be NULL.
#[no_mangle]
pub unsafe extern "C" fn mida_dataset_shape(
    dataset: *const MidaDataset,
    n_samples: *mut usize,
    n_features: *mut usize,
    n_classes: *mut usize,
) -> MidaStatus {
    guard(|| {
        let ds = &dataset.as_ref().ok_or_else(|| null("dataset"))?.inner;
        for (dst, v) in [(n_samples, ds.n_samples()), (n_features, ds.n_features()), (n_classes, ds.n_classes())] {
            if !dst.is_null() {
                *dst = v;
            }
        }
        Ok(())
    })
}

/// Fits an extractor with `t` output features. `bins` and `ct_max` apply to
/// `MIDA_METHOD_MIDA`; pass 0 for the defaults (16 bins, ct up to 10).
/// LDA clamps `t` to `min(C - 1, N)`; query the result with
/// [`mida_model_dims`].
///
/// # Safety
/// `dataset` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mida_fit(
    dataset: *const MidaDataset,
    method: MidaMethod,
    t: usize,
    bins: usize,
    ct_max: u32,
    out: *mut *mut MidaModel,
) -> MidaStatus {
    guard(|| {
        let ds = &dataset.as_ref().ok_or_else(|| null("dataset"))?.inner;
        let inner = match method {
            MidaMethod::Mida => {
                let config = MidaConfig {
                    spec: HistogramSpec::new(if bins == 0 { HistogramSpec::DEFAULT_BINS } else { bins })?,
                    ct_max: if ct_max == 0 { mida::mida::DEFAULT_CT_MAX } else { ct_max },
                    ..MidaConfig::default()
                };
                Fitted::Mida(fit_mida(ds, t, &config)?)
            }
            MidaMethod::Pca => Fitted::Baseline(fit_pca(ds.features(), t)?),
            MidaMethod::Lda => Fitted::Baseline(fit_lda(ds, t)?),
        };
        out_handle(out, MidaModel { inner })
    })
}

/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mida_model_free(model: *mut MidaModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Input width `N` and output width `t`.
///
/// # Safety
/// `model` must be a live handle; output pointers may be NULL.
#[no_mangle]
pub unsafe extern "C" fn mida_model_dims(model: *const MidaModel, n_inputs: *mut usize, t: *mut usize) -> MidaStatus {
    guard(|| {
        let w = model.as_ref().ok_or_else(|| null("model"))?.weights();
        if !n_inputs.is_null() {
            *n_inputs = w.nrows();
        }
        if !t.is_null() {
            *t = w.ncols();
        }
        Ok(())
    })
}

/// Copies the `N x t` projection matrix, row-major.
///
/// # Safety
/// `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mida_model_weights(model: *const MidaModel, out: *mut f64, out_len: usize) -> MidaStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        write_row_major(m.weights(), out, out_len)
    })
}

/// Projects a row-major `rows x cols` buffer into `out` (`rows x t`).
///
/// # Safety
/// `x` must hold `rows * cols` doubles and `out` `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mida_model_transform(
    model: *const MidaModel,
    x: *const f64,
    rows: usize,
    cols: usize,
    out: *mut f64,
    out_len: usize,
) -> MidaStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let y = m.transform(&matrix_from(x, rows, cols)?)?;
        write_row_major(&y, out, out_len)
    })
}

/// Selected redundancy offset of a MIDA model.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mida_model_ct_opt(model: *const MidaModel, out: *mut u32) -> MidaStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let Fitted::Mida(inner) = &m.inner else {
            return Err(Failure(MidaStatus::Unsupported, "ct_opt exists only for MIDA models".into()));
        };
        if out.is_null() {
            return Err(null("out"));
        }
        *out = inner.ct_opt;
        Ok(())
    })
}

/// Copies the K value of every ct candidate. `len_out` always receives the
/// curve length, so a call with `out_len = 0` sizes the buffer.
///
/// # Safety
/// `out` must hold `out_len` doubles (may be NULL when `out_len` is 0).
#[no_mangle]
pub unsafe extern "C" fn mida_model_k_curve(
    model: *const MidaModel,
    out: *mut f64,
    out_len: usize,
    len_out: *mut usize,
) -> MidaStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let Fitted::Mida(inner) = &m.inner else {
            return Err(Failure(MidaStatus::Unsupported, "k_curve exists only for MIDA models".into()));
        };
        let curve = &inner.k_curve;
        if !len_out.is_null() {
            *len_out = curve.len();
        }
        if out_len == 0 {
            return Ok(());
        }
        let as_matrix = DMatrix::from_row_slice(1, curve.len(), curve);
        write_row_major(&as_matrix, out, out_len)
    })
}

/// Histogram mutual information in bits between one feature and labels.
///
/// # Safety
/// `feature` and `labels` must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mida_mi_feature_class(
    feature: *const f64,
    labels: *const usize,
    n: usize,
    bins: usize,
    out: *mut f64,
) -> MidaStatus {
    guard(|| {
        if feature.is_null() || labels.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let spec = HistogramSpec::new(bins)?;
        let est = mi_feature_class(slice::from_raw_parts(feature, n), slice::from_raw_parts(labels, n), &spec)?;
        *out = est.value;
        Ok(())
    })
}
