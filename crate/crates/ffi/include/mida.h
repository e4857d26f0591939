#ifndef MIDA_H
#define MIDA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/*
 Result code of every fallible call.
 */
typedef enum MidaStatus {
  MIDA_STATUS_OK = 0,
  MIDA_STATUS_NULL_POINTER = 1,
  MIDA_STATUS_INVALID_ARGUMENT = 2,
  MIDA_STATUS_SHAPE_MISMATCH = 3,
  MIDA_STATUS_DEGENERATE_LABELS = 4,
  MIDA_STATUS_UNINFORMATIVE_FEATURES = 5,
  MIDA_STATUS_NUMERICAL = 6,
  MIDA_STATUS_IO = 7,
  MIDA_STATUS_PARSE = 8,
  /*
   The model kind does not carry the requested value.
   */
  MIDA_STATUS_UNSUPPORTED = 9,
  MIDA_STATUS_BUFFER_TOO_SMALL = 10,
  MIDA_STATUS_PANIC = 99,
} MidaStatus;

typedef enum MidaMethod {
  MIDA_METHOD_PCA = 0,
  MIDA_METHOD_LDA = 1,
  MIDA_METHOD_MIDA = 2,
} MidaMethod;

/*
 Opaque labeled dataset.
 */
typedef struct MidaDataset MidaDataset;

/*
 Opaque fitted projection.
 */
typedef struct MidaModel MidaModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. The pointer is
 valid until the next call into the library on the same thread.
 */
const char *mida_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *mida_version(void);

/*
 Builds a dataset from a row-major `n_samples x n_features` buffer and one
 label per sample. Labels may be any integers; they are mapped to dense
 codes in ascending order.

 # Safety
 `features` must point to `n_samples * n_features` doubles, `labels` to
 `n_samples` values and `out` to writable storage for a handle.
 */
enum MidaStatus mida_dataset_new(const double *features,
                                 uintptr_t n_samples,
                                 uintptr_t n_features,
                                 const uintptr_t *labels,
                                 struct MidaDataset **out);

/*
 Loads a comma- or whitespace-delimited file with the label in the last
 column; a header row is detected automatically.

 # Safety
 `path` must be a NUL-terminated string and `out` writable.
 */
enum MidaStatus mida_dataset_load_csv(const char *path, struct MidaDataset **out);

/*
 # Safety
 `dataset` must come from this library and not be used afterwards.
 */
void mida_dataset_free(struct MidaDataset *dataset);

/*
 # Safety
 `dataset` must be a live handle; each output pointer may be NULL.
 */
enum MidaStatus mida_dataset_shape(const struct MidaDataset *dataset,
                                   uintptr_t *n_samples,
                                   uintptr_t *n_features,
                                   uintptr_t *n_classes);

/*
 Fits an extractor with `t` output features. `bins` and `ct_max` apply to
 `MIDA_METHOD_MIDA`; pass 0 for the defaults (16 bins, ct up to 10).
 LDA clamps `t` to `min(C - 1, N)`; query the result with
 [`mida_model_dims`].

 # Safety
 `dataset` must be a live handle and `out` writable.
 */
enum MidaStatus mida_fit(const struct MidaDataset *dataset,
                         enum MidaMethod method,
                         uintptr_t t,
                         uintptr_t bins,
                         uint32_t ct_max,
                         struct MidaModel **out);

/*
 # Safety
 `model` must come from this library and not be used afterwards.
 */
void mida_model_free(struct MidaModel *model);

/*
 Input width `N` and output width `t`.

 # Safety
 `model` must be a live handle; output pointers may be NULL.
 */
enum MidaStatus mida_model_dims(const struct MidaModel *model, uintptr_t *n_inputs, uintptr_t *t);

/*
 Copies the `N x t` projection matrix, row-major.

 # Safety
 `out` must hold `out_len` doubles.
 */
enum MidaStatus mida_model_weights(const struct MidaModel *model, double *out, uintptr_t out_len);

/*
 Projects a row-major `rows x cols` buffer into `out` (`rows x t`).

 # Safety
 `x` must hold `rows * cols` doubles and `out` `out_len` doubles.
 */
enum MidaStatus mida_model_transform(const struct MidaModel *model,
                                     const double *x,
                                     uintptr_t rows,
                                     uintptr_t cols,
                                     double *out,
                                     uintptr_t out_len);

/*
 Selected redundancy offset of a MIDA model.

 # Safety
 `model` must be a live handle and `out` writable.
 */
enum MidaStatus mida_model_ct_opt(const struct MidaModel *model, uint32_t *out);

/*
 Copies the K value of every ct candidate. `len_out` always receives the
 curve length, so a call with `out_len = 0` sizes the buffer.

 # Safety
 `out` must hold `out_len` doubles (may be NULL when `out_len` is 0).
 */
enum MidaStatus mida_model_k_curve(const struct MidaModel *model,
                                   double *out,
                                   uintptr_t out_len,
                                   uintptr_t *len_out);

/*
 Histogram mutual information in bits between one feature and labels.

 # Safety
 `feature` and `labels` must hold `n` values; `out` must be writable.
 */
enum MidaStatus mida_mi_feature_class(const double *feature,
                                      const uintptr_t *labels,
                                      uintptr_t n,
                                      uintptr_t bins,
                                      double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIDA_H */
