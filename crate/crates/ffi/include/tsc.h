#ifndef TSC_H
#define TSC_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Result code of every fallible call.
 */
typedef enum TscStatus {
  TSC_STATUS_OK = 0,
  TSC_STATUS_NULL_POINTER = 1,
  TSC_STATUS_INVALID_ARGUMENT = 2,
  TSC_STATUS_INVALID_Q = 3,
  TSC_STATUS_ZERO_POINT = 4,
  TSC_STATUS_CONVERGENCE_FAILURE = 5,
  TSC_STATUS_EMPTY_AFTER_REMOVAL = 6,
  TSC_STATUS_DEGENERATE_ERASURE = 7,
  TSC_STATUS_LENGTH_MISMATCH = 8,
  TSC_STATUS_NOT_ORTHONORMAL = 9,
  TSC_STATUS_PARSE_ERROR = 10,
  TSC_STATUS_IO_ERROR = 11,
  TSC_STATUS_BUFFER_TOO_SMALL = 12,
  TSC_STATUS_PANIC = 99,
} TscStatus;

/*
 Opaque clustering result handle.
 */
typedef struct TscClusterResult TscClusterResult;

/*
 Opaque dataset handle.
 */
typedef struct TscDataset TscDataset;

/*
 Options for [`tsc_cluster`]. Zero in `l_hat` or `max_clusters` selects the
 library default (eigengap estimate, search up to N/2).
 */
typedef struct TscClusterOptions {
  size_t l_hat;
  size_t max_clusters;
  uint64_t seed;
  bool remove_outliers;
} TscClusterOptions;

/*
 Message of the most recent failure on this thread, or null. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *tsc_last_error_message(void);

/*
 Copies `n * m` row-major doubles into a new dataset.

 # Safety
 `points` must reference `n * m` readable doubles; `out` must be writable.
 */
enum TscStatus tsc_dataset_new(const double *points, size_t n, size_t m, struct TscDataset **out);

/*
 Loads a headerless CSV dataset.

 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum TscStatus tsc_dataset_from_csv(const char *path, struct TscDataset **out);

/*
 # Safety
 `data` must be null or a handle from this library not yet freed.
 */
void tsc_dataset_free(struct TscDataset *data);

/*
 Number of points, or 0 for a null handle.

 # Safety
 `data` must be null or a live handle.
 */
size_t tsc_dataset_len(const struct TscDataset *data);

/*
 Ambient dimension, or 0 for a null handle.

 # Safety
 `data` must be null or a live handle.
 */
size_t tsc_dataset_dim(const struct TscDataset *data);

struct TscClusterOptions tsc_cluster_options_default(void);

/*
 Runs thresholding-based subspace clustering with `q` neighbors per point.

 # Safety
 `data` must be a live handle, `options` null (defaults) or readable, and
 `out` writable.
 */
enum TscStatus tsc_cluster(const struct TscDataset *data,
                           size_t q,
                           const struct TscClusterOptions *options,
                           struct TscClusterResult **out);

/*
 # Safety
 `result` must be null or a live handle.
 */
void tsc_cluster_result_free(struct TscClusterResult *result);

/*
 Number of labels (points), or 0 for a null handle.

 # Safety
 `result` must be null or a live handle.
 */
size_t tsc_cluster_result_len(const struct TscClusterResult *result);

/*
 Estimated (or pinned) number of clusters, or 0 for a null handle.

 # Safety
 `result` must be null or a live handle.
 */
size_t tsc_cluster_result_l_hat(const struct TscClusterResult *result);

/*
 Copies the labels (-1 marks a removed outlier) into `labels`, which must
 hold at least `tsc_cluster_result_len` entries.

 # Safety
 `result` must be a live handle and `labels` writable for `capacity` ints.
 */
enum TscStatus tsc_cluster_result_labels(const struct TscClusterResult *result,
                                         int32_t *labels,
                                         size_t capacity);

/*
 Copies up to `capacity` of the smallest Laplacian eigenvalues (ascending)
 and stores the count in `written`.

 # Safety
 `result` must be a live handle, `values` writable for `capacity` doubles
 and `written` writable.
 */
enum TscStatus tsc_cluster_result_eigenvalues(const struct TscClusterResult *result,
                                              double *values,
                                              size_t capacity,
                                              size_t *written);

/*
 Flags outliers (1) after normalizing the rows, writing one byte per point
 into `flags` and the threshold into `threshold` (may be null).

 # Safety
 `data` must be a live handle, `flags` writable for `capacity` bytes.
 */
enum TscStatus tsc_detect_outliers(const struct TscDataset *data,
                                   uint8_t *flags,
                                   size_t capacity,
                                   double *threshold);

/*
 `sqrt(6 ln n) / sqrt(m)`.
 */
double tsc_outlier_threshold(size_t n, size_t m);

/*
 Clustering error of `predicted` against `truth` under the best label
 matching.

 # Safety
 Both arrays must hold `len` readable ints; `out` must be writable.
 */
enum TscStatus tsc_clustering_error(const int32_t *predicted,
                                    const int32_t *truth,
                                    size_t len,
                                    double *out);

#endif  /* TSC_H */
