#ifndef GKMEANS_H
#define GKMEANS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define GKM_ALGORITHM_LLOYD 0

#define GKM_ALGORITHM_GKMEANS 1

#define GKM_ALGORITHM_HAMERLY 2

#define GKM_INIT_RANDOM 0

#define GKM_INIT_KMEANSPP 1

typedef enum {
  GKM_STATUS_OK = 0,
  GKM_STATUS_NULL_POINTER = 1,
  GKM_STATUS_INVALID_ARGUMENT = 2,
  GKM_STATUS_CONFIG = 3,
  GKM_STATUS_DATA = 4,
  GKM_STATUS_DIMENSION_MISMATCH = 5,
  GKM_STATUS_DEGENERATE = 6,
  GKM_STATUS_BUFFER_TOO_SMALL = 7,
  GKM_STATUS_IO = 8,
  GKM_STATUS_PANIC = 9,
} GkmStatus;

/**
 * Row-major `m × d` data matrix.
 */
typedef struct GkmDataset GkmDataset;

/**
 * Result of a clustering run.
 */
typedef struct GkmSolution GkmSolution;

/**
 * Solver parameters. Obtain defaults from [`gkm_params_default`].
 */
typedef struct {
  size_t max_iters;
  double epsilon;
  uint64_t seed;
} GkmParams;

/**
 * Distance and projection counts of a run.
 */
typedef struct {
  /**
   * Every full distance evaluation.
   */
  uint64_t dc_total;
  /**
   * Centroid-to-centroid distances (included in `dc_total`).
   */
  uint64_t dc_centroid_pairs;
  /**
   * Own-centroid refreshes (included in `dc_total`).
   */
  uint64_t dc_own_refresh;
  uint64_t projections;
} GkmCounters;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

GkmParams gkm_params_default(void);

/**
 * Copies `m·d` row-major values into a new dataset.
 *
 * # Safety
 * `values` must be valid for `m·d` reads and `out` for one write.
 */
GkmStatus gkm_dataset_new(const double *values, size_t m, size_t d, GkmDataset **out);

/**
 * # Safety
 * `data` must be null or a handle from [`gkm_dataset_new`] not yet freed.
 */
void gkm_dataset_free(GkmDataset *data);

/**
 * Number of rows, or 0 for a null handle.
 *
 * # Safety
 * `data` must be null or a live dataset handle.
 */
size_t gkm_dataset_rows(const GkmDataset *data);

/**
 * Number of columns, or 0 for a null handle.
 *
 * # Safety
 * `data` must be null or a live dataset handle.
 */
size_t gkm_dataset_cols(const GkmDataset *data);

/**
 * Seeds `k` centroids with `init` (`GKM_INIT_*`) from `params->seed` and
 * clusters with `algorithm` (`GKM_ALGORITHM_*`). `params` may be null for
 * defaults.
 *
 * # Safety
 * `data` must be a live dataset handle, `params` null or valid, `out`
 * valid for one write.
 */
GkmStatus gkm_run(const GkmDataset *data,
                  size_t k,
                  uint32_t algorithm_code,
                  uint32_t init_code,
                  const GkmParams *params_ptr,
                  GkmSolution **out);

/**
 * Clusters from caller-supplied initial centroids (`k × d`, row-major).
 *
 * # Safety
 * `data` must be a live dataset handle, `centroids` valid for `k·d` reads,
 * `params` null or valid, `out` valid for one write.
 */
GkmStatus gkm_run_from_centroids(const GkmDataset *data,
                                 const double *centroids,
                                 size_t k,
                                 uint32_t algorithm_code,
                                 const GkmParams *params_ptr,
                                 GkmSolution **out);

/**
 * # Safety
 * `sol` must be null or a handle from a run function not yet freed.
 */
void gkm_solution_free(GkmSolution *sol);

/**
 * # Safety
 * `sol` must be null or a live solution handle.
 */
size_t gkm_solution_iterations(const GkmSolution *sol);

/**
 * Final SSE, or NaN for a null handle.
 *
 * # Safety
 * `sol` must be null or a live solution handle.
 */
double gkm_solution_sse(const GkmSolution *sol);

/**
 * # Safety
 * `sol` must be null or a live solution handle.
 */
bool gkm_solution_converged(const GkmSolution *sol);

/**
 * # Safety
 * `sol` must be null or a live solution handle.
 */
size_t gkm_solution_k(const GkmSolution *sol);

/**
 * # Safety
 * `sol` must be null or a live solution handle.
 */
size_t gkm_solution_len(const GkmSolution *sol);

/**
 * # Safety
 * `sol` must be a live solution handle and `out` valid for one write.
 */
GkmStatus gkm_solution_counters(const GkmSolution *sol, GkmCounters *out);

/**
 * Copies the `m` cluster indices into `out` (capacity `len`).
 *
 * # Safety
 * `sol` must be a live solution handle and `out` valid for `len` writes.
 */
GkmStatus gkm_solution_copy_assign(const GkmSolution *sol, size_t *out, size_t len);

/**
 * Copies the `k·d` final centroid coordinates into `out` (capacity `len`).
 *
 * # Safety
 * `sol` must be a live solution handle and `out` valid for `len` writes.
 */
GkmStatus gkm_solution_copy_centroids(const GkmSolution *sol, double *out, size_t len);

/**
 * Adjusted Rand index of two labelings of length `n`.
 *
 * # Safety
 * `a` and `b` must be valid for `n` reads and `out` for one write.
 */
GkmStatus gkm_ari(const size_t *a, const size_t *b, size_t n, double *out);

/**
 * Copies the calling thread's last error message, NUL-terminated and
 * truncated to fit, into `buf`. Returns the full message length without
 * the terminator; 0 when there is no message.
 *
 * # Safety
 * `buf` must be null or valid for `len` writes.
 */
size_t gkm_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gkm_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GKMEANS_H */
