#ifndef ECOMPLEX_H
#define ECOMPLEX_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define ECX_NULL_DENSITY_ONLY 0

#define ECX_NULL_PRESERVE_COUNTRY_DEGREES 1

#define ECX_NULL_PRESERVE_PRODUCT_DEGREES 2

#define ECX_NULL_PRESERVE_BOTH 3

// Status code returned by every fallible function.
typedef enum EcxStatus {
  ECX_STATUS_OK = 0,
  // A required pointer argument was null.
  ECX_STATUS_NULL_POINTER = 1,
  // An argument was out of range or malformed.
  ECX_STATUS_INVALID_ARGUMENT = 2,
  // A caller buffer has the wrong length.
  ECX_STATUS_BUFFER_SIZE = 3,
  // Input data could not be read or parsed.
  ECX_STATUS_INPUT = 4,
  // The input holds no usable data.
  ECX_STATUS_NO_DATA = 5,
  // The computation is undefined for this input (degenerate, collinear...).
  ECX_STATUS_COMPUTATION = 6,
  // A Rust panic was caught at the boundary. This is a bug.
  ECX_STATUS_PANIC = 7,
} EcxStatus;

// Binary country-product matrix.
typedef struct EcxMatrix EcxMatrix;

// Result of the method of reflections.
typedef struct EcxTrajectory EcxTrajectory;

// Capability model parameters.
typedef struct EcxModelParams {
  size_t n_countries;
  size_t n_products;
  size_t n_capabilities;
  double r;
  double q;
} EcxModelParams;

// Summary of a null-model comparison. Undefined values are NaN.
typedef struct EcxNullResult {
  double observed;
  double null_mean;
  double null_stdev;
  double p_value;
  size_t degenerate_samples;
  bool no_rewiring_possible;
} EcxNullResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` as a
// NUL-terminated string, truncating if needed. Returns the length of the
// full message excluding the terminator, so a caller can size a retry.
size_t ecx_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *ecx_version(void);

// Builds a matrix from `n_edges` (country, product) index pairs. Countries
// and products get zero-padded ids `c0..`, `p0..` in index order.
enum EcxStatus ecx_matrix_from_edges(size_t n_countries,
                                     size_t n_products,
                                     const size_t *countries,
                                     const size_t *products,
                                     size_t n_edges,
                                     struct EcxMatrix **out);

// Builds a matrix from a row-major `n_countries x n_products` array of
// export values: RCA, then an edge wherever RCA >= `threshold`.
enum EcxStatus ecx_matrix_from_exports(const double *values,
                                       size_t n_countries,
                                       size_t n_products,
                                       double threshold,
                                       struct EcxMatrix **out);

// Loads a matrix artifact written by `ecomplex ingest` (the `.json`
// sidecar path, UTF-8).
enum EcxStatus ecx_matrix_load(const char *path, struct EcxMatrix **out);

// Releases a matrix. Null is a no-op.
void ecx_matrix_free(struct EcxMatrix *m);

enum EcxStatus ecx_matrix_dims(const struct EcxMatrix *m,
                               size_t *n_countries,
                               size_t *n_products,
                               size_t *n_edges);

// Writes k_{c,0} for every country; `len` must equal the country count.
enum EcxStatus ecx_matrix_diversification(const struct EcxMatrix *m, size_t *out, size_t len);

// Writes k_{p,0} for every product; `len` must equal the product count.
enum EcxStatus ecx_matrix_ubiquity(const struct EcxMatrix *m, size_t *out, size_t len);

// Runs the method of reflections to `depth` (>= 0). Isolated countries and
// products are excluded, so the trajectory may be smaller than the matrix.
enum EcxStatus ecx_reflect(const struct EcxMatrix *m, int32_t depth, struct EcxTrajectory **out);

// Releases a trajectory. Null is a no-op.
void ecx_trajectory_free(struct EcxTrajectory *t);

enum EcxStatus ecx_trajectory_dims(const struct EcxTrajectory *t,
                                   size_t *depth,
                                   size_t *n_countries,
                                   size_t *n_products);

// Copies the id of trajectory country `index` into `buf` (NUL-terminated).
enum EcxStatus ecx_trajectory_country_id(const struct EcxTrajectory *t,
                                         size_t index,
                                         char *buf,
                                         size_t len);

enum EcxStatus ecx_trajectory_country_level(const struct EcxTrajectory *t,
                                            size_t level,
                                            double *out,
                                            size_t len);

enum EcxStatus ecx_trajectory_product_level(const struct EcxTrajectory *t,
                                            size_t level,
                                            double *out,
                                            size_t len);

// Z-scores of country level `level` (population standard deviation).
enum EcxStatus ecx_normalize(const struct EcxTrajectory *t, size_t level, double *out, size_t len);

// Largest absolute difference between `level` of the trajectory and the
// same quantity computed through explicit random-walk operator powers.
enum EcxStatus ecx_random_walk_check(const struct EcxMatrix *m,
                                     const struct EcxTrajectory *t,
                                     size_t level,
                                     double *out);

// Samples a matrix from the capability model.
enum EcxStatus ecx_capability_sample_matrix(const struct EcxModelParams *params,
                                            uint64_t seed,
                                            struct EcxMatrix **out);

// Compares corr(k_c0, k_c1) with `n_samples` null matrices. `level` is one
// of the `ECX_NULL_*` constants; `swaps_per_edge` only affects
// `ECX_NULL_PRESERVE_BOTH`.
enum EcxStatus ecx_null_comparison(const struct EcxMatrix *m,
                                   uint32_t level,
                                   size_t n_samples,
                                   uint64_t seed,
                                   size_t swaps_per_edge,
                                   struct EcxNullResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ECOMPLEX_H */
