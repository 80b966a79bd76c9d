#ifndef DISTILL_LAB_H
#define DISTILL_LAB_H

/* Generated by cbindgen. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum DlStatus {
  DL_STATUS_OK = 0,
  DL_STATUS_SHAPE = 1,
  DL_STATUS_DIMENSION_LIMIT = 2,
  DL_STATUS_SYMMETRY = 3,
  DL_STATUS_ARGUMENT = 4,
  DL_STATUS_PRECONDITION = 5,
  DL_STATUS_PARSE = 6,
  DL_STATUS_IO = 7,
  DL_STATUS_JSON = 8,
  DL_STATUS_NULL_POINTER = 9,
  DL_STATUS_PANIC = 10,
} DlStatus;

/**
 * Opaque complex matrix with tensor-factor dimensions.
 */
typedef struct DlMatrix DlMatrix;

/**
 * Opaque result of a rank-two search.
 */
typedef struct DlReport DlReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread, or null if none.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *dl_last_error(void);

/**
 * Universal undistillability threshold for `n` copies.
 *
 * # Safety
 * `out` must be valid for a write of one `double`.
 */
enum DlStatus dl_beta_bound(uint32_t n, double tol, double *out);

/**
 * Werner state `(1 + β·F) / (d² + β·d)` on `d x d`.
 *
 * # Safety
 * `out` must be valid for a write of one pointer.
 */
enum DlStatus dl_werner_state(size_t d, double beta, struct DlMatrix **out);

/**
 * Partial transpose of the Werner state on its second factor.
 *
 * # Safety
 * `out` must be valid for a write of one pointer.
 */
enum DlStatus dl_werner_partial_transpose(size_t d, double beta, struct DlMatrix **out);

/**
 * Builds a matrix from row-major entries stored as interleaved
 * `(re, im)` pairs, so `data` holds `2 * rows * cols` doubles.
 *
 * # Safety
 * `row_dims`, `col_dims` and `data` must point to `n_row`, `n_col` and
 * `data_len` readable elements. `out` must be valid for a pointer write.
 */
enum DlStatus dl_matrix_new(const size_t *row_dims,
                            size_t n_row,
                            const size_t *col_dims,
                            size_t n_col,
                            const double *data,
                            size_t data_len,
                            struct DlMatrix **out);

/**
 * Row count, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t dl_matrix_rows(const struct DlMatrix *m);

/**
 * Column count, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t dl_matrix_cols(const struct DlMatrix *m);

/**
 * Reads entry `(i, j)` of the flattened matrix.
 *
 * # Safety
 * `m` must be a live handle; `re` and `im` must be valid for writes.
 */
enum DlStatus dl_matrix_get(const struct DlMatrix *m, size_t i, size_t j, double *re, double *im);

/**
 * # Safety
 * `m` must be null or a handle not yet freed.
 */
void dl_matrix_free(struct DlMatrix *m);

/**
 * Subset-sum functional of a square composite matrix.
 *
 * # Safety
 * `m` must be a live handle; `out` must be valid for a write.
 */
enum DlStatus dl_q_functional(const struct DlMatrix *m, double beta, double *out);

/**
 * Smallest eigenvalue of a Hermitian matrix.
 *
 * # Safety
 * `m` must be a live handle; `out` must be valid for a write.
 */
enum DlStatus dl_min_eigenvalue(const struct DlMatrix *m, double *out);

/**
 * Two-copy operator with a negative functional for `-1 < β < -1/2`.
 *
 * # Safety
 * `out` must be valid for a write of one pointer.
 */
enum DlStatus dl_witness_tensor(double beta, size_t d, struct DlMatrix **out);

/**
 * Multi-start search for the minimum of the functional over rank-two
 * operators on `n` copies of `d x d`.
 *
 * # Safety
 * `out` must be valid for a write of one pointer.
 */
enum DlStatus dl_minimize_q(size_t d,
                            size_t n,
                            double beta,
                            size_t restarts,
                            uint64_t seed,
                            struct DlReport **out);

/**
 * # Safety
 * `r` must be a live handle; `out` must be valid for a write.
 */
enum DlStatus dl_report_best_value(const struct DlReport *r, double *out);

/**
 * Singular-value angle of the best point.
 *
 * # Safety
 * `r` must be a live handle; `out` must be valid for a write.
 */
enum DlStatus dl_report_best_angle(const struct DlReport *r, double *out);

/**
 * Serializes the report as JSON. Release the string with [`dl_string_free`].
 *
 * # Safety
 * `r` must be a live handle; `out` must be valid for a write.
 */
enum DlStatus dl_report_to_json(const struct DlReport *r, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void dl_string_free(char *s);

/**
 * # Safety
 * `r` must be null or a handle not yet freed.
 */
void dl_report_free(struct DlReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DISTILL_LAB_H */
