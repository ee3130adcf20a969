/* Generated by cbindgen; do not edit. */

#ifndef DENSE_CYCLE_H
#define DENSE_CYCLE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum DcStatus {
  DC_STATUS_OK = 0,
  DC_STATUS_NULL_POINTER = 1,
  DC_STATUS_INVALID_PARAMS = 2,
  DC_STATUS_DOMAIN = 3,
  DC_STATUS_SIZE_MISMATCH = 4,
  DC_STATUS_RESOURCE = 5,
  DC_STATUS_PARSE = 6,
  DC_STATUS_INTERNAL = 7,
} DcStatus;

/**
 * Symmetric 0/1 adjacency matrix with zero diagonal.
 */
typedef struct DcAdjacency DcAdjacency;

/**
 * Model parameters.
 */
typedef struct DcParams DcParams;

/**
 * Plain copy of a parameter set.
 */
typedef struct DcParamValues {
  size_t n;
  double tau;
  double p;
  double q;
  double r;
  double lambda;
} DcParamValues;

/**
 * Scan test outcome.
 */
typedef struct DcDetection {
  double l_hat;
  double kappa;
  bool detected;
} DcDetection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or an empty string. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *dc_last_error(void);

/**
 * Validated parameters `(n, tau, p, q)` with `r = tau p + (1 - tau) q`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum DcStatus dc_params_new(size_t n, double tau, double p, double q, struct DcParams **out);

/**
 * # Safety
 * `params` must come from [`dc_params_new`] or be null.
 */
void dc_params_free(struct DcParams *params);

/**
 * # Safety
 * Pointers must be valid or null.
 */
enum DcStatus dc_params_values(const struct DcParams *params, struct DcParamValues *out);

/**
 * Empty graph on `n` vertices.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum DcStatus dc_adjacency_new(size_t n, struct DcAdjacency **out);

/**
 * # Safety
 * `adj` must come from this library or be null.
 */
void dc_adjacency_free(struct DcAdjacency *adj);

/**
 * Number of vertices, or 0 for a null handle.
 *
 * # Safety
 * `adj` must be valid or null.
 */
size_t dc_adjacency_n(const struct DcAdjacency *adj);

/**
 * Number of edges, or 0 for a null handle.
 *
 * # Safety
 * `adj` must be valid or null.
 */
size_t dc_adjacency_edge_count(const struct DcAdjacency *adj);

/**
 * # Safety
 * Pointers must be valid or null.
 */
enum DcStatus dc_adjacency_get(const struct DcAdjacency *adj, size_t i, size_t j, bool *out);

/**
 * Sets the symmetric entry `(i, j)`; `i == j` is a domain error.
 *
 * # Safety
 * `adj` must be valid or null.
 */
enum DcStatus dc_adjacency_set(struct DcAdjacency *adj, size_t i, size_t j, bool value);

/**
 * Serializes to the binary graph format. Writes the required size to
 * `len`; when `buf` is null or `cap` is too small nothing else is written
 * and `Resource` is returned for the short-buffer case.
 *
 * # Safety
 * `buf` must have room for `cap` bytes if non-null; `len` must be valid.
 */
enum DcStatus dc_adjacency_to_bytes(const struct DcAdjacency *adj,
                                    uint8_t *buf,
                                    size_t cap,
                                    size_t *len);

/**
 * # Safety
 * `buf` must point to `len` readable bytes; `out` must be valid.
 */
enum DcStatus dc_adjacency_from_bytes(const uint8_t *buf, size_t len, struct DcAdjacency **out);

/**
 * Draws `(A, X, z)` from the planted model using substream `stream` of
 * `seed`. `out_x` and `out_z` may be null; `out_z` needs room for `n`
 * doubles.
 *
 * # Safety
 * Pointers must be valid or null as described.
 */
enum DcStatus dc_sample_planted(const struct DcParams *params,
                                uint64_t seed,
                                uint64_t stream,
                                struct DcAdjacency **out_a,
                                struct DcAdjacency **out_x,
                                double *out_z);

/**
 * Draws `A` from `G(n, r)`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DcStatus dc_sample_null(const struct DcParams *params,
                             uint64_t seed,
                             uint64_t stream,
                             struct DcAdjacency **out_a);

/**
 * Log-likelihood ratio of `A` under cycle `X` against the null.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DcStatus dc_log_likelihood_ratio(const struct DcAdjacency *a,
                                      const struct DcAdjacency *x,
                                      const struct DcParams *params,
                                      double *out);

/**
 * Per-pair factor of the second moment of the likelihood ratio.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DcStatus dc_pair_second_moment_factor(bool x,
                                           bool x_prime,
                                           const struct DcParams *params,
                                           double *out);

/**
 * Circular distance between two points of `[0, 1)`.
 *
 * # Safety
 * `out` must be valid.
 */
enum DcStatus dc_circ_dist(double a, double b, double *out);

/**
 * Scan test by local search with `restarts` random starts.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DcStatus dc_detect(const struct DcAdjacency *a,
                        const struct DcParams *params,
                        size_t restarts,
                        uint64_t seed,
                        struct DcDetection *out);

/**
 * Phase-diagram region (`'A'` to `'D'`) for exponents `p = n^-a`,
 * `tau = n^-b`.
 */
char dc_region_label(double a, double b);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DENSE_CYCLE_H */
