#ifndef PHASECORE_H
#define PHASECORE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum PcStatus {
  PC_STATUS_OK = 0,
  PC_STATUS_NULL_POINTER = 1,
  PC_STATUS_INVALID_ARGUMENT = 2,
  PC_STATUS_DIMENSION = 3,
  PC_STATUS_CONVERGENCE = 4,
  PC_STATUS_NORM_MISMATCH = 5,
  PC_STATUS_INTERNAL = 6,
  PC_STATUS_PANIC = 7,
} PcStatus;

/**
 * A measurement ensemble: sensing matrix, signal and magnitudes.
 */
typedef struct PcEnsemble PcEnsemble;

/**
 * An estimate together with the weak set it was computed from, if any.
 */
typedef struct PcEstimate PcEstimate;

/**
 * Error metrics of an estimate.
 */
typedef struct PcMetrics {
  double err_sq;
  double rel_err;
  double align_inner;
  size_t iterations;
} PcMetrics;

/**
 * Per-instance error certificate of a null-vector estimate.
 */
typedef struct PcCertificate {
  double beta;
  double lhs;
  /**
   * Infinite when degenerate.
   */
  double rhs;
  bool holds;
  bool degenerate;
} PcCertificate;

/**
 * Bound inputs. Set `n`, `big_n` and `i_size` all nonzero to evaluate the
 * probability terms; `sigma` and `nu` are then derived from them.
 */
typedef struct PcBoundParams {
  double sigma;
  double nu;
  double eps;
  double delta;
  double t;
  double c;
  size_t n;
  size_t big_n;
  size_t i_size;
} PcBoundParams;

typedef struct PcBoundResult {
  double err_rhs;
  double order_term;
  double count_term;
  double q_term;
  double prob_lower;
  double prob_lower_clamped;
  /**
   * False when dimensions were not given; probability fields are NaN.
   */
  bool has_probability;
  bool small_sigma_warning;
} PcBoundResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. Valid until
 * the next failing call on the same thread.
 */
const char *pc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pc_version(void);

/**
 * Draw a random ensemble (unit-norm random signal) from `(seed, stream)`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum PcStatus pc_ensemble_new_random(uint64_t seed,
                                     uint64_t stream,
                                     size_t n,
                                     size_t big_n,
                                     struct PcEnsemble **out);

/**
 * Build an ensemble from a row-major `n x big_n` sensing matrix and a
 * length-`n` signal, each given as separate real and imaginary arrays.
 *
 * # Safety
 * `a_re`/`a_im` must point to `n * big_n` doubles, `x_re`/`x_im` to `n`
 * doubles, and `out` to writable storage for one handle.
 */
enum PcStatus pc_ensemble_from_parts(size_t n,
                                     size_t big_n,
                                     const double *a_re,
                                     const double *a_im,
                                     const double *x_re,
                                     const double *x_im,
                                     struct PcEnsemble **out);

/**
 * Release an ensemble. Null is ignored.
 *
 * # Safety
 * `e` must be null or a handle from this library not yet freed.
 */
void pc_ensemble_free(struct PcEnsemble *e);

/**
 * Signal dimension and number of measurements.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PcStatus pc_ensemble_dims(const struct PcEnsemble *e, size_t *n, size_t *big_n);

/**
 * Copy the measurement magnitudes `b` into `out` (length `big_n`).
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum PcStatus pc_ensemble_magnitudes(const struct PcEnsemble *e, double *out, size_t len);

/**
 * Null-vector estimate from the `i_size` weakest measurements.
 *
 * # Safety
 * `e` must be a live handle; `out` must be writable.
 */
enum PcStatus pc_estimate_null(const struct PcEnsemble *e, size_t i_size, struct PcEstimate **out);

/**
 * Spectral estimate (top eigenvector of `A diag(b^2) A*`).
 *
 * # Safety
 * `e` must be a live handle; `out` must be writable.
 */
enum PcStatus pc_estimate_spectral(const struct PcEnsemble *e, struct PcEstimate **out);

/**
 * Release an estimate. Null is ignored.
 *
 * # Safety
 * `est` must be null or a handle from this library not yet freed.
 */
void pc_estimate_free(struct PcEstimate *est);

/**
 * # Safety
 * Pointers must be valid.
 */
enum PcStatus pc_estimate_metrics(const struct PcEstimate *est, struct PcMetrics *out);

/**
 * Copy the estimated vector (scaled to `||x0||`) into `re` and `im`.
 *
 * # Safety
 * `re` and `im` must each point to `len` writable doubles.
 */
enum PcStatus pc_estimate_vector(const struct PcEstimate *est, double *re, double *im, size_t len);

/**
 * Evaluate the certificate. `est` must come from [`pc_estimate_null`] on
 * the same ensemble.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PcStatus pc_certify(const struct PcEnsemble *e,
                         const struct PcEstimate *est,
                         struct PcCertificate *out);

/**
 * Evaluate the error bound and, when dimensions are given, its success
 * probability.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PcStatus pc_bound_evaluate(const struct PcBoundParams *params, struct PcBoundResult *out);

/**
 * `tau* = -2 ln(1 - sigma)`.
 *
 * # Safety
 * `out` must be valid.
 */
enum PcStatus pc_tau_star(double sigma, double *out);

/**
 * `1 - exp(-tau/2)`.
 *
 * # Safety
 * `out` must be valid.
 */
enum PcStatus pc_chi2_cdf(double tau, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHASECORE_H */
