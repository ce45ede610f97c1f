#ifndef ARAKELOV_H
#define ARAKELOV_H

/* Generated by cbindgen from arakelov-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible call.
 */
typedef enum {
  ARAKELOV_STATUS_OK = 0,
  ARAKELOV_STATUS_NULL_POINTER = 1,
  ARAKELOV_STATUS_INVALID_UTF8 = 2,
  ARAKELOV_STATUS_INVALID_ARGUMENT = 3,
  ARAKELOV_STATUS_CAP_EXCEEDED = 4,
  ARAKELOV_STATUS_NUMERIC_FAILURE = 5,
  ARAKELOV_STATUS_IO_ERROR = 6,
  ARAKELOV_STATUS_PANIC = 7,
} ArakelovStatus;

/**
 * Opaque handle to an integer polynomial (constant term first).
 */
typedef struct ArakelovPolynomial ArakelovPolynomial;

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *arakelov_last_error_message(void);

/**
 * Crate version as a static string.
 */
const char *arakelov_version(void);

/**
 * Builds a polynomial from 64-bit coefficients, constant term first.
 *
 * # Safety
 * `coeffs` must point to `len` readable i64 values and `out` must be a
 * valid location for one pointer.
 */
ArakelovStatus arakelov_polynomial_from_coeffs(const int64_t *coeffs,
                                               uintptr_t len,
                                               ArakelovPolynomial **out);

/**
 * Builds the n-th cyclotomic polynomial.
 *
 * # Safety
 * `out` must be a valid location for one pointer.
 */
ArakelovStatus arakelov_polynomial_cyclotomic(uint32_t n, ArakelovPolynomial **out);

/**
 * Releases a polynomial handle (null is ignored).
 *
 * # Safety
 * `p` must be a pointer previously returned by a constructor of this
 * library and not yet freed.
 */
void arakelov_polynomial_free(ArakelovPolynomial *p);

/**
 * Degree of the polynomial.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
ArakelovStatus arakelov_polynomial_degree(const ArakelovPolynomial *p, uintptr_t *out);

/**
 * log M(p): the Mahler measure from certified roots at tolerance `tol`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
ArakelovStatus arakelov_mahler_measure(const ArakelovPolynomial *p, double tol, double *out);

/**
 * Normalized height of the algebraic point defined by `p` under a metric
 * given as JSON (`{"base":"canonical"|"fubini-study","twist":{...}}`);
 * a null `metric_json` means the canonical metric.
 *
 * # Safety
 * `p` must be a live handle, `metric_json` null or NUL-terminated, and
 * `out` writable.
 */
ArakelovStatus arakelov_height(const ArakelovPolynomial *p,
                               const char *metric_json,
                               double tol,
                               double *out);

/**
 * Galois-orbit measure of the point defined by `p`, serialized as
 * `{"atoms":[{"re":...,"im":...,"w":...}]}`.
 *
 * # Safety
 * `p` must be a live handle; `out` receives a string owned by the caller
 * (release with `arakelov_string_free`).
 */
ArakelovStatus arakelov_orbit_measure_json(const ArakelovPolynomial *p, double tol, char **out);

/**
 * Validates an experiment config; InvalidArgument or CapExceeded carry the
 * first finding in the error message.
 *
 * # Safety
 * `config_json` must be NUL-terminated.
 */
ArakelovStatus arakelov_validate_config(const char *config_json);

/**
 * Runs an experiment into `out_dir` (JSON report plus CSV tables). When
 * `report_out` is non-null it receives the report document as a JSON
 * string owned by the caller.
 *
 * # Safety
 * `config_json` and `out_dir` must be NUL-terminated; `report_out` must be
 * null or writable.
 */
ArakelovStatus arakelov_run_experiment(const char *config_json,
                                       const char *out_dir,
                                       char **report_out);

/**
 * Releases a string returned by this library (null is ignored).
 *
 * # Safety
 * `s` must originate from this library and not have been freed before.
 */
void arakelov_string_free(char *s);

#endif  /* ARAKELOV_H */
