#ifndef CURVHOM_H
#define CURVHOM_H

/* Generated by cbindgen from the curvhom-ffi sources; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum CurvhomStatus {
  CURVHOM_STATUS_OK = 0,
  CURVHOM_STATUS_NULL_POINTER = 1,
  CURVHOM_STATUS_INVALID_UTF8 = 2,
  CURVHOM_STATUS_PARSE_ERROR = 3,
  CURVHOM_STATUS_DOMAIN_ERROR = 4,
  CURVHOM_STATUS_HYPOTHESIS_VIOLATION = 5,
  CURVHOM_STATUS_INVALID_ARGUMENT = 6,
  CURVHOM_STATUS_PANIC = 7,
} CurvhomStatus;

/**
 * Opaque field handle.
 */
typedef struct CurvhomField CurvhomField;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses `expr` as a field in `x1..xp`.
 *
 * # Safety
 * `expr` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CurvhomStatus curvhom_field_new(const char *expr, size_t p, struct CurvhomField **out);

/**
 * Builds `f = (x1² + … + xp²)/2 + Θ(x1)` from the profile `theta`.
 *
 * # Safety
 * `theta` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CurvhomStatus curvhom_canonical_field_new(const char *theta,
                                               size_t p,
                                               struct CurvhomField **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `field` must come from this library and not be used afterwards.
 */
void curvhom_field_free(struct CurvhomField *field);

/**
 * `p` of the field, or 0 for a null handle.
 *
 * # Safety
 * `field` must be null or a live handle.
 */
size_t curvhom_field_dim(const struct CurvhomField *field);

/**
 * Metric `g` at `point`; `out` holds `(2p)²` doubles.
 *
 * # Safety
 * `point` must hold `2p` doubles and `out` `(2p)²`.
 */
enum CurvhomStatus curvhom_metric(const struct CurvhomField *field,
                                  const double *point,
                                  double *out);

/**
 * `R_ijkl` on the `x` block; `out` holds `p⁴` doubles.
 *
 * # Safety
 * `point` must hold `2p` doubles and `out` `p⁴`.
 */
enum CurvhomStatus curvhom_curvature(const struct CurvhomField *field,
                                     const double *point,
                                     double *out);

/**
 * `∇R_ijkl;n` on the `x` block; `out` holds `p⁵` doubles.
 *
 * # Safety
 * `point` must hold `2p` doubles and `out` `p⁵`.
 */
enum CurvhomStatus curvhom_nabla_curvature(const struct CurvhomField *field,
                                           const double *point,
                                           double *out);

/**
 * The invariant `α` at `point`.
 *
 * # Safety
 * `point` must hold `2p` doubles and `out` one.
 */
enum CurvhomStatus curvhom_alpha(const struct CurvhomField *field,
                                 const double *point,
                                 double *out);

/**
 * Closed-form `α` of the canonical family for profile `theta` at `x1`.
 *
 * # Safety
 * `theta` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CurvhomStatus curvhom_alpha_closed_form(const char *theta, double x1, size_t p, double *out);

/**
 * Admissible basis at `point` as a `2p × 2p` row-major matrix whose
 * columns are `X_1..X_p, Y_1..Y_p` in the coordinate frame.
 *
 * # Safety
 * `point` must hold `2p` doubles and `out` `(2p)²`.
 */
enum CurvhomStatus curvhom_admissible_basis(const struct CurvhomField *field,
                                            const double *point,
                                            double *out);

/**
 * Copies the calling thread's last error message into `buf` (truncated,
 * always NUL-terminated when `len > 0`) and returns its full length in
 * bytes, excluding the terminator. Returns 0 when there is none.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t curvhom_last_error_message(char *buf, size_t len);

/**
 * Static description of a status code.
 */
const char *curvhom_status_str(enum CurvhomStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CURVHOM_H */
