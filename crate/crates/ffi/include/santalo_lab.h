#ifndef SANTALO_LAB_H
#define SANTALO_LAB_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SlStatus {
  SL_STATUS_OK = 0,
  SL_STATUS_NULL_POINTER = 1,
  SL_STATUS_DOMAIN = 2,
  SL_STATUS_DIMENSION_MISMATCH = 3,
  SL_STATUS_UNSUPPORTED = 4,
  SL_STATUS_DIAGNOSTICS = 5,
  SL_STATUS_PANIC = 6,
} SlStatus;

typedef enum SlMethod {
  SL_METHOD_MONTE_CARLO = 0,
  SL_METHOD_GRID = 1,
  SL_METHOD_CLOSED_FORM = 2,
  SL_METHOD_ANALYTIC_BOUND = 3,
} SlMethod;

/**
 * Opaque convex body.
 */
typedef struct SlBody SlBody;

/**
 * Opaque seeded random stream.
 */
typedef struct SlStream SlStream;

typedef struct SlWindowConstants {
  double s0;
  double s1;
} SlWindowConstants;

typedef struct SlVolumeEstimate {
  /**
   * Natural log of the volume.
   */
  double log_value;
  double std_err_log;
  uint64_t samples;
  enum SlMethod method;
} SlVolumeEstimate;

typedef struct SlPolarCentroid {
  double height;
  double err;
  double tail_fraction;
  double ratio_over_polar_chord;
  double ratio_over_hull_height;
} SlPolarCentroid;

typedef struct SlSantaloResult {
  double polar_log_volume;
  double residual;
  double residual_std_err;
  uint64_t iterations;
} SlSantaloResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sl_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *sl_last_error_message(void);

struct SlStream *sl_stream_new(uint64_t seed, uint64_t stream_id);

/**
 * # Safety
 * `stream` must come from [`sl_stream_new`] and not be freed twice.
 */
void sl_stream_free(struct SlStream *stream);

/**
 * `B_p^n` scaled by `scale`; pass `p = INFINITY` for the cube.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SlStatus sl_body_lp_ball(double p, uintptr_t n, double scale, struct SlBody **out);

/**
 * Euclidean ball with centre `center[0..n]`.
 *
 * # Safety
 * `center` must point to `n` doubles and `out` must be valid for writes.
 */
enum SlStatus sl_body_euclid_ball(const double *center,
                                  uintptr_t n,
                                  double radius,
                                  struct SlBody **out);

/**
 * `{x ∈ B_2^n : x_1 ≥ 0}`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SlStatus sl_body_half_ball(uintptr_t n, struct SlBody **out);

/**
 * # Safety
 * `body` must come from an `sl_body_*` constructor and not be freed twice.
 */
void sl_body_free(struct SlBody *body);

/**
 * Dimension of the body, or 0 for NULL.
 *
 * # Safety
 * `body` must be NULL or a live handle.
 */
uintptr_t sl_body_dim(const struct SlBody *body);

/**
 * Gauge of `y` about the body's anchor point.
 *
 * # Safety
 * `body` must be a live handle, `y` must point to `len` doubles and `out`
 * must be valid for writes.
 */
enum SlStatus sl_body_gauge(const struct SlBody *body, const double *y, uintptr_t len, double *out);

/**
 * Support function `h_K(u)`.
 *
 * # Safety
 * As for [`sl_body_gauge`].
 */
enum SlStatus sl_body_support(const struct SlBody *body,
                              const double *u,
                              uintptr_t len,
                              double *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum SlStatus sl_log_gamma(double x, double *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum SlStatus sl_lp_ball_log_volume(double p, uintptr_t n, double *out);

/**
 * `ln vol(B_2^n + t B_∞^n)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SlStatus sl_minkowski_log_volume(uintptr_t n, double t, double *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum SlStatus sl_hull_centroid_height(uintptr_t n, double c, double *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum SlStatus sl_window_constants(double a, double b, struct SlWindowConstants *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum SlStatus sl_half_ball_centroid(uintptr_t n, double *out);

/**
 * `vol(B_p^n ∩ s B_q^n)`.
 *
 * # Safety
 * `stream` must be a live handle and `out` must be valid for writes.
 */
enum SlStatus sl_intersect_volume(double p,
                                  double q,
                                  uintptr_t n,
                                  double s,
                                  uintptr_t samples,
                                  const struct SlStream *stream,
                                  struct SlVolumeEstimate *out);

/**
 * `vol((K − x)°)`.
 *
 * # Safety
 * `body` and `stream` must be live handles, `x` must point to `len`
 * doubles and `out` must be valid for writes.
 */
enum SlStatus sl_polar_log_volume(const struct SlBody *body,
                                  const double *x,
                                  uintptr_t len,
                                  uintptr_t angular_samples,
                                  const struct SlStream *stream,
                                  struct SlVolumeEstimate *out);

/**
 * Centroid height of the polar ball-cube hull and the separation ratios.
 *
 * # Safety
 * `stream` must be a live handle and `out` must be valid for writes.
 */
enum SlStatus sl_polar_centroid_height(uintptr_t n,
                                       double a,
                                       double b,
                                       uintptr_t grid_points,
                                       uintptr_t samples,
                                       const struct SlStream *stream,
                                       struct SlPolarCentroid *out);

/**
 * Santaló point along the symmetry axis; the point is written to
 * `point[0..len]` with `len` equal to the body dimension.
 *
 * # Safety
 * `body` and `stream` must be live handles, `point` must be valid for `len`
 * writes and `out` must be valid for writes.
 */
enum SlStatus sl_santalo_axis_search(const struct SlBody *body,
                                     double tolerance,
                                     uintptr_t samples,
                                     const struct SlStream *stream,
                                     double *point,
                                     uintptr_t len,
                                     struct SlSantaloResult *out);

/**
 * Copies the last error message into `buf` (NUL-terminated, truncated to
 * `cap`) and returns the full message length, or 0 if there is none.
 *
 * # Safety
 * `buf` must be NULL or valid for `cap` writes.
 */
uintptr_t sl_copy_last_error(char *buf, uintptr_t cap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SANTALO_LAB_H */
