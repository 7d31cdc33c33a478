#ifndef RISRADAR_H
#define RISRADAR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RrStatus {
  RR_STATUS_OK = 0,
  RR_STATUS_NULL_POINTER = 1,
  RR_STATUS_INVALID_ARGUMENT = 2,
  RR_STATUS_DOMAIN = 3,
  RR_STATUS_GEOMETRY = 4,
  RR_STATUS_SHAPE = 5,
  RR_STATUS_SINGULAR = 6,
  RR_STATUS_INFEASIBLE = 7,
  RR_STATUS_NO_CONVERGENCE = 8,
  RR_STATUS_CONFIG = 9,
  RR_STATUS_IO = 10,
  RR_STATUS_PANIC = 11,
} RrStatus;

typedef enum RrProfile {
  RR_PROFILE_DESK = 0,
  RR_PROFILE_PAPER = 1,
} RrProfile;

typedef enum RrScheme {
  RR_SCHEME_PROPOSED = 0,
  RR_SCHEME_RANDOM = 1,
  RR_SCHEME_MIMO = 2,
} RrScheme;

/**
 * Opaque radar geometry.
 */
typedef struct RrGeometry RrGeometry;

/**
 * Opaque Monte Carlo experiment and its results.
 */
typedef struct RrSimulation RrSimulation;

/**
 * Planar layout; lengths in meters except spacings and offset, which are in
 * wavelengths. `element_gain <= 0` selects `4π S^e / λ²`.
 */
typedef struct RrLayout {
  size_t ris_rows;
  size_t ris_cols;
  size_t antenna_rows;
  size_t antenna_cols;
  double wavelength;
  double element_spacing;
  double antenna_spacing;
  double array_offset[3];
  double eta;
  size_t phase_levels;
  double antenna_gain;
  double element_gain;
} RrLayout;

/**
 * One metrics row; absent values are NaN.
 */
typedef struct RrMetricsRow {
  double axis_value;
  enum RrScheme scheme;
  size_t cycle;
  double p_detect;
  double p_misdetect;
  double stderr;
  double stderr_misdetect;
} RrMetricsRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length
 * excluding the terminator, or 0 when there is none.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null with `len == 0`.
 */
size_t rr_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rr_version(void);

/**
 * Writes the default layout (8×8 surface, 2×2 array) to `out`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum RrStatus rr_layout_default(struct RrLayout *out);

/**
 * # Safety
 * `layout` and `out` must be valid pointers. On success `*out` owns a handle.
 */
enum RrStatus rr_geometry_new(const struct RrLayout *layout, struct RrGeometry **out);

/**
 * # Safety
 * `geom` must come from [`rr_geometry_new`] and not be used afterwards.
 */
void rr_geometry_free(struct RrGeometry *geom);

/**
 * # Safety
 * `geom` must be a live handle; outputs may be null to skip them.
 */
enum RrStatus rr_geometry_counts(const struct RrGeometry *geom, size_t *elements, size_t *antennas);

/**
 * Maximum two-way power gain toward `(theta, phi)` for a single-antenna
 * geometry, with the aligning phase shifts written to `phases` (length
 * equal to the element count, may be null when that count is 0).
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum RrStatus rr_max_power_gain(const struct RrGeometry *geom,
                                double theta,
                                double phi,
                                double *gain,
                                double *phases,
                                size_t phases_len);

/**
 * Top-view placement gain `B(lateral, height)` of a line of `elements`
 * half-wavelength elements, for each `(lateral[i], height[i])`.
 *
 * # Safety
 * Arrays must hold `count` values.
 */
enum RrStatus rr_power_gain_profile(size_t elements,
                                    double wavelength,
                                    double eta,
                                    double theta,
                                    const double *lateral,
                                    const double *height,
                                    size_t count,
                                    double *gain);

/**
 * Number of hypotheses with up to `max_targets` targets over `grid_count` cells.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum RrStatus rr_hypothesis_count(size_t grid_count, size_t max_targets, size_t *out);

/**
 * Maximizes `Re tr(C X)` over Hermitian `X ⪰ 0` with `X_ii = targets[i]`.
 * `C` is `dim×dim` column-major; `x_re`/`x_im` receive `X`.
 *
 * # Safety
 * Matrix arrays must hold `dim*dim` values, `targets` `dim` values.
 */
enum RrStatus rr_solve_diag_sdp(size_t dim,
                                const double *cost_re,
                                const double *cost_im,
                                const double *targets,
                                double *x_re,
                                double *x_im,
                                double *value);

/**
 * Creates an experiment from a profile and optional TOML overrides (null
 * for none).
 *
 * # Safety
 * `overrides` must be null or NUL-terminated UTF-8; `out` must be valid.
 */
enum RrStatus rr_simulation_new(enum RrProfile profile,
                                const char *overrides,
                                struct RrSimulation **out);

/**
 * # Safety
 * `sim` must come from [`rr_simulation_new`] and not be used afterwards.
 */
void rr_simulation_free(struct RrSimulation *sim);

/**
 * Runs the experiment (or its sweep) and stores the rows.
 *
 * # Safety
 * `sim` must be a live handle; `rows` may be null.
 */
enum RrStatus rr_simulation_run(struct RrSimulation *sim, size_t *rows);

/**
 * # Safety
 * `sim` must be a live handle and `out` valid.
 */
enum RrStatus rr_simulation_row(const struct RrSimulation *sim,
                                size_t index,
                                struct RrMetricsRow *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RISRADAR_H */
