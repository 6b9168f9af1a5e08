#ifndef CONERAD_H
#define CONERAD_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ConeradStatus {
  CONERAD_STATUS_OK = 0,
  CONERAD_STATUS_NULL_POINTER = 1,
  CONERAD_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Argument outside the mathematical domain (e.g. wrong parity of `n`).
   */
  CONERAD_STATUS_DOMAIN = 3,
  /**
   * Numerical precondition failed: boundary contamination, symmetry,
   * alignment, geometry or stencil size.
   */
  CONERAD_STATUS_NUMERICAL = 4,
  CONERAD_STATUS_FORMAT = 5,
  CONERAD_STATUS_IO = 6,
  CONERAD_STATUS_PANIC = 7,
} ConeradStatus;

typedef enum ConeradTheorem {
  CONERAD_THEOREM_C_ODD = 0,
  CONERAD_THEOREM_C_EVEN = 1,
  CONERAD_THEOREM_A_ODD = 2,
  CONERAD_THEOREM_A_EVEN = 3,
} ConeradTheorem;

/**
 * Real field on a uniform grid.
 */
typedef struct ConeradField ConeradField;

/**
 * Transform parameters `(mu, psi, n)`.
 */
typedef struct ConeradParams ConeradParams;

/**
 * Outcome of a range test.
 */
typedef struct ConeradRangeReport {
  bool passed;
  bool support_ok;
  double moment_residual;
  /**
   * Smallest per-axis margin; negative when the support leaks out.
   */
  double min_margin;
} ConeradRangeReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *conerad_last_error(void);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum ConeradStatus conerad_params_new(double mu, double psi, size_t n, struct ConeradParams **out);

/**
 * # Safety
 * `params` must come from [`conerad_params_new`] or be null.
 */
void conerad_params_free(struct ConeradParams *params);

/**
 * Constant of the cone multiplier.
 *
 * # Safety
 * `params` must be a live handle and `out` valid for writes.
 */
enum ConeradStatus conerad_params_alpha(const struct ConeradParams *params, double *out);

/**
 * Constant of the auxiliary multiplier; `n >= 2`.
 *
 * # Safety
 * `params` must be a live handle and `out` valid for writes.
 */
enum ConeradStatus conerad_params_beta(const struct ConeradParams *params, double *out);

/**
 * Field from explicit grid and row-major values (last axis fastest).
 *
 * # Safety
 * `dims`, `origin` and `spacing` must hold `ndim` elements and `values`
 * the product of `dims`.
 */
enum ConeradStatus conerad_field_new(size_t ndim,
                                     const size_t *dims,
                                     const double *origin,
                                     const double *spacing,
                                     const double *values,
                                     struct ConeradField **out);

/**
 * One smooth bump sampled on the periodic grid with `dims` samples over
 * `[lo, hi)` per axis.
 *
 * # Safety
 * `dims`, `lo`, `hi` and `center` must hold `ndim` elements.
 */
enum ConeradStatus conerad_field_bump(size_t ndim,
                                      const size_t *dims,
                                      const double *lo,
                                      const double *hi,
                                      const double *center,
                                      double radius,
                                      double amplitude,
                                      struct ConeradField **out);

/**
 * # Safety
 * `field` must come from this library or be null.
 */
void conerad_field_free(struct ConeradField *field);

/**
 * Number of axes; 0 for a null handle.
 *
 * # Safety
 * `field` must be a live handle or null.
 */
size_t conerad_field_ndim(const struct ConeradField *field);

/**
 * Number of samples; 0 for a null handle.
 *
 * # Safety
 * `field` must be a live handle or null.
 */
size_t conerad_field_len(const struct ConeradField *field);

/**
 * Copy dims, origin and spacing into caller buffers of `capacity`
 * elements each; any of the three may be null to skip it.
 *
 * # Safety
 * Non-null buffers must be valid for `capacity` writes.
 */
enum ConeradStatus conerad_field_grid(const struct ConeradField *field,
                                      size_t *dims,
                                      double *origin,
                                      double *spacing,
                                      size_t capacity);

/**
 * Copy the samples into `out`, which holds `capacity` doubles.
 *
 * # Safety
 * `out` must be valid for `capacity` writes.
 */
enum ConeradStatus conerad_field_values(const struct ConeradField *field,
                                        double *out,
                                        size_t capacity);

/**
 * Relative L2 distance `|a - b| / |b|` on identical grids.
 *
 * # Safety
 * Handles must be live and `out` valid for writes.
 */
enum ConeradStatus conerad_field_rel_l2_error(const struct ConeradField *a,
                                              const struct ConeradField *b,
                                              double *out);

/**
 * Read a real `CRTF` file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for writes.
 */
enum ConeradStatus conerad_field_load(const char *path, struct ConeradField **out);

/**
 * Write a real `CRTF` file.
 *
 * # Safety
 * `field` must be live and `path` a NUL-terminated string.
 */
enum ConeradStatus conerad_field_save(const struct ConeradField *field, const char *path);

/**
 * Cone transform through its multiplier. With `keep_padding` the result
 * stays on the padded working grid, ready for range checks and inversion
 * with `pad_factor = 1`.
 *
 * # Safety
 * Handles must be live and `out` valid for writes.
 */
enum ConeradStatus conerad_cone_forward(const struct ConeradField *field,
                                        const struct ConeradParams *params,
                                        double pad_factor,
                                        bool keep_padding,
                                        struct ConeradField **out);

/**
 * Auxiliary transform through its multiplier; `n >= 2`.
 *
 * # Safety
 * Handles must be live and `out` valid for writes.
 */
enum ConeradStatus conerad_aux_forward(const struct ConeradField *field,
                                       const struct ConeradParams *params,
                                       double pad_factor,
                                       bool keep_padding,
                                       struct ConeradField **out);

/**
 * `L^power g` through the symbol.
 *
 * # Safety
 * Handles must be live and `out` valid for writes.
 */
enum ConeradStatus conerad_apply_l(const struct ConeradField *field,
                                   const struct ConeradParams *params,
                                   uint32_t power,
                                   double pad_factor,
                                   struct ConeradField **out);

/**
 * Range test of `theorem` with the support region `[region_lo,
 * region_hi]`. `window_lo`/`window_hi` (both null or both set) restrict
 * the observation to a sub-box, e.g. the original domain of data kept on
 * its padded grid.
 *
 * # Safety
 * Region and window arrays must hold one entry per axis; handles must be
 * live and `out` valid for writes.
 */
enum ConeradStatus conerad_range_check(const struct ConeradField *field,
                                       const struct ConeradParams *params,
                                       enum ConeradTheorem theorem,
                                       const double *region_lo,
                                       const double *region_hi,
                                       const double *window_lo,
                                       const double *window_hi,
                                       double eps_support,
                                       double moment_tol,
                                       double pad_factor,
                                       struct ConeradRangeReport *out);

/**
 * Reconstruct `f` along the path of `theorem`, on the input grid.
 *
 * # Safety
 * Handles must be live and `out` valid for writes.
 */
enum ConeradStatus conerad_invert(const struct ConeradField *field,
                                  const struct ConeradParams *params,
                                  enum ConeradTheorem theorem,
                                  double pad_factor,
                                  struct ConeradField **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONERAD_H */
