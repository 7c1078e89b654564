#ifndef HEISBIS_H
#define HEISBIS_H

#include <stdbool.h>
#include <stdint.h>

typedef enum {
  HB_STATUS_OK = 0,
  HB_STATUS_NULL_POINTER = 1,
  HB_STATUS_NON_FINITE = 2,
  HB_STATUS_INVALID_ARGUMENT = 3,
  HB_STATUS_DEGENERATE_PAIR = 4,
  HB_STATUS_COINCIDENT_VERTICES = 5,
  HB_STATUS_CHARACTERISTIC_POINT = 6,
  HB_STATUS_NUMERICAL = 7,
  HB_STATUS_PANIC = 8,
} HbStatus;

typedef enum {
  HB_PAIR_CLASS_VERTICAL = 0,
  HB_PAIR_CLASS_PLANAR = 1,
  HB_PAIR_CLASS_GENERIC = 2,
} HbPairClass;

typedef struct HbCubicField HbCubicField;

typedef struct HbSimilarity HbSimilarity;

typedef struct HbSpinalSphere HbSpinalSphere;

typedef struct {
  double x;
  double y;
  double t;
} HbPoint;

/**
 * A point of the boundary sphere; `point` is ignored when `at_infinity`.
 */
typedef struct {
  HbPoint point;
  bool at_infinity;
} HbBoundaryPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static, NUL-terminated description of a status code. Takes the raw
 * integer so unknown codes are safe to pass.
 */
const char *hb_status_message(int32_t status);

/**
 * Korányi distance.
 *
 * # Safety
 * `out` must be valid for writes.
 */
HbStatus hb_dist(HbPoint p1, HbPoint p2, double *out);

/**
 * Cubic field of the Korányi bisector of `p1` and `p2`, negative at `p1`.
 *
 * # Safety
 * `out` must be valid for writes. The handle written there must be released
 * with `hb_cubic_field_free`.
 */
HbStatus hb_bisector_field_new(HbPoint p1, HbPoint p2, HbCubicField **out);

/**
 * # Safety
 * `field` must be `NULL` or a handle from `hb_bisector_field_new` not yet freed.
 */
void hb_cubic_field_free(HbCubicField *field);

/**
 * Value of the field at `p`.
 *
 * # Safety
 * `field` must be a live handle and `out` valid for writes.
 */
HbStatus hb_cubic_field_residual(const HbCubicField *field, HbPoint p, double *out);

/**
 * Coefficient of `x^i y^j t^k`, zero above degree three.
 *
 * # Safety
 * `field` must be a live handle and `out` valid for writes.
 */
HbStatus hb_cubic_field_coefficient(const HbCubicField *field,
                                    uint32_t i,
                                    uint32_t j,
                                    uint32_t k,
                                    double *out);

/**
 * Horizontal mean curvature of the zero set of `field` at `p`.
 *
 * # Safety
 * `field` must be a live handle and `out` valid for writes.
 */
HbStatus hb_mean_curvature(const HbCubicField *field, HbPoint p, double *out);

/**
 * Closed-form curvature of the cubic spinal sphere over `(x, y)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
HbStatus hb_s1_curvature(double x, double y, double *out);

/**
 * Similarity taking `(p1, p2)` to the canonical pair of its class.
 * `iota` receives the invariant of a generic pair, `0` for planar and
 * `INFINITY` for vertical pairs.
 *
 * # Safety
 * All out-pointers must be valid for writes. The handle must be released
 * with `hb_similarity_free`.
 */
HbStatus hb_normalize_pair(HbPoint p1,
                           HbPoint p2,
                           HbSimilarity **out,
                           HbPairClass *class_,
                           double *iota);

/**
 * # Safety
 * `sim` must be a live handle and `out` valid for writes.
 */
HbStatus hb_similarity_apply(const HbSimilarity *sim, HbPoint p, HbPoint *out);

/**
 * # Safety
 * `sim` must be `NULL` or a handle from `hb_normalize_pair` not yet freed.
 */
void hb_similarity_free(HbSimilarity *sim);

/**
 * Spinal sphere with vertices `v1` and `v2`.
 *
 * # Safety
 * `out` must be valid for writes. The handle must be released with
 * `hb_spinal_sphere_free`.
 */
HbStatus hb_spinal_sphere_new(HbBoundaryPoint v1, HbBoundaryPoint v2, HbSpinalSphere **out);

/**
 * # Safety
 * `sphere` must be `NULL` or a handle from `hb_spinal_sphere_new` not yet freed.
 */
void hb_spinal_sphere_free(HbSpinalSphere *sphere);

/**
 * Signed membership residual of `b`; zero exactly on the sphere.
 *
 * # Safety
 * `sphere` must be a live handle and `out` valid for writes.
 */
HbStatus hb_spinal_residual(const HbSpinalSphere *sphere, HbBoundaryPoint b, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEISBIS_H */
