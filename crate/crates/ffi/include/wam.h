#ifndef WAM_H
#define WAM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Values from 3 on mirror the library's error kinds and the
 * command-line exit statuses.
 */
typedef enum WamStatus {
  WAM_STATUS_OK = 0,
  WAM_STATUS_NULL_POINTER = 1,
  WAM_STATUS_PANIC = 2,
  WAM_STATUS_INVALID_ARGUMENT = 3,
  WAM_STATUS_PARSE = 4,
  WAM_STATUS_DUPLICATE_KEY = 5,
  WAM_STATUS_STATIONARY_TRAJECTORY = 6,
  WAM_STATUS_NO_VALID_SPLIT = 7,
  WAM_STATUS_NO_SIMILAR_DATA = 8,
  WAM_STATUS_EMPTY = 9,
  WAM_STATUS_UNKNOWN_HORIZON = 10,
  WAM_STATUS_MISSING_HORIZONS = 11,
  WAM_STATUS_MISSING_SITUATIONS = 12,
  WAM_STATUS_FORMAT = 13,
  WAM_STATUS_IO = 14,
  WAM_STATUS_CSV = 15,
} WamStatus;

/**
 * Opaque displacement database.
 */
typedef struct WamDatabase WamDatabase;

typedef struct WamParams {
  double a;
  double b;
  double c_orient;
  /**
   * Cutoff radius in metres.
   */
  double r;
} WamParams;

typedef struct WamState {
  double x;
  double y;
  double speed;
  /**
   * Unit heading vector.
   */
  double ox;
  double oy;
} WamState;

typedef struct WamPrediction {
  size_t horizon_steps;
  double dx;
  double dy;
  double x;
  double y;
  double total_weight;
  size_t support_count;
} WamPrediction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Loads a database file. On success `*out` receives a new handle.
 *
 * # Safety
 * `file` must be a NUL-terminated string and `out` a valid pointer.
 */
enum WamStatus wam_database_load(const char *file, struct WamDatabase **out_db);

/**
 * Builds a database from a corpus file for the given horizons.
 *
 * # Safety
 * `file` must be a NUL-terminated string, `horizons` must point to
 * `n_horizons` values and `out_db` must be valid.
 */
enum WamStatus wam_database_build(const char *file,
                                  const size_t *horizons,
                                  size_t n_horizons,
                                  size_t warmup_offset,
                                  struct WamDatabase **out_db);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `db` must come from this library and must not be used afterwards.
 */
void wam_database_free(struct WamDatabase *db);

/**
 * Number of entries, or 0 for a null handle.
 *
 * # Safety
 * `db` must be null or a live handle.
 */
size_t wam_database_len(const struct WamDatabase *db);

/**
 * Sample period in seconds, or 0 for a null handle.
 *
 * # Safety
 * `db` must be null or a live handle.
 */
double wam_database_sample_period(const struct WamDatabase *db);

/**
 * Weighted average prediction.
 *
 * # Safety
 * All pointers must be valid.
 */
enum WamStatus wam_predict(const struct WamDatabase *db,
                           const struct WamParams *params,
                           const struct WamState *state,
                           size_t horizon_steps,
                           struct WamPrediction *out_prediction);

/**
 * Interaction-aware prediction. `has_other = false` queries a situation
 * without another vehicle and ignores `other_x`, `other_y`.
 *
 * # Safety
 * All pointers must be valid.
 */
enum WamStatus wam_interaction_predict(const struct WamDatabase *db,
                                       const struct WamParams *params,
                                       double d,
                                       double e,
                                       const struct WamState *state,
                                       bool has_other,
                                       double other_x,
                                       double other_y,
                                       size_t horizon_steps,
                                       struct WamPrediction *out_prediction);

/**
 * Constant-velocity baseline.
 *
 * # Safety
 * All pointers must be valid.
 */
enum WamStatus wam_constant_velocity_predict(const struct WamState *state,
                                             size_t horizon_steps,
                                             double sample_period,
                                             struct WamPrediction *out_prediction);

/**
 * Similarity of two states, 0 outside the cutoff radius.
 *
 * # Safety
 * All pointers must be valid.
 */
enum WamStatus wam_similarity(const struct WamParams *params,
                              const struct WamState *a,
                              const struct WamState *b,
                              double *out_value);

/**
 * Seconds to brake from `v0` m/s with friction coefficient `mu`.
 *
 * # Safety
 * `out_seconds` must be valid.
 */
enum WamStatus wam_min_horizon(double v0, double mu, double *out_seconds);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *wam_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *wam_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WAM_H */
