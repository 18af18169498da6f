#ifndef CAIDGEO_H
#define CAIDGEO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call. The nonzero values match the command-line exit codes where they overlap.
 */
typedef enum CaidgeoStatus {
  CAIDGEO_STATUS_OK = 0,
  CAIDGEO_STATUS_NULL_POINTER = 1,
  CAIDGEO_STATUS_INVALID_INPUT = 2,
  CAIDGEO_STATUS_SOLVER_FAILURE = 3,
  /**
   * The report was produced but `A` is only a lower bound, so part of it is withheld.
   */
  CAIDGEO_STATUS_PARTIAL = 4,
  /**
   * The report was produced and certification found violations.
   */
  CAIDGEO_STATUS_VIOLATIONS = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  CAIDGEO_STATUS_INTERNAL = 6,
} CaidgeoStatus;

/**
 * What [`caidgeo_run`] computes.
 */
typedef enum CaidgeoStage {
  CAIDGEO_STAGE_CAPACITY = 0,
  CAIDGEO_STAGE_CONSTANTS = 1,
  CAIDGEO_STAGE_CERTIFY = 2,
} CaidgeoStage;

/**
 * A channel together with its constraint set.
 */
typedef struct CaidgeoChannel CaidgeoChannel;

typedef struct CaidgeoReport CaidgeoReport;

typedef struct CaidgeoOptions {
  enum CaidgeoStage stage;
  /**
   * 1 to 4.
   */
  uint8_t theorem;
  size_t samples;
  uint64_t seed;
  /**
   * Solver duality-gap tolerance; zero selects the default.
   */
  double tol;
} CaidgeoOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Text of the last failure on this thread; empty if there was none.
 */
const char *caidgeo_last_error(void);

/**
 * Library version as a static string.
 */
const char *caidgeo_version(void);

/**
 * Parses a JSON channel file held in memory.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CaidgeoStatus caidgeo_channel_from_json(const char *json, struct CaidgeoChannel **out);

/**
 * Builds a classical channel on the full simplex from a row-major `inputs x outputs` matrix.
 *
 * # Safety
 * `rows` must point to `inputs * outputs` doubles and `out` must be valid.
 */
enum CaidgeoStatus caidgeo_channel_from_matrix(const double *rows,
                                               size_t inputs,
                                               size_t outputs,
                                               struct CaidgeoChannel **out);

/**
 * Loads a built-in channel with its default parameters.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CaidgeoStatus caidgeo_channel_from_corpus(const char *name, struct CaidgeoChannel **out);

/**
 * Number of input letters; zero for a null handle.
 *
 * # Safety
 * `channel` must be null or a live handle.
 */
size_t caidgeo_channel_inputs(const struct CaidgeoChannel *channel);

/**
 * # Safety
 * `channel` must be null or a handle not yet freed.
 */
void caidgeo_channel_free(struct CaidgeoChannel *channel);

/**
 * Runs the pipeline. On `Ok`, `Partial` and `Violations` a report is stored in `out`.
 *
 * # Safety
 * `channel` must be a live handle; `options` and `out` must be valid pointers.
 */
enum CaidgeoStatus caidgeo_run(const struct CaidgeoChannel *channel,
                               const struct CaidgeoOptions *options,
                               struct CaidgeoReport **out);

/**
 * The report as JSON, valid until the report is freed.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
const char *caidgeo_report_json(const struct CaidgeoReport *report);

/**
 * Capacity in nats, or NaN for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
double caidgeo_report_capacity(const struct CaidgeoReport *report);

/**
 * Copies the maximizer into `buf` (capacity `len`) and returns the number of letters.
 *
 * # Safety
 * `report` must be null or a live handle; `buf` must hold `len` doubles or be null.
 */
size_t caidgeo_report_maximizer(const struct CaidgeoReport *report, double *buf, size_t len);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void caidgeo_report_free(struct CaidgeoReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAIDGEO_H */
