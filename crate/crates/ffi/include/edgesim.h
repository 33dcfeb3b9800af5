#ifndef EDGESIM_H
#define EDGESIM_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EdgesimStatus {
  EDGESIM_STATUS_OK = 0,
  EDGESIM_STATUS_NULL_POINTER = 1,
  EDGESIM_STATUS_INVALID_UTF8 = 2,
  EDGESIM_STATUS_INVALID_SCENARIO = 3,
  EDGESIM_STATUS_INVALID_ARGUMENT = 4,
  EDGESIM_STATUS_SIMULATION_FAILED = 5,
  EDGESIM_STATUS_IO = 6,
  EDGESIM_STATUS_PANIC = 7,
} EdgesimStatus;

/**
 * Values accepted by the `engine` argument of [`edgesim_run`].
 */
typedef enum EdgesimEngine {
  EDGESIM_ENGINE_BASELINE = 0,
  EDGESIM_ENGINE_RENOVATED = 1,
} EdgesimEngine;

/**
 * Opaque scenario handle.
 */
typedef struct EdgesimScenario EdgesimScenario;

typedef struct EdgesimSummary {
  uint64_t tasks_generated;
  uint64_t completed;
  uint64_t failed_network;
  uint64_t failed_mobility;
  uint64_t failed_vm;
  double failed_rel_pct;
  /**
   * NaN when no task completed.
   */
  double avg_service_time_s;
  double wall_time_s;
  uint64_t peak_queue_size;
  uint64_t events_dispatched;
} EdgesimSummary;

typedef struct EdgesimKsResult {
  double d;
  double p_value;
  size_t n;
  size_t m;
} EdgesimKsResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses and validates a scenario from a JSON string.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable. The
 * handle written to `out` must be released with [`edgesim_scenario_free`].
 */
enum EdgesimStatus edgesim_scenario_from_json(const char *json, struct EdgesimScenario **out);

/**
 * Reads, parses and validates a scenario file.
 *
 * # Safety
 * As [`edgesim_scenario_from_json`], with `path` a nul-terminated path.
 */
enum EdgesimStatus edgesim_scenario_from_file(const char *path, struct EdgesimScenario **out);

/**
 * Releases a scenario handle. Null is ignored.
 *
 * # Safety
 * `scenario` must come from this library and not be used afterwards.
 */
void edgesim_scenario_free(struct EdgesimScenario *scenario);

/**
 * Overrides the device population of a scenario.
 *
 * # Safety
 * `scenario` must be a live handle.
 */
enum EdgesimStatus edgesim_scenario_set_device_count(struct EdgesimScenario *scenario,
                                                     uint32_t device_count);

/**
 * Runs one simulation and writes its summary to `out`.
 *
 * # Safety
 * `scenario` must be a live handle and `out` writable.
 */
enum EdgesimStatus edgesim_run(const struct EdgesimScenario *scenario,
                               int32_t engine,
                               uint64_t seed,
                               struct EdgesimSummary *out);

/**
 * Two-sample Kolmogorov-Smirnov test.
 *
 * # Safety
 * `a` and `b` must point to `n` and `m` readable doubles; `out` writable.
 */
enum EdgesimStatus edgesim_ks_test(const double *a,
                                   size_t n,
                                   const double *b,
                                   size_t m,
                                   struct EdgesimKsResult *out);

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next call into the library on this thread.
 */
const char *edgesim_last_error(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *edgesim_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EDGESIM_H */
