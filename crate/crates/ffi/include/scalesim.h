#ifndef SCALESIM_H
#define SCALESIM_H

/* This file is generated from the Rust sources by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible library call.
typedef enum ScaleSimStatus {
  // The call succeeded.
  SCALE_SIM_STATUS_OK = 0,
  // A required pointer argument was NULL.
  SCALE_SIM_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  SCALE_SIM_STATUS_INVALID_UTF8 = 2,
  // The input was rejected: unreadable or malformed config, bad index,
  // bad option. Nothing was executed.
  SCALE_SIM_STATUS_VALIDATION_ERROR = 3,
  // The request was valid but executing it failed (I/O, simulation
  // fault). Artifacts may be partially written.
  SCALE_SIM_STATUS_RUNTIME_ERROR = 4,
  // An internal invariant failed. State on this handle should be
  // considered poisoned; free it and report a bug.
  SCALE_SIM_STATUS_PANIC = 5,
} ScaleSimStatus;

// Opaque handle to a loaded scenario configuration.
typedef struct ScaleSimScenario ScaleSimScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Returns the library version as a static NUL-terminated string. Never
// fails; do not free the result.
const char *scalesim_version(void);

// Returns the message for the calling thread's most recent failure, or an
// empty string if the last call succeeded. The pointer stays valid until
// the next library call on this thread; do not free it.
const char *scalesim_last_error(void);

// Parses and validates the scenario config at `path` (UTF-8 file path) and
// stores a handle in `*out`. On failure `*out` is untouched.
enum ScaleSimStatus scalesim_scenario_load(const char *path, struct ScaleSimScenario **out);

// Releases a scenario handle. NULL is a no-op. Each handle must be freed
// exactly once.
void scalesim_scenario_free(struct ScaleSimScenario *scenario);

// Returns how many policy bundles the scenario defines; 0 for NULL.
size_t scalesim_scenario_policy_count(const struct ScaleSimScenario *scenario);

// Stores the label of policy `index` in `*out` as a caller-owned string.
enum ScaleSimStatus scalesim_scenario_policy_label(const struct ScaleSimScenario *scenario,
                                                   size_t index,
                                                   char **out);

// Simulates one policy bundle in memory, writing no files.
//
// `seed_override` replaces the config seed when non-negative. On success
// `*out_json` holds a caller-owned JSON object with the run's headline
// metrics: policy, completed, rejected, rt_mean, rt_p95, util_mean,
// util_var, scale_eff, cost, arrivals_sha256.
enum ScaleSimStatus scalesim_simulate(const struct ScaleSimScenario *scenario,
                                      size_t policy_index,
                                      int64_t seed_override,
                                      char **out_json);

// Runs every policy bundle on a shared workload and writes the full
// artifact set (metrics, comparison table, charts, manifest) under
// `out_dir`. On success `*out_csv` holds the caller-owned comparison table
// as CSV text.
enum ScaleSimStatus scalesim_compare(const struct ScaleSimScenario *scenario,
                                     const char *out_dir,
                                     int64_t seed_override,
                                     char **out_csv);

// Trains the scenario's learned balancer and writes checkpoint, training
// log, and manifest under `out_dir`. On success `*out_json` holds a
// caller-owned JSON object with checkpoint path, training-log path, and
// per-episode mean rewards.
enum ScaleSimStatus scalesim_train(const struct ScaleSimScenario *scenario,
                                   const char *out_dir,
                                   int64_t seed_override,
                                   char **out_json);

// Releases a string produced by this library. NULL is a no-op. Each string
// must be freed exactly once, and only with this function.
void scalesim_string_free(char *string);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCALESIM_H */
