#ifndef POLEWARP_H
#define POLEWARP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PwStability {
  PW_STABILITY_STABLE = 0,
  PW_STABILITY_UNSTABLE_OTHER_SEP = 1,
  PW_STABILITY_UNSTABLE_DIVERGENT = 2,
  PW_STABILITY_UNSTABLE_UNCLASSIFIED = 3,
} PwStability;

// Result code of every fallible call.
typedef enum PwStatus {
  PW_STATUS_OK = 0,
  PW_STATUS_NULL_POINTER = 1,
  PW_STATUS_CONFIG = 2,
  PW_STATUS_NUMERICAL = 3,
  PW_STATUS_INVALID_UTF8 = 4,
  // The requested value does not exist for this verdict.
  PW_STATUS_ABSENT = 5,
  PW_STATUS_PANIC = 6,
} PwStatus;

// A validated scenario configuration.
typedef struct PwScenario PwScenario;

// The verdict of one assessment, with the configuration that produced it.
typedef struct PwVerdict PwVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *pw_last_error(void);

// Parses and validates a scenario from JSON text.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum PwStatus pw_scenario_from_json(const char *json, struct PwScenario **out);

// Loads one of the scenarios bundled with the library by name.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a writable pointer.
enum PwStatus pw_scenario_builtin(const char *name, struct PwScenario **out);

// Overrides the working precision in decimal digits.
//
// # Safety
// `scenario` must come from a `pw_scenario_*` constructor.
enum PwStatus pw_scenario_set_digits(struct PwScenario *scenario, uint32_t digits);

// # Safety
// `scenario` must be null or come from a `pw_scenario_*` constructor, and
// must not be used afterwards.
void pw_scenario_free(struct PwScenario *scenario);

// Runs the assessment.
//
// # Safety
// `scenario` must come from a `pw_scenario_*` constructor and `out` must be
// a writable pointer.
enum PwStatus pw_assess(const struct PwScenario *scenario, struct PwVerdict **out);

// # Safety
// `v` must come from `pw_assess`; `out` must be writable.
enum PwStatus pw_verdict_status(const struct PwVerdict *v, enum PwStability *out);

// Location of the detected pole on the contracted axis.
//
// # Safety
// `v` must come from `pw_assess`; `out` must be writable.
enum PwStatus pw_verdict_tau_pole(const struct PwVerdict *v, double *out);

// Value of the approximant just before the horizon.
//
// # Safety
// `v` must come from `pw_assess`; `out` must be writable.
enum PwStatus pw_verdict_h_at_horizon(const struct PwVerdict *v, double *out);

// Configuration and verdict as JSON; release with [`pw_string_free`].
// Returns null when `v` is null.
//
// # Safety
// `v` must be null or come from `pw_assess`.
char *pw_verdict_to_json(const struct PwVerdict *v);

// # Safety
// `v` must be null or come from `pw_assess`, and must not be used afterwards.
void pw_verdict_free(struct PwVerdict *v);

// # Safety
// `s` must be null or a string returned by this library.
void pw_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* POLEWARP_H */
