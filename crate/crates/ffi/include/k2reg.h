#ifndef K2REG_H
#define K2REG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum K2Status {
  K2_STATUS_OK = 0,
  /**
   * Null pointer or non-UTF-8 string.
   */
  K2_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Malformed or schema-violating input.
   */
  K2_STATUS_INVALID_INPUT = 2,
  /**
   * A numerical or internal computation failed.
   */
  K2_STATUS_COMPUTATION_FAILED = 3,
  /**
   * A Rust panic was caught at the boundary.
   */
  K2_STATUS_PANIC = 4,
} K2Status;

/**
 * Opaque handle to a validated line configuration.
 */
typedef struct K2Config K2Config;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the next call.
 */
const char *k2reg_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void k2reg_string_free(char *s);

/**
 * Parses and validates a configuration from JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum K2Status k2reg_config_from_json(const char *json, struct K2Config **out);

/**
 * # Safety
 * `cfg` must come from [`k2reg_config_from_json`] and not have been freed. Null is ignored.
 */
void k2reg_config_free(struct K2Config *cfg);

/**
 * Serializes the configuration back to JSON.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be writable.
 */
enum K2Status k2reg_config_to_json(const struct K2Config *cfg, char **out);

/**
 * Genus of the curve, equal to the number of special intersection points.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be writable.
 */
enum K2Status k2reg_config_genus(const struct K2Config *cfg, uint64_t *out);

/**
 * Hypothesis checks as JSON.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be writable.
 */
enum K2Status k2reg_validate_json(const struct K2Config *cfg, char **out);

/**
 * Tame symbols of every generator at every place at infinity, as JSON. `passed` is set to
 * whether all of them are 1.
 *
 * # Safety
 * `cfg` must be a live handle; `out` and `passed` must be writable.
 */
enum K2Status k2reg_tame_check_json(const struct K2Config *cfg, char **out, bool *passed);

/**
 * Regulator matrix of the theorem elements at parameter `t` (the configuration's own `t` when
 * `t` is 0), with the projection picked by `seed`. Writes the report as JSON and `|det| / |log t|^g`
 * to `normalized`.
 *
 * # Safety
 * `cfg` must be a live handle; `out` and `normalized` must be writable.
 */
enum K2Status k2reg_regulator_json(const struct K2Config *cfg,
                                   double t,
                                   uint64_t seed,
                                   char **out,
                                   double *normalized);

/**
 * Hyperellipticity of the three-group curve `(n1, n2, n3)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum K2Status k2reg_is_hyperelliptic(size_t n1, size_t n2, size_t n3, bool *out);

/**
 * Runs a command-line invocation (`argv` without the program name). The rendered output goes
 * to `out` and the process exit code the command would have had to `exit_code`.
 *
 * # Safety
 * `argv` must point to `argc` NUL-terminated strings; `out` and `exit_code` must be writable.
 */
enum K2Status k2reg_run(const char *const *argv, size_t argc, char **out, int32_t *exit_code);

/**
 * Library version as a static string.
 */
const char *k2reg_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* K2REG_H */
