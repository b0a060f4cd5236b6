/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef LVHC_H
#define LVHC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum {
  LVHC_STATUS_OK = 0,
  LVHC_STATUS_NULL_POINTER = 1,
  LVHC_STATUS_INVALID_UTF8 = 2,
  LVHC_STATUS_IO = 3,
  LVHC_STATUS_PARSE = 4,
  LVHC_STATUS_VALIDATION = 5,
  LVHC_STATUS_SINGULAR = 6,
  LVHC_STATUS_NON_CONVERGENCE = 7,
  LVHC_STATUS_INVALID_ARGUMENT = 8,
  LVHC_STATUS_NO_HEADROOM = 9,
  LVHC_STATUS_ALL_UNBOUNDED = 10,
  LVHC_STATUS_INVALID_BRACKET = 11,
  LVHC_STATUS_BISECTION_NOT_CONVERGED = 12,
  LVHC_STATUS_SERIALIZATION = 13,
  LVHC_STATUS_BUFFER_TOO_SMALL = 14,
  LVHC_STATUS_PANIC = 15,
} LvhcStatus;

/**
 * A feeder with its admittance factorization and linear voltage model.
 */
typedef struct LvhcFeeder LvhcFeeder;

/**
 * Per-generator fixed-voltage capacities of one Monte Carlo study.
 */
typedef struct LvhcSamples LvhcSamples;

/**
 * Φ_ε estimate. Powers are per unit of the feeder's power base.
 */
typedef struct {
  double phi_eps_total;
  double phi_eps_per_gen;
  double epsilon;
  size_t n_gen;
  /**
   * ε̂ evaluations (fixed power), 0 for fixed voltage.
   */
  size_t iterations;
  double wall_time_s;
  double base_power_kva;
} LvhcEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *lvhc_version(void);

/**
 * Message of the last failed call on this thread, or null after a success.
 * Valid until the next library call on the same thread.
 */
const char *lvhc_last_error_message(void);

/**
 * Loads a JSON feeder file and builds its model.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out` must be writable.
 */
LvhcStatus lvhc_feeder_load(const char *path, LvhcFeeder **out);

/**
 * Builds a feeder from JSON text.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
LvhcStatus lvhc_feeder_from_json(const char *json, LvhcFeeder **out);

/**
 * Builds one of the bundled feeders (`twobus`, `synth10`, `synth55`).
 *
 * # Safety
 * `name` must be a nul-terminated string; `out` must be writable.
 */
LvhcStatus lvhc_feeder_builtin(const char *name, LvhcFeeder **out);

/**
 * # Safety
 * `feeder` must be null or a handle from this library, not yet freed.
 */
void lvhc_feeder_free(LvhcFeeder *feeder);

/**
 * Number of loads, or 0 for a null handle.
 *
 * # Safety
 * `feeder` must be null or a live handle.
 */
size_t lvhc_feeder_n_loads(const LvhcFeeder *feeder);

/**
 * Voltage upper limit from the feeder file, pu, or NaN for a null handle.
 *
 * # Safety
 * `feeder` must be null or a live handle.
 */
double lvhc_feeder_v_plus(const LvhcFeeder *feeder);

/**
 * Fixed-voltage study over scenarios `0..n_mc` of `seed`. Pass NaN as
 * `v_plus` to use the feeder's limit.
 *
 * # Safety
 * `feeder` must be a live handle; `out` must be writable.
 */
LvhcStatus lvhc_run_fixed_voltage(const LvhcFeeder *feeder,
                                  size_t n_gen,
                                  size_t n_mc,
                                  uint64_t seed,
                                  double v_plus,
                                  LvhcSamples **out);

/**
 * # Safety
 * `samples` must be null or a handle from this library, not yet freed.
 */
void lvhc_samples_free(LvhcSamples *samples);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `samples` must be null or a live handle.
 */
size_t lvhc_samples_len(const LvhcSamples *samples);

/**
 * Number of scenarios with no binding constraint.
 *
 * # Safety
 * `samples` must be null or a live handle.
 */
size_t lvhc_samples_unbounded(const LvhcSamples *samples);

/**
 * Copies per-generator capacities (pu, scenario order, +inf when
 * unbounded) into `buf`, which must hold at least `lvhc_samples_len` values.
 *
 * # Safety
 * `buf` must be valid for `len` writes.
 */
LvhcStatus lvhc_samples_copy(const LvhcSamples *samples, double *buf, size_t len);

/**
 * Φ_ε from a fixed-voltage sample set.
 *
 * # Safety
 * `samples` must be a live handle; `out` must be writable.
 */
LvhcStatus lvhc_samples_estimate(const LvhcSamples *samples, double epsilon, LvhcEstimate *out);

/**
 * Sample set as JSON; release the string with [`lvhc_string_free`].
 *
 * # Safety
 * `samples` must be a live handle; `out` must be writable.
 */
LvhcStatus lvhc_samples_to_json(const LvhcSamples *samples, char **out);

/**
 * Fixed-power study: bisection on total power over scenarios `0..n_mc` of
 * `seed`, bracketed by the 100%-penetration capacity. Pass NaN as `v_plus`
 * to use the feeder's limit.
 *
 * # Safety
 * `feeder` must be a live handle; `out` must be writable.
 */
LvhcStatus lvhc_run_fixed_power(const LvhcFeeder *feeder,
                                size_t n_gen,
                                size_t n_mc,
                                uint64_t seed,
                                double epsilon,
                                double tau,
                                double v_plus,
                                size_t max_iter,
                                LvhcEstimate *out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void lvhc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LVHC_H */
