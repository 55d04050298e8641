#ifndef ORDERSYNTH_H
#define ORDERSYNTH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every exported function.
 */
typedef enum OsStatus {
  OS_STATUS_OK = 0,
  /**
   * Inconsistent lengths, rates or empty data.
   */
  OS_STATUS_INPUT = 1,
  /**
   * Unparseable file or JSON.
   */
  OS_STATUS_FORMAT = 2,
  /**
   * Configuration value out of range.
   */
  OS_STATUS_PARAMETER = 3,
  OS_STATUS_IO = 4,
  /**
   * Numeric argument outside a function's domain.
   */
  OS_STATUS_DOMAIN = 5,
  /**
   * Control value outside the annotation bounds.
   */
  OS_STATUS_RANGE = 6,
  OS_STATUS_NULL_POINTER = 7,
  /**
   * A panic was caught at the boundary.
   */
  OS_STATUS_PANIC = 8,
  /**
   * Output buffer too small; the required size has been written.
   */
  OS_STATUS_BUFFER_TOO_SMALL = 9,
} OsStatus;

/**
 * Opaque synthesis parameter set.
 */
typedef struct OsParams OsParams;

/**
 * Opaque timbre table.
 */
typedef struct OsTable OsTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length excluding the NUL.
 * Pass a null `buf` to query the length.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t os_last_error_message(char *buf, size_t len);

/**
 * Loads a table from a JSON file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum OsStatus os_table_load(const char *path, struct OsTable **out);

/**
 * Parses a table from a JSON string.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum OsStatus os_table_from_json(const char *json, struct OsTable **out);

/**
 * # Safety
 * `table` must be null or a handle from this library, not yet freed.
 */
void os_table_free(struct OsTable *table);

/**
 * Number of orders per cell, or 0 for a null handle.
 *
 * # Safety
 * `table` must be null or a live handle.
 */
size_t os_table_num_orders(const struct OsTable *table);

/**
 * Bilinear lookup at (rpm, torque). Both outputs hold `len` values, which
 * must equal the table's order count.
 *
 * # Safety
 * `deviation` and `magnitude` must be valid for `len` doubles.
 */
enum OsStatus os_table_lookup(const struct OsTable *table,
                              double rpm,
                              double torque,
                              double *deviation,
                              double *magnitude,
                              size_t len);

/**
 * Default synthesis parameters.
 *
 * # Safety
 * `out` must be writable.
 */
enum OsStatus os_params_default(struct OsParams **out);

/**
 * Parses and validates parameters from JSON; missing fields take defaults.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum OsStatus os_params_from_json(const char *json, struct OsParams **out);

/**
 * # Safety
 * `params` must be a live handle.
 */
enum OsStatus os_params_set_seed(struct OsParams *params, uint64_t seed);

/**
 * Output sample rate, or 0 for a null handle.
 *
 * # Safety
 * `params` must be null or a live handle.
 */
uint32_t os_params_sample_rate(const struct OsParams *params);

/**
 * # Safety
 * `params` must be null or a handle from this library, not yet freed.
 */
void os_params_free(struct OsParams *params);

/**
 * Number of stereo frames [`os_synthesize`] produces for a trace of
 * `trace_len` samples at `trace_rate`.
 *
 * # Safety
 * `params` must be a live handle; `out_len` must be writable.
 */
enum OsStatus os_synth_output_len(const struct OsParams *params,
                                  uint32_t trace_rate,
                                  size_t trace_len,
                                  size_t *out_len);

/**
 * Renders stereo audio for a control trace. `left` and `right` must each
 * hold `capacity` samples; the rendered length is written to `out_len`.
 * If `capacity` is too small, nothing is rendered, `out_len` receives the
 * required length and the call returns `BufferTooSmall`.
 *
 * # Safety
 * `rpm` and `torque` must be valid for `trace_len` doubles, `left` and
 * `right` for `capacity` doubles, and `out_len` writable.
 */
enum OsStatus os_synthesize(const struct OsTable *table,
                            const struct OsParams *params,
                            uint32_t trace_rate,
                            const double *rpm,
                            const double *torque,
                            size_t trace_len,
                            double *left,
                            double *right,
                            size_t capacity,
                            size_t *out_len);

/**
 * Quantizes RPM and torque into annotation codes.
 *
 * # Safety
 * All four arrays must be valid for `len` elements.
 */
enum OsStatus os_encode_controls(const double *rpm,
                                 const double *torque,
                                 size_t len,
                                 int16_t *rpm_codes,
                                 int16_t *torque_codes);

/**
 * Inverse of [`os_encode_controls`].
 *
 * # Safety
 * All four arrays must be valid for `len` elements.
 */
enum OsStatus os_decode_controls(const int16_t *rpm_codes,
                                 const int16_t *torque_codes,
                                 size_t len,
                                 double *rpm,
                                 double *torque);

/**
 * Number of orders reported by [`os_analyze_frame`].
 */
size_t os_default_num_orders(void);

/**
 * Analyzes one mono frame with the default configuration at `sample_rate`.
 * `f0` is the mean engine rotation frequency in Hz (RPM / 60). Each output
 * array holds `num_orders` values, which must equal
 * [`os_default_num_orders`]; `in_band` receives 1 or 0.
 *
 * # Safety
 * `samples` must be valid for `len` doubles and the outputs for
 * `num_orders` elements.
 */
enum OsStatus os_analyze_frame(const double *samples,
                               size_t len,
                               uint32_t sample_rate,
                               double f0,
                               double *deviation,
                               double *magnitude,
                               uint8_t *in_band,
                               size_t num_orders);

/**
 * Library version as a static NUL-terminated string.
 */
const char *os_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ORDERSYNTH_H */
