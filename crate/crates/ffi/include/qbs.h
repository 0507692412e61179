#ifndef QBS_FFI_H
#define QBS_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum QbsStatus {
  QBS_STATUS_OK = 0,
  QBS_STATUS_NULL_POINTER = 1,
  QBS_STATUS_INVALID_ARGUMENT = 2,
  QBS_STATUS_CAPACITY = 3,
  QBS_STATUS_INVALID_DATA = 4,
  QBS_STATUS_BUFFER_TOO_SMALL = 5,
  QBS_STATUS_IO = 6,
  QBS_STATUS_PANIC = 7,
} QbsStatus;

typedef enum QbsGateKind {
  QBS_GATE_KIND_H = 0,
  QBS_GATE_KIND_X = 1,
  QBS_GATE_KIND_CX = 2,
  QBS_GATE_KIND_CCX = 3,
  QBS_GATE_KIND_MCX = 4,
} QbsGateKind;

typedef enum QbsMode {
  QBS_MODE_QUANTUM_SEQUENTIAL = 0,
  QBS_MODE_QUANTUM_PARALLEL = 1,
  QBS_MODE_CLASSICAL_ORACLE = 2,
} QbsMode;

/**
 * Opaque circuit handle.
 */
typedef struct QbsCircuit QbsCircuit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after success.
 * Valid until the next call on the same thread.
 */
const char *qbs_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qbs_version(void);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void qbs_string_free(char *s);

/**
 * Empty circuit on `num_qubits` qubits.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum QbsStatus qbs_circuit_new(size_t num_qubits, struct QbsCircuit **out);

/**
 * # Safety
 * `c` must be a handle from this library (or null) and not used afterwards.
 */
void qbs_circuit_free(struct QbsCircuit *c);

/**
 * Qubit count, or 0 for a null handle.
 *
 * # Safety
 * `c` must be a live handle or null.
 */
size_t qbs_circuit_num_qubits(const struct QbsCircuit *c);

/**
 * Gate count, or 0 for a null handle.
 *
 * # Safety
 * `c` must be a live handle or null.
 */
size_t qbs_circuit_num_gates(const struct QbsCircuit *c);

/**
 * Append one gate. `controls` may be null when `num_controls` is 0.
 *
 * # Safety
 * `c` must be a live handle; `controls` must point to `num_controls` entries.
 */
enum QbsStatus qbs_circuit_append(struct QbsCircuit *c,
                                  enum QbsGateKind kind,
                                  const size_t *controls,
                                  size_t num_controls,
                                  size_t target);

/**
 * Final amplitudes from |0...0>, written to `re`/`im` (each `len >= 2^n`).
 *
 * # Safety
 * `re` and `im` must be writable for `len` doubles.
 */
enum QbsStatus qbs_circuit_simulate(const struct QbsCircuit *c, double *re, double *im, size_t len);

/**
 * Draw `shots` measurements; `counts[i]` receives the hits on basis state
 * `i` (qubit 0 least significant). `len >= 2^n`.
 *
 * # Safety
 * `counts` must be writable for `len` entries.
 */
enum QbsStatus qbs_circuit_sample(const struct QbsCircuit *c,
                                  uint64_t shots,
                                  uint64_t seed,
                                  uint64_t *counts,
                                  size_t len);

/**
 * One shot; the measured basis index goes to `out`.
 *
 * # Safety
 * `out` must be writable.
 */
enum QbsStatus qbs_circuit_measure_once(const struct QbsCircuit *c, uint64_t seed, uint64_t *out);

/**
 * Lookup fragment: address qubits `0..a`, data qubit `a`.
 *
 * # Safety
 * `bits` must point to `len` bytes, each 0 or 1; `out` must be writable.
 */
enum QbsStatus qbs_build_bit_qram(const uint8_t *bits, size_t len, struct QbsCircuit **out);

/**
 * Resampler: Hadamards on the address register followed by the lookup.
 *
 * # Safety
 * As `qbs_build_bit_qram`.
 */
enum QbsStatus qbs_build_qsa(const uint8_t *bits, size_t len, struct QbsCircuit **out);

/**
 * Popcount counter: `p` controls at `0..p`, `q` counter qubits after them.
 *
 * # Safety
 * `out` must be writable.
 */
enum QbsStatus qbs_build_counter(size_t p, size_t q, struct QbsCircuit **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum QbsStatus qbs_build_inverse_counter(size_t p, size_t q, struct QbsCircuit **out);

/**
 * Adder over A `0..w`, B `w..2w`, carry-in `2w`, carry-out `2w+1`.
 *
 * # Safety
 * `out` must be writable.
 */
enum QbsStatus qbs_build_ripple_adder(size_t width, struct QbsCircuit **out);

/**
 * Decode a counter register printed highest bit first.
 *
 * # Safety
 * `bits` must be a NUL-terminated string; `out` must be writable.
 */
enum QbsStatus qbs_decode_counter(const char *bits, size_t q, uint64_t *out);

/**
 * `b` COUNT replications of the 0/1 sample `y` (length `n`) drawn from
 * `population` rows. Raw totals go to `raw`, scaled estimates to
 * `estimates`; either output may be null.
 *
 * # Safety
 * `y` must hold `n` entries; non-null outputs must hold `b` entries.
 */
enum QbsStatus qbs_replicate_count(const uint8_t *y,
                                   size_t n,
                                   size_t population,
                                   size_t b,
                                   enum QbsMode mode,
                                   uint64_t seed,
                                   uint64_t *raw,
                                   double *estimates);

/**
 * Sample standard deviation (`len - 1` denominator) of `len >= 2` values.
 *
 * # Safety
 * `values` must hold `len` doubles; `out` must be writable.
 */
enum QbsStatus qbs_bootstrap_se(const double *values, size_t len, double *out);

/**
 * `estimate -/+ z^(1-alpha) * se`.
 *
 * # Safety
 * `lower` and `upper` must be writable.
 */
enum QbsStatus qbs_confidence_interval(double estimate,
                                       double se,
                                       double alpha,
                                       double *lower,
                                       double *upper);

/**
 * Full pipeline on a table file (CSV, or JSON by `.json` extension) and a
 * JSON query file. The report JSON is written to `*out_json`.
 *
 * # Safety
 * Paths must be NUL-terminated strings; `out_json` must be writable.
 */
enum QbsStatus qbs_assess_json(const char *table_path,
                               const char *query_path,
                               size_t n,
                               size_t b,
                               double alpha,
                               enum QbsMode mode,
                               uint64_t seed,
                               char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QBS_FFI_H */
