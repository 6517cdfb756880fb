#ifndef SEPDYN_H
#define SEPDYN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SdStatus {
  SD_STATUS_OK = 0,
  SD_STATUS_NULL_POINTER = 1,
  SD_STATUS_INVALID_ARGUMENT = 2,
  SD_STATUS_DIMENSION = 3,
  SD_STATUS_NOT_HERMITIAN = 4,
  SD_STATUS_SOLVER_FAILED = 5,
  SD_STATUS_BUFFER_TOO_SMALL = 6,
  SD_STATUS_PANIC = 7,
} SdStatus;

/**
 * Values accepted for the `scheme` argument.
 */
typedef enum SdScheme {
  SD_SCHEME_LIE_TROTTER = 0,
  SD_SCHEME_STRANG = 1,
} SdScheme;

/**
 * Opaque Hermitian operator with subsystem dimensions.
 */
typedef struct SdOperator SdOperator;

/**
 * Opaque separable state (one ket per subsystem).
 */
typedef struct SdState SdState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sd_version(void);

/**
 * Length in bytes of the last error message on this thread, excluding the
 * terminator; 0 if none.
 */
size_t sd_last_error_length(void);

/**
 * Copy the last error message (NUL-terminated) into `buf`.
 *
 * # Safety
 * `buf` must be valid for writes of `len` bytes.
 */
enum SdStatus sd_last_error_message(char *buf, size_t len);

/**
 * Swap operator on two subsystems of dimension `d`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SdStatus sd_operator_swap(size_t d, struct SdOperator **out);

/**
 * Seeded random Hermitian operator on `n_qubits` qubits.
 *
 * # Safety
 * As for [`sd_operator_swap`].
 */
enum SdStatus sd_operator_random(size_t n_qubits, uint64_t seed, struct SdOperator **out);

/**
 * Three-qutrit ladder-operator correlator with `r`-party terms.
 *
 * # Safety
 * As for [`sd_operator_swap`].
 */
enum SdStatus sd_operator_ladder(size_t r, struct SdOperator **out);

/**
 * Parse an operator from its JSON form (`dims` plus `entries` as rows of
 * `[re, im]` pairs).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` as for [`sd_operator_swap`].
 */
enum SdStatus sd_operator_from_json(const char *json, struct SdOperator **out);

/**
 * Total Hilbert-space dimension of the operator.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum SdStatus sd_operator_dim(const struct SdOperator *op, size_t *out);

/**
 * # Safety
 * `op` must be null or a handle not yet freed.
 */
void sd_operator_free(struct SdOperator *op);

/**
 * Build a state from stacked amplitudes: `dims[0]` entries for the first
 * subsystem, then `dims[1]`, and so on. Real and imaginary parts are passed
 * in separate arrays of length `sum(dims)`.
 *
 * # Safety
 * `dims` must hold `n_parts` values; `re` and `im` must each hold
 * `sum(dims)` values; `out` must be writable.
 */
enum SdStatus sd_state_new(const size_t *dims,
                           size_t n_parts,
                           const double *re,
                           const double *im,
                           struct SdState **out);

/**
 * Number of stacked amplitudes, `sum(dims)`.
 *
 * # Safety
 * `state` must be a live handle and `out` writable.
 */
enum SdStatus sd_state_len(const struct SdState *state, size_t *out);

/**
 * Copy the stacked amplitudes out. `len` must be at least [`sd_state_len`].
 *
 * # Safety
 * `re` and `im` must be writable for `len` values.
 */
enum SdStatus sd_state_amplitudes(const struct SdState *state, double *re, double *im, size_t len);

/**
 * Norm of the tensor product of the parts.
 *
 * # Safety
 * `state` must be a live handle and `out` writable.
 */
enum SdStatus sd_state_norm(const struct SdState *state, double *out);

/**
 * # Safety
 * `state` must be null or a handle not yet freed.
 */
void sd_state_free(struct SdState *state);

/**
 * Advance `state` in place by `steps` splitting steps of size `dt`.
 * `scheme` is one of the [`SdScheme`] values. On failure the state holds the
 * last successful step.
 *
 * # Safety
 * `op` and `state` must be live handles; `state` must not be aliased.
 */
enum SdStatus sd_evolve(const struct SdOperator *op,
                        struct SdState *state,
                        uint32_t scheme,
                        double dt,
                        size_t steps);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEPDYN_H */
