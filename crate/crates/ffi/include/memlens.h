#ifndef MEMLENS_H
#define MEMLENS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum MlStatus {
  ML_STATUS_OK = 0,
  ML_STATUS_NULL_POINTER = 1,
  ML_STATUS_INVALID_ARGUMENT = 2,
  ML_STATUS_COMPUTATION = 3,
  ML_STATUS_PARSE = 4,
  ML_STATUS_BUFFER_TOO_SMALL = 5,
  ML_STATUS_PANIC = 6,
} MlStatus;

/**
 * A linear dilated CNN.
 */
typedef struct MlCnnSpec MlCnnSpec;

/**
 * A causal sequence.
 */
typedef struct MlSequence MlSequence;

/**
 * Pooled singular values of a tensorised sequence.
 */
typedef struct MlSpectrum MlSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next `ml_*` call on the same thread.
 */
const char *ml_last_error_message(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must come from an `ml_*` function that returns an owned string, or be NULL.
 */
void ml_string_free(char *s);

/**
 * Finite sequence from `len` row-major values of dimension `dim`.
 *
 * # Safety
 * `values` must point to `len` readable doubles (may be NULL when `len == 0`);
 * `out` must be writable.
 */
enum MlStatus ml_sequence_from_values(uintptr_t dim,
                                      const double *values,
                                      uintptr_t len,
                                      struct MlSequence **out);

/**
 * Builtin target: `rho1`, `rho2`, `rho3`, `exp:<gamma>` or `impulse:<t>`.
 *
 * # Safety
 * `id` must be a NUL-terminated string; `out` must be writable.
 */
enum MlStatus ml_sequence_builtin(const char *id, struct MlSequence **out);

/**
 * Sequence from its JSON literal.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum MlStatus ml_sequence_from_json(const char *json, struct MlSequence **out);

/**
 * # Safety
 * `seq` must come from an `ml_sequence_*` constructor or be NULL.
 */
void ml_sequence_free(struct MlSequence *seq);

/**
 * Channel dimension of `seq`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MlStatus ml_sequence_dim(const struct MlSequence *seq, uintptr_t *out);

/**
 * Largest time index with a nonzero entry, or -1 for empty support.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MlStatus ml_sequence_radius(const struct MlSequence *seq, int64_t *out);

/**
 * Values at times `0..n` (row-major, `n * dim` doubles) into `buf`.
 *
 * # Safety
 * `buf` must have room for `cap` doubles.
 */
enum MlStatus ml_sequence_values(const struct MlSequence *seq,
                                 uintptr_t n,
                                 double *buf,
                                 uintptr_t cap);

/**
 * `sqrt(sum_{t >= start} |s(t)|^2)` as a value and an interval half-width.
 *
 * # Safety
 * Pointers must be valid; `half_width` may be NULL.
 */
enum MlStatus ml_sequence_tail_norm(const struct MlSequence *seq,
                                    uintptr_t start,
                                    double *value,
                                    double *half_width);

/**
 * Spectrum of the order-`k` tensorisation of `seq` restricted to `[0, l^k)`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MlStatus ml_spectrum_compute(const struct MlSequence *seq,
                                  uintptr_t l,
                                  uintptr_t k,
                                  struct MlSpectrum **out);

/**
 * # Safety
 * `spec` must come from [`ml_spectrum_compute`] or be NULL.
 */
void ml_spectrum_free(struct MlSpectrum *spec);

/**
 * # Safety
 * Pointers must be valid.
 */
enum MlStatus ml_spectrum_len(const struct MlSpectrum *spec, uintptr_t *out);

/**
 * Sorted values, and optionally their 0-based modes.
 *
 * # Safety
 * `values` (and `modes` when non-NULL) must hold `cap` elements.
 */
enum MlStatus ml_spectrum_values(const struct MlSpectrum *spec,
                                 double *values,
                                 uintptr_t *modes,
                                 uintptr_t cap);

/**
 * Number of values above `rtol` times the largest.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MlStatus ml_spectrum_rank(const struct MlSpectrum *spec, double rtol, uintptr_t *out);

/**
 * Root of the squared spectrum tail past the first `kept` values.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MlStatus ml_spectrum_truncation_error(const struct MlSpectrum *spec,
                                           uintptr_t kept,
                                           double *out);

/**
 * Complexity measure of a finitely supported `seq` for the decay profile
 * given as JSON, e.g. `{"family":"exponential","scale":1,"base":0.5}`.
 * May write +infinity.
 *
 * # Safety
 * Pointers must be valid; `g_json` NUL-terminated.
 */
enum MlStatus ml_complexity_measure(const struct MlSequence *seq,
                                    uintptr_t l,
                                    const char *g_json,
                                    double *out);

/**
 * Exact CNN from one-hot filters on the base-`l` digits of each nonzero time.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MlStatus ml_cnn_synthesize_radix(const struct MlSequence *seq,
                                      uintptr_t l,
                                      struct MlCnnSpec **out);

/**
 * Exact depth-`k` CNN from the HOSVD of the tensorised target.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MlStatus ml_cnn_synthesize_lowrank(const struct MlSequence *seq,
                                        uintptr_t l,
                                        uintptr_t k,
                                        struct MlCnnSpec **out);

/**
 * CNN from its JSON form.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` writable.
 */
enum MlStatus ml_cnn_from_json(const char *json, struct MlCnnSpec **out);

/**
 * JSON form of `spec`; free with [`ml_string_free`].
 *
 * # Safety
 * Pointers must be valid.
 */
enum MlStatus ml_cnn_to_json(const struct MlCnnSpec *spec, char **out);

/**
 * Number of nonzero filters.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MlStatus ml_cnn_filter_count(const struct MlCnnSpec *spec, uintptr_t *out);

/**
 * Depth of `spec`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MlStatus ml_cnn_depth(const struct MlCnnSpec *spec, uintptr_t *out);

/**
 * The representation the network induces, as a new sequence.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MlStatus ml_cnn_representation(const struct MlCnnSpec *spec, struct MlSequence **out);

/**
 * # Safety
 * `spec` must come from an `ml_cnn_*` constructor or be NULL.
 */
void ml_cnn_free(struct MlCnnSpec *spec);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MEMLENS_H */
