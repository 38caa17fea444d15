#ifndef QUANTUMNESS_H
#define QUANTUMNESS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QnMethod {
  QN_METHOD_NUMERIC = 0,
  QN_METHOD_CLOSED = 1,
} QnMethod;

typedef enum QnStatus {
  QN_STATUS_OK = 0,
  QN_STATUS_NULL_POINTER = 1,
  QN_STATUS_INVALID_ARGUMENT = 2,
  QN_STATUS_MODEL_MISMATCH = 3,
  QN_STATUS_CRITICAL = 4,
  QN_STATUS_NUMERICAL = 5,
  QN_STATUS_IO = 6,
  QN_STATUS_PANIC = 7,
} QnStatus;

typedef enum QnTreatment {
  QN_TREATMENT_QUANTUM = 0,
  QN_TREATMENT_CLASSICAL = 1,
} QnTreatment;

/**
 * Opaque model handle.
 */
typedef struct QnModel QnModel;

/**
 * Opaque spectrum handle.
 */
typedef struct QnSpectrum QnSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a model from physical parameters.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum QnStatus qn_model_new(double omega,
                           double big_omega,
                           double g1,
                           double g2,
                           double hbar,
                           double beta,
                           struct QnModel **out);

/**
 * Creates a model from x = Ω/ω, q = (g1+g2)/gc and η = g1/(g1+g2).
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum QnStatus qn_model_from_dimensionless(double x,
                                          double q,
                                          double eta,
                                          double gc,
                                          double beta,
                                          double hbar,
                                          struct QnModel **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must be null or a live handle from a model constructor, not yet freed.
 */
void qn_model_free(struct QnModel *model);

/**
 * Free energy of one treatment. `eps` is the tail tolerance of the
 * numeric route and is ignored by the closed forms.
 *
 * # Safety
 * `model` must be null or a live model handle; each output pointer must be
 * null or valid for writing one `double`.
 */
enum QnStatus qn_free_energy(const struct QnModel *model,
                             double beta,
                             enum QnTreatment treatment,
                             enum QnMethod method,
                             double eps,
                             double *out_value,
                             double *out_err);

/**
 * ΔQC = F_Q − F_C. `out_err` may be null.
 *
 * # Safety
 * `model` must be null or a live model handle; each output pointer must be
 * null or valid for writing one `double`.
 */
enum QnStatus qn_delta_qc(const struct QnModel *model,
                          double beta,
                          enum QnMethod method,
                          double eps,
                          double *out_value,
                          double *out_err);

/**
 * The quantum spectrum summed by the numeric free energy, truncated so
 * that the Boltzmann tail at `beta` is below `eps`.
 *
 * # Safety
 * `model` must be null or a live model handle; `out` must be null or valid
 * for writing one pointer.
 */
enum QnStatus qn_spectrum_new(const struct QnModel *model,
                              double beta,
                              double eps,
                              struct QnSpectrum **out);

/**
 * Number of levels; 0 for a null handle.
 *
 * # Safety
 * `spectrum` must be null or a live handle from `qn_spectrum_new`.
 */
size_t qn_spectrum_len(const struct QnSpectrum *spectrum);

/**
 * Copies the ascending levels into `buf`, which must hold `len` values;
 * `len` must equal `qn_spectrum_len`.
 *
 * # Safety
 * `spectrum` must be null or a live spectrum handle; `buf` must be null or
 * valid for writing `len` values.
 */
enum QnStatus qn_spectrum_copy(const struct QnSpectrum *spectrum, double *buf, size_t len);

/**
 * Releases a spectrum. Null is ignored.
 *
 * # Safety
 * `spectrum` must be null or a live handle from `qn_spectrum_new`, not yet freed.
 */
void qn_spectrum_free(struct QnSpectrum *spectrum);

/**
 * Message for the last failed call on this thread; empty after success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *qn_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qn_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUANTUMNESS_H */
