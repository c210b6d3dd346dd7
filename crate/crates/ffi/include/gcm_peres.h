#ifndef GCM_PERES_H
#define GCM_PERES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum GcmStatus {
  GCM_STATUS_OK = 0,
  GCM_STATUS_INVALID_ARGUMENT = 1,
  GCM_STATUS_NULL_POINTER = 2,
  GCM_STATUS_NUMERICAL = 3,
  GCM_STATUS_PANIC = 4,
} GcmStatus;

typedef enum GcmQuantization {
  GCM_QUANTIZATION_TWO_D_EVEN = 0,
  GCM_QUANTIZATION_TWO_D_ODD = 1,
  GCM_QUANTIZATION_FIVE_D = 2,
} GcmQuantization;

typedef enum GcmOperator {
  GCM_OPERATOR_L2 = 0,
  GCM_OPERATOR_H_PRIME = 1,
  GCM_OPERATOR_H0 = 2,
  GCM_OPERATOR_H = 3,
} GcmOperator;

/**
 * Opaque diagonalization result.
 */
typedef struct GcmSolution GcmSolution;

/**
 * `V = Aβ² + Bβ³cos3γ + Cβ⁴`, mass `K` and `ħ`.
 */
typedef struct GcmParams {
  double a;
  double b;
  double c;
  double hbar;
  double mass;
} GcmParams;

/**
 * Harmonic expansion around the global minimum.
 */
typedef struct GcmWell {
  double beta0;
  double gamma0;
  double v0;
  double k_beta;
  double k_gamma;
} GcmWell;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 *
 * The pointer stays valid until the next call on the same thread.
 */
const char *gcm_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gcm_version(void);

/**
 * Default parameters `A = −1`, `C = 1`, `K = 1` with the given `B` and `ħ`.
 */
struct GcmParams gcm_params_default(double b, double hbar);

/**
 * # Safety
 * `params` must point to a valid `GcmParams`, `out` to writable memory.
 */
enum GcmStatus gcm_potential(const struct GcmParams *params,
                             double beta,
                             double gamma,
                             double *out);

/**
 * # Safety
 * `params` must point to a valid `GcmParams`, `out` to writable memory.
 */
enum GcmStatus gcm_quadratic_well(const struct GcmParams *params, struct GcmWell *out);

/**
 * Diagonalizes `H` in a basis of `n_max` shells. A non-positive `length`
 * selects the harmonic length of the well.
 *
 * # Safety
 * `params` must point to a valid `GcmParams`; `out` must be writable. The
 * handle written to `*out` must be released with `gcm_solution_free`.
 */
enum GcmStatus gcm_solve(const struct GcmParams *params,
                         enum GcmQuantization quantization,
                         uint32_t n_max,
                         double length,
                         struct GcmSolution **out);

/**
 * # Safety
 * `solution` must be a live handle from `gcm_solve`.
 */
enum GcmStatus gcm_solution_dimension(const struct GcmSolution *solution, size_t *out);

/**
 * Number of leading levels that passed the convergence test.
 *
 * # Safety
 * `solution` must be a live handle from `gcm_solve`.
 */
enum GcmStatus gcm_solution_converged(const struct GcmSolution *solution, size_t *out);

/**
 * Copies up to `len` ascending energies into `buf`; `*total` receives the dimension.
 * Pass `len = 0` to query the size.
 *
 * # Safety
 * `buf` must hold `len` doubles; `total` must be writable.
 */
enum GcmStatus gcm_solution_energies(const struct GcmSolution *solution,
                                     double *buf,
                                     size_t len,
                                     size_t *total);

/**
 * Expectation values of `operator` over the converged levels.
 *
 * # Safety
 * As for `gcm_solution_energies`.
 */
enum GcmStatus gcm_solution_peres(const struct GcmSolution *solution,
                                  enum GcmOperator operator_,
                                  double *buf,
                                  size_t len,
                                  size_t *total);

/**
 * # Safety
 * `solution` must come from `gcm_solve` and not be used afterwards. Null is ignored.
 */
void gcm_solution_free(struct GcmSolution *solution);

/**
 * SALI regular fraction of `n_samples` section points at `energy`, with the
 * default integrator. A non-positive `duration` selects the default SALI time.
 *
 * # Safety
 * `params` must be valid; `value` and `std_error` writable.
 */
enum GcmStatus gcm_regular_fraction(const struct GcmParams *params,
                                    double energy,
                                    size_t n_samples,
                                    uint64_t seed,
                                    double duration,
                                    double *value,
                                    double *std_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GCM_PERES_H */
