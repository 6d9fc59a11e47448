#ifndef RELAXKIN_H
#define RELAXKIN_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define RK_VARIANT_HABERKORN 0

#define RK_VARIANT_GENERALIZED 1

#define RK_VARIANT_JONES_HORE 2

#define RK_VARIANT_DEPHASING_ONLY 3

#define RK_INITIAL_SINGLET 0

#define RK_INITIAL_TRIPLET_ZERO 1

#define RK_INITIAL_SINGLET_TRIPLET_ZERO 2

typedef enum RkStatus {
  RK_STATUS_OK = 0,
  RK_STATUS_NULL_POINTER = 1,
  RK_STATUS_INVALID_ARGUMENT = 2,
  RK_STATUS_NUMERICAL = 3,
  RK_STATUS_BUFFER_TOO_SMALL = 4,
  RK_STATUS_PANIC = 5,
} RkStatus;

/**
 * Reaction model plus the pair Hamiltonian (zero until set).
 */
typedef struct RkPairModel RkPairModel;

typedef struct RkRateElements {
  double k_ss;
  double k_tt;
  double k_st;
} RkRateElements;

typedef struct RkYields {
  double phi_s;
  double phi_t;
} RkYields;

typedef struct RkThreeStateRates {
  double w11;
  double w22;
  double wn;
  double w01;
  double w02;
} RkThreeStateRates;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` as a
 * nul-terminated string and returns its length without the nul. Returns 0
 * when there is no message. A short buffer gets a truncated message.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t rk_last_error_message(char *buf, size_t len);

/**
 * Creates a reaction model. `kappa_st` is used by the generalized variant
 * only; the dephasing-only variant takes its rate from `kappa_s`.
 *
 * # Safety
 * `out` must be a valid pointer. The handle must be released with
 * [`rk_pair_model_free`].
 */
enum RkStatus rk_pair_model_new(uint32_t variant_code,
                                double kappa_s,
                                double kappa_t,
                                double kappa_st,
                                struct RkPairModel **out);

/**
 * # Safety
 * `model` must be null or a handle from [`rk_pair_model_new`] that has not
 * been freed.
 */
void rk_pair_model_free(struct RkPairModel *model);

/**
 * Sets the mean Zeeman frequency, the Zeeman difference and the exchange
 * coupling, all in rad/s.
 *
 * # Safety
 * `model` must be a live handle.
 */
enum RkStatus rk_pair_model_set_hamiltonian(struct RkPairModel *model,
                                            double omega_mean,
                                            double delta_omega,
                                            double j_exchange);

/**
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum RkStatus rk_pair_rate_elements(const struct RkPairModel *model, struct RkRateElements *out);

/**
 * Singlet and triplet recombination yields from the given initial state.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum RkStatus rk_pair_yields(const struct RkPairModel *model,
                             uint32_t initial,
                             struct RkYields *out);

/**
 * Fitted decay rate of the S-T0 coherence, and the relative fit residual.
 *
 * # Safety
 * `model` must be a live handle; `rate` and `residual` valid pointers.
 */
enum RkStatus rk_pair_coherence_rate(const struct RkPairModel *model,
                                     double *rate,
                                     double *residual);

/**
 * Propagates from `initial` and writes the four populations (S, T+, T0,
 * T-) at each of the `n_times` times, row by row, into `populations`.
 * `capacity` is the length of `populations` in doubles.
 *
 * # Safety
 * `times` must point to `n_times` readable doubles and `populations` to
 * `capacity` writable doubles.
 */
enum RkStatus rk_pair_propagate(const struct RkPairModel *model,
                                uint32_t initial,
                                const double *times,
                                size_t n_times,
                                double *populations,
                                size_t capacity);

/**
 * Closed-form three-state rates for a Lorentzian transverse bath.
 * Pass `INFINITY` as `beta_s` for the zero-temperature limit.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum RkStatus rk_three_state_rates(double omega0,
                                   double omega_s,
                                   double beta_s,
                                   double amplitude,
                                   double tau_c,
                                   struct RkThreeStateRates *out);

/**
 * Dephasing radius in cm for contact distance `d_cm`, diffusion
 * coefficient `diffusion_cm2_per_s`, exchange decay `alpha_per_cm` and
 * exchange amplitude `j0_per_s`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum RkStatus rk_dephasing_radius(double d_cm,
                                  double diffusion_cm2_per_s,
                                  double alpha_per_cm,
                                  double j0_per_s,
                                  double *out);

/**
 * Yield sensitivity to the radius gap `delta_l_cm`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum RkStatus rk_yield_sensitivity(double q_per_s,
                                   double delta_l_cm,
                                   double diffusion_cm2_per_s,
                                   double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RELAXKIN_H */
