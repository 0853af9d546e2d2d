/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef DIVFX_H
#define DIVFX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  DIVFX_STATUS_OK = 0,
  DIVFX_STATUS_NULL_POINTER = 1,
  DIVFX_STATUS_INVALID_ARGUMENT = 2,
  DIVFX_STATUS_ILL_POSED = 3,
  DIVFX_STATUS_NEGATIVE_SURPLUS = 4,
  DIVFX_STATUS_UNSUPPORTED = 5,
  DIVFX_STATUS_NO_CONVERGENCE = 6,
  DIVFX_STATUS_PANIC = 7,
} DivfxStatus;

typedef enum {
  DIVFX_MODE_RESTRICTED = 0,
  DIVFX_MODE_UNRESTRICTED = 1,
} DivfxMode;

typedef enum {
  /**
   * The optimal strategy of the problem's payout mode.
   */
  DIVFX_STRATEGY_KIND_OPTIMAL = 0,
  DIVFX_STRATEGY_KIND_THRESHOLD_RATE = 1,
  DIVFX_STRATEGY_KIND_REFLECTION_BARRIER = 2,
  DIVFX_STRATEGY_KIND_CONSTANT_RATE = 3,
} DivfxStrategyKind;

/**
 * Opaque closed-form solution.
 */
typedef struct DivfxSolution DivfxSolution;

typedef struct {
  double height;
  double intensity;
} DivfxAtom;

typedef struct {
  double s2;
  double vartheta;
  double kappa;
} DivfxNig;

/**
 * Exchange-rate triplet. `atoms` may be null when `n_atoms` is 0; `nig` may
 * be null. With `driftless != 0`, `gamma` is ignored and set to the
 * small-jump compensator.
 */
typedef struct {
  double gaussian_variance;
  const DivfxAtom *atoms;
  size_t n_atoms;
  const DivfxNig *nig;
  double gamma;
  int32_t driftless;
} DivfxTriplet;

/**
 * Control problem before the exchange rate is folded in; `xi` is ignored in
 * unrestricted mode.
 */
typedef struct {
  double mu;
  double sigma;
  double delta;
  double xi;
  DivfxMode mode;
} DivfxProblem;

typedef struct {
  DivfxStrategyKind kind;
  double barrier;
  double rate;
} DivfxStrategy;

typedef struct {
  double dt;
  double tail_tol;
  size_t n_paths;
  uint64_t seed;
  int32_t antithetic;
  int32_t bridge_correction;
} DivfxSimConfig;

typedef struct {
  double mean;
  double std_error;
  size_t n;
  double truncation_bound;
  double horizon;
} DivfxEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for a status code; static storage.
 */
const char *divfx_status_message(DivfxStatus status);

/**
 * Detail of the last failure on this thread, empty after a success. Valid
 * until the next call into this library on the same thread.
 */
const char *divfx_last_error(void);

/**
 * Effective rate `β` for preference rate `delta`. `beta_out` receives
 * `-INFINITY` when the exponential moment diverges; `integrable_out` may be
 * null.
 *
 * # Safety
 * `fx` must point to a valid [`DivfxTriplet`]; out pointers must be valid
 * for writes.
 */
DivfxStatus divfx_beta(const DivfxTriplet *fx,
                       double delta,
                       double *beta_out,
                       int32_t *integrable_out);

/**
 * Closed-form solution for effective rate `beta` (`δ = β`).
 *
 * # Safety
 * `out` must be valid for writes. On success `*out` owns a handle that must
 * be released with [`divfx_solution_free`].
 */
DivfxStatus divfx_solution_new(double mu,
                               double sigma,
                               double beta,
                               double xi,
                               DivfxMode mode,
                               DivfxSolution **out);

/**
 * # Safety
 * `sol` must be null or a handle from [`divfx_solution_new`] not yet freed.
 */
void divfx_solution_free(DivfxSolution *sol);

/**
 * Optimal barrier (`x_r` or `x_u`; 0 when paying the maximum rate everywhere).
 *
 * # Safety
 * `sol` must be a live handle and `out` valid for writes.
 */
DivfxStatus divfx_solution_barrier(const DivfxSolution *sol, double *out);

/**
 * Value `F(x)` or `G(x)` and, if `derivative_out` is non-null, its slope.
 *
 * # Safety
 * `sol` must be a live handle; out pointers must be valid for writes.
 */
DivfxStatus divfx_solution_eval(const DivfxSolution *sol,
                                double x,
                                double *value_out,
                                double *derivative_out);

/**
 * Monte Carlo value of `strategy` (null for the optimal one) from surplus
 * `x0` and log exchange rate `l0`.
 *
 * # Safety
 * `problem`, `fx` and `cfg` must point to valid structs, `strategy` must be
 * null or valid, and `out` valid for writes.
 */
DivfxStatus divfx_simulate_value(const DivfxProblem *problem,
                                 const DivfxTriplet *fx,
                                 const DivfxStrategy *strategy,
                                 const DivfxSimConfig *cfg,
                                 double x0,
                                 double l0,
                                 DivfxEstimate *out);

/**
 * Default simulation settings.
 */
DivfxSimConfig divfx_sim_config_default(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIVFX_H */
