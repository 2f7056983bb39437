#ifndef SONINE_H
#define SONINE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SnForm {
  SN_FORM_MARCHAUD = 0,
  SN_FORM_WEYL = 1,
} SnForm;

typedef enum SnMethod {
  SN_METHOD_SPECTRAL = 0,
  SN_METHOD_METHOD_OF_LINES = 1,
} SnMethod;

typedef enum SnStatus {
  SN_STATUS_OK = 0,
  SN_STATUS_NULL_POINTER = 1,
  SN_STATUS_INVALID_ARGUMENT = 2,
  SN_STATUS_DOMAIN = 3,
  SN_STATUS_NUMERICAL = 4,
  SN_STATUS_TAIL_POLICY = 5,
  SN_STATUS_CONFIG = 6,
  SN_STATUS_GROWTH_GUARD = 7,
  SN_STATUS_PANIC = 8,
} SnStatus;

typedef struct SnGridFunction SnGridFunction;

typedef struct SnPair SnPair;

typedef struct SnScale SnScale;

typedef struct SnTrace SnTrace;

typedef struct SnWeight SnWeight;

/**
 * Sample callback for [`sn_transmute`]: returns `u(t)`.
 */
typedef double (*SnSampleFn)(double t, void *user_data);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. The pointer stays valid
 * until the next failing call on the same thread; never NULL.
 */
const char *sn_last_error(void);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum SnStatus sn_scale_identity(struct SnScale **out);

/**
 * # Safety
 * As [`sn_scale_identity`].
 */
enum SnStatus sn_scale_affine(double a, double b, struct SnScale **out);

/**
 * # Safety
 * As [`sn_scale_identity`].
 */
enum SnStatus sn_scale_sinh(struct SnScale **out);

/**
 * # Safety
 * As [`sn_scale_identity`].
 */
enum SnStatus sn_scale_wobble(double eps, struct SnScale **out);

/**
 * # Safety
 * `scale` must be NULL or a handle from an `sn_scale_*` constructor, freed once.
 */
void sn_scale_free(struct SnScale *scale);

/**
 * `psi(t)`.
 *
 * # Safety
 * `scale` must be a live handle and `out` writable.
 */
enum SnStatus sn_scale_forward(const struct SnScale *scale, double t, double *out);

/**
 * `psi^-1(x)`.
 *
 * # Safety
 * As [`sn_scale_forward`].
 */
enum SnStatus sn_scale_inverse(const struct SnScale *scale, double x, double *out);

/**
 * # Safety
 * `scale` must be a live handle; `out` writable. The weight copies the scale.
 */
enum SnStatus sn_weight_constant(const struct SnScale *scale, struct SnWeight **out);

/**
 * `omega(t) = exp(beta psi(t))`.
 *
 * # Safety
 * As [`sn_weight_constant`].
 */
enum SnStatus sn_weight_exp(const struct SnScale *scale, double beta, struct SnWeight **out);

/**
 * `omega(t) = exp(-delta psi(t)^2 + beta psi(t))`.
 *
 * # Safety
 * As [`sn_weight_constant`].
 */
enum SnStatus sn_weight_gaussian(const struct SnScale *scale,
                                 double delta,
                                 double beta,
                                 struct SnWeight **out);

/**
 * # Safety
 * `weight` must be NULL or a handle from an `sn_weight_*` constructor, freed once.
 */
void sn_weight_free(struct SnWeight *weight);

/**
 * # Safety
 * `weight` must be a live handle and `out` writable.
 */
enum SnStatus sn_weight_value(const struct SnWeight *weight, double t, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum SnStatus sn_pair_power_law(double alpha, struct SnPair **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum SnStatus sn_pair_tempered(double alpha, double lambda, struct SnPair **out);

/**
 * Bessel pair; `growth` is the tag recorded for `k` (must be > 0).
 *
 * # Safety
 * `out` must be writable.
 */
enum SnStatus sn_pair_bessel(double alpha, double growth, struct SnPair **out);

/**
 * # Safety
 * `pair` must be NULL or a handle from an `sn_pair_*` constructor, freed once.
 */
void sn_pair_free(struct SnPair *pair);

/**
 * `k(s)`.
 *
 * # Safety
 * `pair` must be a live handle and `out` writable.
 */
enum SnStatus sn_pair_eval_k(const struct SnPair *pair, double s, double *out);

/**
 * `kappa(s)`.
 *
 * # Safety
 * As [`sn_pair_eval_k`].
 */
enum SnStatus sn_pair_eval_kappa(const struct SnPair *pair, double s, double *out);

/**
 * `|int_0^t k(t - s) kappa(s) ds - 1|`.
 *
 * # Safety
 * As [`sn_pair_eval_k`].
 */
enum SnStatus sn_pair_sonine_residual(const struct SnPair *pair, double t, double *out);

/**
 * Copies `n` samples on the uniform grid `[x_min, x_max]`.
 *
 * # Safety
 * `values` must point to `n` readable doubles; `out` writable.
 */
enum SnStatus sn_function_new(double x_min,
                              double x_max,
                              const double *values,
                              size_t n,
                              struct SnGridFunction **out);

/**
 * # Safety
 * `f` must be NULL or a handle returned by this library, freed once.
 */
void sn_function_free(struct SnGridFunction *f);

/**
 * Number of samples, or 0 for NULL.
 *
 * # Safety
 * `f` must be NULL or a live handle.
 */
size_t sn_function_len(const struct SnGridFunction *f);

/**
 * Copies the samples into `buf`, which must hold at least `len` doubles.
 *
 * # Safety
 * `f` must be a live handle and `buf` must point to `cap` writable doubles.
 */
enum SnStatus sn_function_values(const struct SnGridFunction *f, double *buf, size_t cap);

/**
 * Samples `v(x) = omega(t) u(t)`, `t = psi^-1(x)`, on `n` uniform nodes.
 *
 * # Safety
 * Handles must be live; `sample` must be safe to call with `user_data`.
 */
enum SnStatus sn_transmute(const struct SnScale *scale,
                           const struct SnWeight *weight,
                           double x_min,
                           double x_max,
                           size_t n,
                           SnSampleFn sample,
                           void *user_data,
                           struct SnGridFunction **out);

/**
 * Transmuted shift by `s >= 0`.
 *
 * # Safety
 * `f` must be a live handle; `out` writable.
 */
enum SnStatus sn_shift(const struct SnGridFunction *f, double s, struct SnGridFunction **out);

/**
 * Sonine integral `kappa * v`.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum SnStatus sn_integral(const struct SnPair *pair,
                          const struct SnGridFunction *f,
                          struct SnGridFunction **out);

/**
 * Weyl derivative `d/dx (k * v)`.
 *
 * # Safety
 * As [`sn_integral`].
 */
enum SnStatus sn_weyl(const struct SnPair *pair,
                      const struct SnGridFunction *f,
                      struct SnGridFunction **out);

/**
 * Marchaud derivative. `cutoff <= 0` integrates to infinity, which needs a
 * tail-integrable `k`.
 *
 * # Safety
 * As [`sn_integral`].
 */
enum SnStatus sn_marchaud(const struct SnPair *pair,
                          const struct SnGridFunction *f,
                          double cutoff,
                          struct SnGridFunction **out);

/**
 * Relative L2 error of `weyl(k)(integral(kappa) v)` against `v`.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum SnStatus sn_inversion_residual(const struct SnPair *pair,
                                    const struct SnGridFunction *f,
                                    double *out);

/**
 * Dissipative (`sigma = -1`) evolution of `u0` to `horizon`.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum SnStatus sn_evolve(const struct SnPair *pair,
                        const struct SnScale *scale,
                        const struct SnWeight *weight,
                        const struct SnGridFunction *u0,
                        double horizon,
                        double dt,
                        enum SnForm form,
                        enum SnMethod method,
                        struct SnTrace **out);

/**
 * # Safety
 * `trace` must be NULL or a handle from [`sn_evolve`], freed once.
 */
void sn_trace_free(struct SnTrace *trace);

/**
 * Number of sampled times, or 0 for NULL.
 *
 * # Safety
 * `trace` must be NULL or a live handle.
 */
size_t sn_trace_len(const struct SnTrace *trace);

/**
 * Copies `len` values of column `column` (0 tau, 1 l2, 2 h1, 3 sup, 4 envelope margin).
 *
 * # Safety
 * `trace` must be a live handle and `buf` must point to `cap` writable doubles.
 */
enum SnStatus sn_trace_column(const struct SnTrace *trace,
                              uint32_t column,
                              double *buf,
                              size_t cap);

/**
 * Copies the final state into a new function handle.
 *
 * # Safety
 * `trace` must be a live handle; `out` writable.
 */
enum SnStatus sn_trace_final(const struct SnTrace *trace, struct SnGridFunction **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SONINE_H */
