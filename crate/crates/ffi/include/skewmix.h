#ifndef SKEWMIX_H
#define SKEWMIX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SKM_KERNEL_GAUSSIAN 0

#define SKM_KERNEL_SKEW_NORMAL 1

#define SKM_ROUNDING_COUNT 0

#define SKM_ROUNDING_FLOOR 1

typedef enum SkmStatus {
  SKM_STATUS_OK = 0,
  SKM_STATUS_NULL_POINTER = 1,
  SKM_STATUS_INVALID_ARGUMENT = 2,
  SKM_STATUS_INVALID_DATA = 3,
  /*
   A Rust panic was caught at the boundary; the message is kept.
   */
  SKM_STATUS_PANIC = 4,
} SkmStatus;

/*
 A fitted mixture.
 */
typedef struct SkmFit SkmFit;

/*
 Chain settings. Fill with [`skm_chain_options_default`] and change what
 is needed. The prior is centred on the data; the Gaussian kernel uses
 `a = b = 1` for the precision prior.
 */
typedef struct SkmChainOptions {
  /*
   `SKM_KERNEL_GAUSSIAN` or `SKM_KERNEL_SKEW_NORMAL`.
   */
  uint32_t kernel;
  /*
   Total sweeps, burn-in included.
   */
  size_t iters;
  size_t burn_in;
  size_t thin;
  uint64_t seed;
  size_t h_max;
  /*
   Gamma prior on the concentration, shape and rate.
   */
  double a_alpha;
  double b_alpha;
} SkmChainOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread, or an empty string. Valid
 until the next call into this library on the same thread.
 */
const char *skm_last_error(void);

/*
 # Safety
 `out` must be null or point to writable options.
 */
enum SkmStatus skm_chain_options_default(struct SkmChainOptions *out);

/*
 Owen's T function T(h, a).
 */
double skm_owens_t(double h, double a);

/*
 Density of SN(ξ, ω, λ) at `x`.

 # Safety
 `out` must be null or point to a writable double.
 */
enum SkmStatus skm_sn_pdf(double xi, double omega, double lambda, double x, double *out);

/*
 # Safety
 `out` must be null or point to a writable double.
 */
enum SkmStatus skm_sn_cdf(double xi, double omega, double lambda, double x, double *out);

/*
 Quantile at level `u` in (0, 1).

 # Safety
 `out` must be null or point to a writable double.
 */
enum SkmStatus skm_sn_quantile(double xi, double omega, double lambda, double u, double *out);

/*
 The bundled galaxy velocities (1000 km/s); stores their count in `len`.

 # Safety
 `len` must be null or point to a writable size.
 */
const double *skm_galaxy_velocities(size_t *len);

/*
 Fits a density to `n` reals. On success `*out` owns a new fit.

 # Safety
 `data` must point to `n` doubles, `options` to valid options, and `out`
 to a writable handle pointer.
 */
enum SkmStatus skm_fit_density(const double *data,
                               size_t n,
                               const struct SkmChainOptions *options,
                               struct SkmFit **out);

/*
 Fits a pmf to `n` counts with `SKM_ROUNDING_COUNT` or
 `SKM_ROUNDING_FLOOR` thresholds.

 # Safety
 As for [`skm_fit_density`], with `data` pointing to `n` counts.
 */
enum SkmStatus skm_fit_pmf(const uint64_t *data,
                           size_t n,
                           uint32_t rounding,
                           const struct SkmChainOptions *options,
                           struct SkmFit **out);

/*
 Releases a fit. Null is ignored.

 # Safety
 `fit` must be null or a handle from this library not yet freed.
 */
void skm_fit_free(struct SkmFit *fit);

/*
 # Safety
 `fit` must be a live handle and `out` writable.
 */
enum SkmStatus skm_fit_draw_count(const struct SkmFit *fit, size_t *out);

/*
 Posterior mean number of occupied components.

 # Safety
 `fit` must be a live handle and `out` writable.
 */
enum SkmStatus skm_fit_mean_occupied(const struct SkmFit *fit, double *out);

/*
 Posterior mean of the concentration parameter.

 # Safety
 `fit` must be a live handle and `out` writable.
 */
enum SkmStatus skm_fit_mean_alpha(const struct SkmFit *fit, double *out);

/*
 Posterior mean density at `m` points of a density fit.

 # Safety
 `fit` must be a live handle, `x` must point to `m` doubles and `out` to
 room for `m` doubles.
 */
enum SkmStatus skm_fit_density_eval(const struct SkmFit *fit,
                                    const double *x,
                                    size_t m,
                                    double *out);

/*
 Posterior mean pmf at `0..=j_max` of a pmf fit.

 # Safety
 `fit` must be a live handle and `out` must have room for `j_max + 1`
 doubles.
 */
enum SkmStatus skm_fit_pmf_eval(const struct SkmFit *fit, uint64_t j_max, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKEWMIX_H */
