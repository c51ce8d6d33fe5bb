#ifndef MCRECON_H
#define MCRECON_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define MC_SCHEME_F1 0

#define MC_SCHEME_FH2 1

#define MC_SCHEME_FD2 2

#define MC_POST_NONE 0

#define MC_POST_DIRICHLET 1

#define MC_POST_OPTIMAL 2

#define MC_PENALTY_L1 0

#define MC_PENALTY_L2 1

typedef enum McStatus {
  MC_STATUS_OK = 0,
  MC_STATUS_NULL_POINTER = 1,
  MC_STATUS_INVALID_ARGUMENT = 2,
  MC_STATUS_SINGULAR_SCHEME = 3,
  MC_STATUS_SINGULAR_SYSTEM = 4,
  MC_STATUS_NON_FINITE = 5,
  MC_STATUS_BUFFER_TOO_SMALL = 6,
  MC_STATUS_PANIC = 7,
} McStatus;

typedef struct McKernel McKernel;

typedef struct McSamples McSamples;

typedef struct McSpectrum McSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *mc_last_error(void);

/**
 * Static, NUL-terminated name of a status code.
 */
const char *mc_status_name(enum McStatus status);

/**
 * Interpolation kernel for a named scheme on the band `n1 .. n1+ns-1`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum McStatus mc_kernel_new(uint32_t scheme_tag, int64_t n1, size_t ns, struct McKernel **out);

/**
 * Same as [`mc_kernel_new`] with the centered band `N1 = -((ns-1)/2)`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum McStatus mc_kernel_new_centered(uint32_t scheme_tag, size_t ns, struct McKernel **out);

/**
 * # Safety
 * `k` must be null or a handle from `mc_kernel_new*` not yet freed.
 */
void mc_kernel_free(struct McKernel *k);

/**
 * Writes `Ns`, `N1`, `M` and `L`; any output pointer may be null.
 *
 * # Safety
 * `k` must be a live kernel handle; non-null outputs must be writable.
 */
enum McStatus mc_kernel_shape(const struct McKernel *k,
                              size_t *ns,
                              int64_t *n1,
                              size_t *channels,
                              size_t *per_channel);

/**
 * Noise factor `(1/L) Σ_m Σ_n |r_m(n)|²` (EMSE = σ² × factor) and the
 * largest condition number of the channel matrices; outputs may be null.
 *
 * # Safety
 * `k` must be a live kernel handle; non-null outputs must be writable.
 */
enum McStatus mc_kernel_diagnostics(const struct McKernel *k,
                                    double *emse_factor_out,
                                    double *max_condition);

/**
 * Samples from `channels × per_channel` interleaved complex values, row by row.
 *
 * # Safety
 * `data` must hold `2·channels·per_channel` doubles; `out` must be writable.
 */
enum McStatus mc_samples_new(size_t channels,
                             size_t per_channel,
                             const double *data,
                             struct McSamples **out);

/**
 * Samples of `spectrum` through the kernel's channels at its `L` nodes,
 * with real Gaussian noise of deviation `sigma` drawn from `(seed, trial)`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum McStatus mc_samples_simulate(const struct McKernel *k,
                                  const struct McSpectrum *spectrum,
                                  double sigma,
                                  uint64_t seed,
                                  uint64_t trial,
                                  struct McSamples **out);

/**
 * Copies the samples out (interleaved, row by row).
 *
 * # Safety
 * `s` must be live; `out` must hold `2·capacity` doubles.
 */
enum McStatus mc_samples_values(const struct McSamples *s, double *out, size_t capacity);

/**
 * # Safety
 * `s` must be null or a handle from `mc_samples_*` not yet freed.
 */
void mc_samples_free(struct McSamples *s);

/**
 * Spectrum on `n_lo .. n_lo+len-1` from interleaved coefficients.
 *
 * # Safety
 * `data` must hold `2·len` doubles; `out` must be writable.
 */
enum McStatus mc_spectrum_new(int64_t n_lo,
                              size_t len,
                              const double *data,
                              struct McSpectrum **out);

/**
 * # Safety
 * `s` must be a live spectrum handle; outputs may be null.
 */
enum McStatus mc_spectrum_band(const struct McSpectrum *s, int64_t *n_lo, size_t *len);

/**
 * # Safety
 * `s` must be live; `out` must hold `2·capacity` doubles.
 */
enum McStatus mc_spectrum_coeffs(const struct McSpectrum *s, double *out, size_t capacity);

/**
 * Values at `t_k = 2πk/n_out`, `k = 0 … n_out-1`.
 *
 * # Safety
 * `s` must be live; `out` must hold `2·n_out` doubles.
 */
enum McStatus mc_spectrum_evaluate(const struct McSpectrum *s, size_t n_out, double *out);

/**
 * # Safety
 * `s` must be null or a handle from `mc_spectrum_new` / `mc_reconstruct*` not yet freed.
 */
void mc_spectrum_free(struct McSpectrum *s);

/**
 * Plain multichannel interpolation.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum McStatus mc_reconstruct(const struct McKernel *k,
                             const struct McSamples *s,
                             struct McSpectrum **out);

/**
 * Interpolation with the optional optimal pre-filter and a post-filter
 * (`MC_POST_*`) on the automatically selected band.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum McStatus mc_reconstruct_filtered(const struct McKernel *k,
                                      const struct McSamples *s,
                                      double sigma,
                                      bool pre_filter,
                                      uint32_t post_filter,
                                      struct McSpectrum **out);

/**
 * Weighted l1 (`MC_PENALTY_L1`, ADMM) or l2 regularized reconstruction on
 * the kernel's band with weights `1 + |n|^eta` and `kappa = alpha·sigma²`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum McStatus mc_reconstruct_regularized(const struct McKernel *k,
                                         const struct McSamples *s,
                                         double sigma,
                                         uint32_t penalty,
                                         double eta,
                                         double alpha,
                                         struct McSpectrum **out);

/**
 * Unbiased estimate of `|a(n)|²` over the kernel's band (`Ns` values).
 *
 * # Safety
 * Handles must be live; `out` must hold `capacity` doubles.
 */
enum McStatus mc_estimate_psd(const struct McKernel *k,
                              const struct McSamples *s,
                              double sigma,
                              double *out,
                              size_t capacity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MCRECON_H */
