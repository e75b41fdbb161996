#ifndef GERMLAB_H
#define GERMLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum GermlabStatus {
  GERMLAB_STATUS_OK = 0,
  GERMLAB_STATUS_NULL_POINTER = 1,
  GERMLAB_STATUS_INVALID_UTF8 = 2,
  GERMLAB_STATUS_INVALID_ARGUMENT = 3,
  GERMLAB_STATUS_DOMAIN = 4,
  GERMLAB_STATUS_PARSE = 5,
  GERMLAB_STATUS_MISSING = 6,
  GERMLAB_STATUS_DIMENSION_MISMATCH = 7,
  GERMLAB_STATUS_CONSTANT_TERM = 8,
  GERMLAB_STATUS_NOT_TANGENT_TO_IDENTITY = 9,
  GERMLAB_STATUS_RESONANT = 10,
  GERMLAB_STATUS_PRECISION_FLOOR = 11,
  GERMLAB_STATUS_INSUFFICIENT_DEPTH = 12,
  GERMLAB_STATUS_DEPTH_OVERFLOW = 13,
  GERMLAB_STATUS_DEGENERATE_FIT = 14,
  GERMLAB_STATUS_NUMERIC = 15,
  GERMLAB_STATUS_PANIC = 16,
} GermlabStatus;

/**
 * Continued fraction with exact convergent denominators.
 */
typedef struct GermlabCf GermlabCf;

/**
 * Germ `F(z) = A z + f(z)` with its domain radius.
 */
typedef struct GermlabGerm GermlabGerm;

/**
 * Truncated power series map `C^n -> C^n`.
 */
typedef struct GermlabSeries GermlabSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *germlab_version(void);

/**
 * Stable name of a status code, e.g. `"resonant"`.
 */
const char *germlab_status_name(enum GermlabStatus status);

/**
 * Message of the last failed call on this thread, or NULL. The caller owns
 * the returned string.
 */
char *germlab_last_error(void);

/**
 * # Safety
 * `s` must come from this library and must not be used afterwards.
 */
void germlab_string_free(char *s);

/**
 * Parse a series document `{n, N, terms}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum GermlabStatus germlab_series_from_json(const char *json,
                                            uint32_t precision_bits,
                                            struct GermlabSeries **out);

/**
 * # Safety
 * `series` must be a live handle; `out` must be writable.
 */
enum GermlabStatus germlab_series_to_json(const struct GermlabSeries *series, char **out);

/**
 * # Safety
 * `series` must be NULL or a handle not used afterwards.
 */
void germlab_series_free(struct GermlabSeries *series);

/**
 * Number of variables, or 0 for NULL.
 *
 * # Safety
 * `series` must be NULL or a live handle.
 */
size_t germlab_series_dim(const struct GermlabSeries *series);

/**
 * Truncation order, or 0 for NULL.
 *
 * # Safety
 * `series` must be NULL or a live handle.
 */
uint32_t germlab_series_order(const struct GermlabSeries *series);

/**
 * `outer o inner` truncated at `order`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum GermlabStatus germlab_series_compose(const struct GermlabSeries *outer,
                                          const struct GermlabSeries *inner,
                                          uint32_t order,
                                          struct GermlabSeries **out);

/**
 * Evaluate at `z`, given as `dim` interleaved (re, im) pairs; writes the
 * same layout to `out`.
 *
 * # Safety
 * `z` and `out` must each hold `2 * dim` doubles.
 */
enum GermlabStatus germlab_series_evaluate(const struct GermlabSeries *series,
                                           const double *z,
                                           double *out);

/**
 * Parse a germ document. `precision_bits` of 0 keeps the file's precision
 * (53 bits when absent).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum GermlabStatus germlab_germ_from_json(const char *json,
                                          uint32_t precision_bits,
                                          struct GermlabGerm **out);

/**
 * # Safety
 * `germ` must be NULL or a handle not used afterwards.
 */
void germlab_germ_free(struct GermlabGerm *germ);

/**
 * # Safety
 * `germ` must be NULL or a live handle.
 */
size_t germlab_germ_dim(const struct GermlabGerm *germ);

/**
 * Solve the conjugacy equation. `inverse = false` gives `F o H = H o R_A`,
 * `inverse = true` gives `H o F = R_A o H`. `min_divisor` may be NULL.
 *
 * # Safety
 * `germ` must be live; `out` writable; `min_divisor` NULL or writable.
 */
enum GermlabStatus germlab_linearize(const struct GermlabGerm *germ,
                                     uint32_t order,
                                     bool inverse,
                                     struct GermlabSeries **out,
                                     double *min_divisor);

/**
 * `Omega(p)` for the germ's multipliers.
 *
 * # Safety
 * `germ` must be live; `out` writable.
 */
enum GermlabStatus germlab_omega(const struct GermlabGerm *germ, uint32_t p, double *out);

/**
 * Sup norms of `H_N o F - R_A o H_N` at `radius`, where `h` solves the
 * inverse equation and is truncated at `order`.
 *
 * # Safety
 * Handles must be live; outputs writable.
 */
enum GermlabStatus germlab_remainder_sup(const struct GermlabGerm *germ,
                                         const struct GermlabSeries *h,
                                         uint32_t order,
                                         double radius,
                                         size_t samples,
                                         double *sup_grid,
                                         double *sup_coeffsum);

/**
 * First `m` with `|F^m(z0)| > escape_radius`, or -1 if none within
 * `max_iter`. `z0` holds `dim` interleaved (re, im) pairs.
 *
 * # Safety
 * `germ` must be live; `z0` must hold `2 * dim` doubles; `out` writable.
 */
enum GermlabStatus germlab_escape_time(const struct GermlabGerm *germ,
                                       const double *z0,
                                       uint64_t max_iter,
                                       double escape_radius,
                                       uint32_t precision_bits,
                                       int64_t *out);

/**
 * Continued fraction `[a_0; a_1, ...]` from `len >= 3` quotients.
 *
 * # Safety
 * `quotients` must hold `len` values; `out` writable.
 */
enum GermlabStatus germlab_cf_from_quotients(const uint64_t *quotients,
                                             size_t len,
                                             uint32_t precision_bits,
                                             struct GermlabCf **out);

/**
 * Golden mean with `depth` quotients after `a_0`.
 *
 * # Safety
 * `out` must be writable.
 */
enum GermlabStatus germlab_cf_golden(size_t depth, uint32_t precision_bits, struct GermlabCf **out);

/**
 * Factorial-growth quotients `a_{k+1} = round(q_k!^s / q_k)`. Stops early
 * once magnitudes leave the representable range; `reached` (may be NULL)
 * receives the depth actually built.
 *
 * # Safety
 * `out` writable; `reached` NULL or writable.
 */
enum GermlabStatus germlab_cf_factorial_growth(double s,
                                               size_t depth,
                                               uint64_t q1,
                                               uint32_t precision_bits,
                                               struct GermlabCf **out,
                                               size_t *reached);

/**
 * # Safety
 * `cf` must be NULL or a handle not used afterwards.
 */
void germlab_cf_free(struct GermlabCf *cf);

/**
 * # Safety
 * `cf` must be NULL or a live handle.
 */
size_t germlab_cf_depth(const struct GermlabCf *cf);

/**
 * `sum_{j<=k} ln q_{j+1} / q_j`.
 *
 * # Safety
 * `cf` must be live; `out` writable.
 */
enum GermlabStatus germlab_cf_bruno_partial_sum(const struct GermlabCf *cf, size_t k, double *out);

/**
 * `beta_k`; `k = -1` gives `beta_{-1} = 1`.
 *
 * # Safety
 * `cf` must be live; `out` writable.
 */
enum GermlabStatus germlab_cf_beta(const struct GermlabCf *cf, int64_t k, double *out);

/**
 * Diagnostic record of `kind` (`btilde_s`, `bprime_s`, `bgammasigma`,
 * `perez_marco`) as JSON. The caller owns `out`.
 *
 * # Safety
 * `cf` live; `kind` NUL-terminated; `out` writable.
 */
enum GermlabStatus germlab_cf_condition_json(const struct GermlabCf *cf,
                                             const char *kind,
                                             double s,
                                             char **out);

/**
 * Optimal truncation order `N = floor(B4 (r_star / |z|)^{1/s})`, at least 2.
 * `clamped` (may be NULL) is set when the floor fell below 2.
 *
 * # Safety
 * `n_bar` writable; `clamped` NULL or writable.
 */
enum GermlabStatus germlab_optimal_truncation(double r_star,
                                              double z_abs,
                                              double s,
                                              double b4,
                                              uint32_t *n_bar,
                                              bool *clamped);

/**
 * `K = floor(R/a exp(b/(2R)^alpha))`, saturating at `UINT64_MAX`.
 *
 * # Safety
 * `out` writable.
 */
enum GermlabStatus germlab_lemma_horizon(double r, double a, double b, double alpha, uint64_t *out);

/**
 * `ln K*` with `K* = A**^{-1} exp(B** (r** / |z0|)^{1/s})`.
 *
 * # Safety
 * `ln_k` writable.
 */
enum GermlabStatus germlab_stability_ln_horizon(double a_double_star,
                                                double b_double_star,
                                                double r_double_star,
                                                double s,
                                                double z0_abs,
                                                double *ln_k);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GERMLAB_H */
