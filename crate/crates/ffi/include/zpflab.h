#ifndef ZPFLAB_H
#define ZPFLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ZpfStatus {
  ZPF_STATUS_OK = 0,
  ZPF_STATUS_NULL_POINTER = 1,
  ZPF_STATUS_INVALID_UTF8 = 2,
  /**
   * Arguments outside the operation's domain (dimensions, levels, phases).
   */
  ZPF_STATUS_INVALID_ARGUMENT = 3,
  /**
   * A numerical precondition failed (non-Hermitian input, vanishing state).
   */
  ZPF_STATUS_NUMERICAL = 4,
  ZPF_STATUS_CONFIG = 5,
  ZPF_STATUS_IO = 6,
  ZPF_STATUS_PANIC = 7,
} ZpfStatus;

/**
 * Response matrix handle.
 */
typedef struct ZpfMatrix ZpfMatrix;

/**
 * Level system handle.
 */
typedef struct ZpfSystem ZpfSystem;

/**
 * Monte Carlo covariance summary.
 */
typedef struct ZpfMcReport {
  double estimate;
  double standard_error;
  double analytic;
  double quantum;
  double z_score;
  uint64_t samples;
} ZpfMcReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread; do not free.
 */
const char *zpf_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void zpf_string_free(char *s);

/**
 * Truncated harmonic oscillator: system and position matrix.
 *
 * # Safety
 * `out_system` and `out_x` must be valid for writes.
 */
enum ZpfStatus zpf_oscillator_new(uintptr_t dim,
                                  double mass,
                                  double omega0,
                                  double hbar,
                                  struct ZpfSystem **out_system,
                                  struct ZpfMatrix **out_x);

/**
 * Level system from `dim` energies.
 *
 * # Safety
 * `energies` must point to `dim` doubles; `out` must be valid for writes.
 */
enum ZpfStatus zpf_system_new(const double *energies,
                              uintptr_t dim,
                              double mass,
                              double hbar,
                              struct ZpfSystem **out);

/**
 * # Safety
 * `system` must come from this library and not have been freed. Null is ignored.
 */
void zpf_system_free(struct ZpfSystem *system);

/**
 * # Safety
 * `system` must be a live handle; `out` must be valid for writes.
 */
enum ZpfStatus zpf_system_dim(const struct ZpfSystem *system, uintptr_t *out);

/**
 * Hermitian matrix from row-major real and imaginary parts. `im` may be
 * null for a real matrix.
 *
 * # Safety
 * `re` (and `im` when non-null) must point to `dim * dim` doubles.
 */
enum ZpfStatus zpf_matrix_new(uintptr_t dim,
                              const double *re,
                              const double *im,
                              struct ZpfMatrix **out);

/**
 * # Safety
 * `matrix` must come from this library and not have been freed. Null is ignored.
 */
void zpf_matrix_free(struct ZpfMatrix *matrix);

/**
 * `2m/ħ² Σ_k (E_k - E_n)|x_nk|²` at level `n`.
 *
 * # Safety
 * Handles must be live; `out` must be valid for writes.
 */
enum ZpfStatus zpf_trk_sum(const struct ZpfSystem *system,
                           const struct ZpfMatrix *x,
                           uintptr_t n,
                           double *out);

/**
 * Largest entrywise deviation of `[x, p]` from `iħ·1` on the block that
 * excludes the top level.
 *
 * # Safety
 * Handles must be live; `out` must be valid for writes.
 */
enum ZpfStatus zpf_commutator_deviation(const struct ZpfSystem *system,
                                        const struct ZpfMatrix *x,
                                        double *out);

/**
 * Field-induced covariance of `f` on particle 1 and `g` on particle 2 with
 * levels `n != m`. `zeta_half_units` is `2ζ` and must be even.
 *
 * # Safety
 * Handles must be live; `out` must be valid for writes.
 */
enum ZpfStatus zpf_analytic_covariance(const struct ZpfMatrix *f,
                                       const struct ZpfMatrix *g,
                                       uintptr_t n,
                                       uintptr_t m,
                                       int64_t zeta_half_units,
                                       double *out);

/**
 * Covariance of `f ⊗ g` in the entangled energy state of levels `n`, `m`.
 *
 * # Safety
 * Handles must be live; `out` must be valid for writes.
 */
enum ZpfStatus zpf_quantum_covariance(const struct ZpfMatrix *f,
                                      const struct ZpfMatrix *g,
                                      uintptr_t n,
                                      uintptr_t m,
                                      int64_t zeta_half_units,
                                      double *out);

/**
 * Monte Carlo covariance over `samples` field realizations.
 *
 * # Safety
 * Handles must be live; `out` must be valid for writes.
 */
enum ZpfStatus zpf_mc_covariance(const struct ZpfSystem *system,
                                 const struct ZpfMatrix *f,
                                 const struct ZpfMatrix *g,
                                 uintptr_t n,
                                 uintptr_t m,
                                 int64_t zeta_half_units,
                                 uintptr_t samples,
                                 uint64_t seed,
                                 struct ZpfMcReport *out);

/**
 * `(-1)^ζ (-1)^{2γ}` with both arguments in half units.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum ZpfStatus zpf_exchange_factor(int64_t zeta_half_units, int64_t gamma_half_units, int32_t *out);

/**
 * Exclusion search for `k` labels in `-Υ..Υ`, as JSON.
 *
 * # Safety
 * `out` must be valid for writes; free the string with [`zpf_string_free`].
 */
enum ZpfStatus zpf_pauli_json(int64_t upsilon_half_units, uintptr_t k, char **out);

/**
 * Phase assignment for `count` members; `family` is 0 for B, 1 for F.
 *
 * # Safety
 * `out` must be valid for writes; free the string with [`zpf_string_free`].
 */
enum ZpfStatus zpf_phase_assignment_json(uint32_t family,
                                         int64_t upsilon_half_units,
                                         uintptr_t count,
                                         char **out);

/**
 * Runs a scenario config given as JSON text and returns the report JSON.
 * Matrix paths resolve against `base_dir`, or the working directory when
 * it is null. A failing check is not an error: inspect `"pass"`.
 *
 * # Safety
 * `config` (and `base_dir` when non-null) must be nul-terminated strings;
 * `out` must be valid for writes.
 */
enum ZpfStatus zpf_run_scenario_json(const char *config, const char *base_dir, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZPFLAB_H */
