#ifndef DTC_H
#define DTC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes; zero is success.
 */
typedef enum DtcStatus {
  DTC_STATUS_OK = 0,
  DTC_STATUS_NULL_POINTER = -1,
  DTC_STATUS_INVALID_ARGUMENT = -2,
  DTC_STATUS_SIZE_MISMATCH = -3,
  DTC_STATUS_IO = -4,
  DTC_STATUS_PLAN = -5,
  DTC_STATUS_NO_COPY = -6,
  DTC_STATUS_PANIC = -7,
} DtcStatus;

/**
 * Effective-field evaluation strategy.
 */
typedef enum DtcFieldPath {
  /**
   * Direct taps for nearest-neighbour kernels, FFT otherwise.
   */
  DTC_FIELD_PATH_AUTO = 0,
  DTC_FIELD_PATH_FFT = 1,
  DTC_FIELD_PATH_DIRECT = 2,
} DtcFieldPath;

/**
 * Opaque simulation handle.
 */
typedef struct DtcSystem DtcSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next `dtc_*` call on the same thread.
 */
const char *dtc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *dtc_version(void);

/**
 * Kac normalization `N_α` of a `D`-dimensional torus of side `L`.
 * Pass `INFINITY` for nearest-neighbour coupling.
 */
enum DtcStatus dtc_kac_normalization(uint32_t dim, uint32_t len, double alpha, double *out);

/**
 * Creates a system polarized along `+z` with drive period `period`.
 * `alpha` may be `INFINITY`. Free with `dtc_system_free`.
 */
enum DtcStatus dtc_system_new(uint32_t dim,
                              uint32_t len,
                              double alpha,
                              double period,
                              double g,
                              double h,
                              enum DtcFieldPath field_path,
                              struct DtcSystem **out);

/**
 * Releases a system; null is ignored.
 */
void dtc_system_free(struct DtcSystem *sys);

size_t dtc_system_n_sites(const struct DtcSystem *sys);

/**
 * Stroboscopic periods evolved since creation.
 */
uint64_t dtc_system_period(const struct DtcSystem *sys);

/**
 * Replaces the state by the noisy polarized ensemble draw for
 * (`seed`, `realization`) and drops any perturbed copy.
 */
enum DtcStatus dtc_system_init_noisy(struct DtcSystem *sys,
                                     double w,
                                     uint64_t seed,
                                     uint64_t realization);

/**
 * Adds (or replaces) a twin copy perturbed by `delta` from the current
 * primary state; it evolves alongside the primary.
 */
enum DtcStatus dtc_system_add_copy(struct DtcSystem *sys,
                                   double delta,
                                   uint64_t seed,
                                   uint64_t realization);

/**
 * Advances by `n_periods` stroboscopic periods.
 */
enum DtcStatus dtc_system_step(struct DtcSystem *sys, uint64_t n_periods);

/**
 * Copies the primary spins into caller buffers of length `n`.
 */
enum DtcStatus dtc_system_get_spins(const struct DtcSystem *sys,
                                    double *sx,
                                    double *sy,
                                    double *sz,
                                    size_t n);

/**
 * Copies the perturbed copy's spins; fails with `NoCopy` if there is none.
 */
enum DtcStatus dtc_system_get_copy_spins(const struct DtcSystem *sys,
                                         double *sx,
                                         double *sy,
                                         double *sz,
                                         size_t n);

/**
 * Overwrites the primary spins (the copy, if any, is kept). Each spin
 * must have unit norm to within `1e-9`.
 */
enum DtcStatus dtc_system_set_spins(struct DtcSystem *sys,
                                    const double *sx,
                                    const double *sy,
                                    const double *sz,
                                    size_t n);

/**
 * Mean `S^z` of the primary.
 */
enum DtcStatus dtc_system_magnetization(const struct DtcSystem *sys, double *out);

/**
 * Period-averaged energy per spin `H_T / N` of the primary.
 */
enum DtcStatus dtc_system_energy_period(const struct DtcSystem *sys, double *out);

/**
 * First-half energy per spin `H_1 / N` of the primary.
 */
enum DtcStatus dtc_system_energy_first_half(const struct DtcSystem *sys, double *out);

/**
 * Decorrelator between primary and copy.
 */
enum DtcStatus dtc_system_decorrelator(const struct DtcSystem *sys, double *out);

/**
 * Subharmonic order parameter `|m̃(−ω/n)| + |m̃(ω/n)|` of a magnetization
 * record `m[0..len]` sampled once per period; the whole record is the window.
 */
enum DtcStatus dtc_order_parameter(const double *m, size_t len, uint32_t n, double *out);

/**
 * Runs a JSON plan file and writes its tables to `out_dir`.
 * `threads = 0` uses the default worker pool.
 */
enum DtcStatus dtc_run_plan_file(const char *plan_path, const char *out_dir, uint32_t threads);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DTC_H */
