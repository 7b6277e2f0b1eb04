#ifndef HELLINGER_H
#define HELLINGER_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status returned by every fallible call.
 */
typedef enum HlStatus {
  HL_STATUS_OK = 0,
  HL_STATUS_NULL_POINTER = 1,
  HL_STATUS_INVALID_ARGUMENT = 2,
  HL_STATUS_NOT_POSITIVE_DEFINITE = 3,
  HL_STATUS_DIMENSION_MISMATCH = 4,
  /**
   * The barycentre solver stopped at `max_iter`; the output holds the last iterate.
   */
  HL_STATUS_NOT_CONVERGED = 5,
  HL_STATUS_NUMERICAL_FAILURE = 6,
  HL_STATUS_PANIC = 7,
} HlStatus;

typedef enum HlDistanceKind {
  HL_DISTANCE_KIND_D1 = 1,
  HL_DISTANCE_KIND_D2 = 2,
  HL_DISTANCE_KIND_D3 = 3,
  HL_DISTANCE_KIND_D4 = 4,
} HlDistanceKind;

typedef enum HlMeanKind {
  HL_MEAN_KIND_ARITHMETIC = 0,
  /**
   * Two matrices only; uses the `t` argument (`½` gives `A#B`).
   */
  HL_MEAN_KIND_GEOMETRIC = 1,
  HL_MEAN_KIND_LOG_EUCLIDEAN = 2,
  HL_MEAN_KIND_Q_HALF = 3,
} HlMeanKind;

typedef enum HlBarycentreKind {
  HL_BARYCENTRE_KIND_WASSERSTEIN = 0,
  /**
   * Uses the `t` argument, `0 < t < 1`.
   */
  HL_BARYCENTRE_KIND_POWER_T = 1,
  HL_BARYCENTRE_KIND_LOG_EUCLID_TYPE = 2,
} HlBarycentreKind;

/**
 * Opaque positive definite matrix.
 */
typedef struct HlSpd HlSpd;

typedef struct HlSolverConfig {
  double tol;
  size_t max_iter;
  double damping;
} HlSolverConfig;

typedef struct HlSolverReport {
  size_t iterations;
  double final_residual;
  bool converged;
  bool bracket_respected;
  double final_damping;
  /**
   * Smallest eigenvalue over all iterates.
   */
  double iterate_min;
  /**
   * Largest eigenvalue over all iterates.
   */
  double iterate_max;
} HlSolverReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hl_version(void);

/**
 * Message for the last failed call on this thread, or NULL after a success.
 * The pointer stays valid until the next `hl_*` call on the same thread.
 */
const char *hl_last_error(void);

struct HlSolverConfig hl_solver_config_default(void);

/**
 * Build a positive definite matrix from row-major parts. `imag` may be NULL
 * for a real symmetric matrix.
 *
 * # Safety
 * `real` (and `imag` when not NULL) must point to `dim * dim` doubles and
 * `out` must be writable.
 */
enum HlStatus hl_spd_new(size_t dim, const double *real, const double *imag, struct HlSpd **out);

/**
 * Release a handle. NULL is ignored.
 *
 * # Safety
 * `m` must come from this library and not have been freed.
 */
void hl_spd_free(struct HlSpd *m);

/**
 * Dimension of `m`, or 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or a live handle.
 */
size_t hl_spd_dim(const struct HlSpd *m);

/**
 * Copy the entries of `m` into row-major buffers. `imag` may be NULL.
 *
 * # Safety
 * `m` must be a live handle; `real` (and `imag` when not NULL) must have
 * room for `dim * dim` doubles.
 */
enum HlStatus hl_spd_entries(const struct HlSpd *m, double *real, double *imag);

/**
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
enum HlStatus hl_spd_clone(const struct HlSpd *m, struct HlSpd **out);

/**
 * # Safety
 * `a`, `b` must be live handles and `out` writable.
 */
enum HlStatus hl_distance(enum HlDistanceKind kind,
                          const struct HlSpd *a,
                          const struct HlSpd *b,
                          double *out);

/**
 * Squared distance `Φ_k(A, B)`.
 *
 * # Safety
 * `a`, `b` must be live handles and `out` writable.
 */
enum HlStatus hl_divergence(enum HlDistanceKind kind,
                            const struct HlSpd *a,
                            const struct HlSpd *b,
                            double *out);

/**
 * Umegaki relative entropy `tr A(log A - log B)`.
 *
 * # Safety
 * `a`, `b` must be live handles and `out` writable.
 */
enum HlStatus hl_relative_entropy(const struct HlSpd *a, const struct HlSpd *b, double *out);

/**
 * Weighted mean of `count` matrices. `weights` may be NULL for uniform
 * weights; they are normalized. `t` is only read for `Geometric`.
 *
 * # Safety
 * `mats` must hold `count` live handles, `weights` (when not NULL) `count`
 * doubles, and `out` must be writable.
 */
enum HlStatus hl_mean(enum HlMeanKind kind,
                      const struct HlSpd *const *mats,
                      size_t count,
                      const double *weights,
                      double t,
                      struct HlSpd **out);

/**
 * Barycentre by damped fixed-point iteration from the arithmetic mean.
 * `config` and `report` may be NULL. Returns `NotConverged` with `*out` set
 * to the last iterate when `max_iter` is reached.
 *
 * # Safety
 * Pointer requirements as for [`hl_mean`]; `config` and `report`, when not
 * NULL, must point to valid structs.
 */
enum HlStatus hl_barycentre(enum HlBarycentreKind kind,
                            double t,
                            const struct HlSpd *const *mats,
                            size_t count,
                            const double *weights,
                            const struct HlSolverConfig *config,
                            struct HlSpd **out,
                            struct HlSolverReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HELLINGER_H */
