#ifndef FRACUQ_H
#define FRACUQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum FracuqStatus {
  FRACUQ_STATUS_OK = 0,
  FRACUQ_STATUS_NULL_POINTER = 1,
  FRACUQ_STATUS_INVALID_ARGUMENT = 2,
  FRACUQ_STATUS_SOLVER_FAILURE = 3,
  FRACUQ_STATUS_BUFFER_TOO_SMALL = 4,
  FRACUQ_STATUS_PANIC = 5,
} FracuqStatus;

typedef enum FracuqMode {
  FRACUQ_MODE_TWO_SIDED = 0,
  FRACUQ_MODE_LEFT_ONLY = 1,
} FracuqMode;

typedef enum FracuqCase {
  FRACUQ_CASE_IVP_POWER = 0,
  FRACUQ_CASE_PDE_ONE_SIDED = 1,
} FracuqCase;

typedef enum FracuqMethod {
  FRACUQ_METHOD_FAST = 0,
  FRACUQ_METHOD_DIRECT = 1,
} FracuqMethod;

/**
 * A deterministic problem ready to assemble.
 */
typedef struct FracuqProblem FracuqProblem;

/**
 * Points (and weights, for collocation sets) in a random space.
 */
typedef struct FracuqSampleSet FracuqSampleSet;

/**
 * Spectral coefficients of a solved problem.
 */
typedef struct FracuqSolution FracuqSolution;

/**
 * Forcing `h(t, x)`; called concurrently, so it must be thread-safe.
 */
typedef double (*FracuqForcingFn)(double t, const double *x, size_t dims, void *user);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *fracuq_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fracuq_version(void);

/**
 * `m`-point Gauss-Jacobi rule for the weight `(1-x)^a (1+x)^b`; both output
 * arrays hold `m` values.
 */
enum FracuqStatus fracuq_gauss_jacobi(double a, double b, size_t m, double *nodes, double *weights);

/**
 * First `m` Karhunen-Loève coefficients `a_k` of the sine-Fourier noise model.
 */
enum FracuqStatus fracuq_kl_coefficients(double length, double correlation, size_t m, double *out);

/**
 * Problem `D_t^α u ± Σ k_j D^{β_j} u + γ u = h`.
 *
 * `intervals` holds `2·dims` values `a_1, b_1, …`; `betas`, `ks` and
 * `spatial_counts` hold `dims` values. `tau < 0` selects `α/2`.
 */
enum FracuqStatus fracuq_problem_new(double alpha,
                                     size_t dims,
                                     const double *betas,
                                     const double *ks,
                                     const double *intervals,
                                     double horizon,
                                     size_t temporal_count,
                                     const size_t *spatial_counts,
                                     double tau,
                                     double gamma,
                                     enum FracuqMode mode,
                                     FracuqForcingFn forcing,
                                     void *user,
                                     struct FracuqProblem **out);

/**
 * Manufactured problem with a closed-form solution. The one-sided case
 * lives on `[-1, 1]` and uses `beta`, `k` and `spatial_count`; the IVP
 * ignores them.
 */
enum FracuqStatus fracuq_problem_manufactured(enum FracuqCase case_,
                                              double alpha,
                                              double beta,
                                              double k,
                                              size_t temporal_count,
                                              size_t spatial_count,
                                              struct FracuqProblem **out);

void fracuq_problem_free(struct FracuqProblem *problem);

/**
 * Assembles and solves; `quadrature_boost` adds points to every rule.
 */
enum FracuqStatus fracuq_solve(const struct FracuqProblem *problem,
                               enum FracuqMethod method,
                               size_t quadrature_boost,
                               struct FracuqSolution **out);

/**
 * `u(t, x)` with `x` holding `dims` coordinates.
 */
enum FracuqStatus fracuq_solution_evaluate(const struct FracuqSolution *solution,
                                           double t,
                                           const double *x,
                                           size_t dims,
                                           double *value);

/**
 * Number of spectral coefficients (`N·Π M_j`).
 */
size_t fracuq_solution_len(const struct FracuqSolution *solution);

/**
 * Copies the coefficients (row-major, temporal index slowest).
 */
enum FracuqStatus fracuq_solution_coefficients(const struct FracuqSolution *solution,
                                               double *buf,
                                               size_t len);

void fracuq_solution_free(struct FracuqSolution *solution);

/**
 * Tensor Gauss-Legendre grid over the box `[lo_i, hi_i]` with `orders[i]` points per axis.
 */
enum FracuqStatus fracuq_grid_tensor(size_t dims,
                                     const double *lo,
                                     const double *hi,
                                     const size_t *orders,
                                     struct FracuqSampleSet **out);

/**
 * Smolyak sparse grid of level `w` over the box.
 */
enum FracuqStatus fracuq_grid_smolyak(size_t dims,
                                      const double *lo,
                                      const double *hi,
                                      size_t w,
                                      struct FracuqSampleSet **out);

/**
 * `count` uniform samples; reproducible for a given seed.
 */
enum FracuqStatus fracuq_grid_monte_carlo(size_t dims,
                                          const double *lo,
                                          const double *hi,
                                          size_t count,
                                          uint64_t seed,
                                          struct FracuqSampleSet **out);

size_t fracuq_sample_set_len(const struct FracuqSampleSet *set);

size_t fracuq_sample_set_dims(const struct FracuqSampleSet *set);

/**
 * Copies the points row by row (`len·dims` values).
 */
enum FracuqStatus fracuq_sample_set_points(const struct FracuqSampleSet *set,
                                           double *buf,
                                           size_t len);

/**
 * Copies the weights (`len` values); fails for unweighted Monte Carlo sets.
 */
enum FracuqStatus fracuq_sample_set_weights(const struct FracuqSampleSet *set,
                                            double *buf,
                                            size_t len);

void fracuq_sample_set_free(struct FracuqSampleSet *set);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACUQ_H */
