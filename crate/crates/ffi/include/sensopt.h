#ifndef SENSOPT_H
#define SENSOPT_H

#include <stddef.h>
#include <stdint.h>

typedef enum SoptStatus {
  SOPT_STATUS_OK = 0,
  SOPT_STATUS_NULL_POINTER = 1,
  SOPT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A point lies outside `[-1, 1]^d`.
   */
  SOPT_STATUS_DOMAIN = 3,
  /**
   * The objective returned NaN or infinity.
   */
  SOPT_STATUS_NON_FINITE = 4,
  /**
   * The input carries no information, e.g. a constant objective.
   */
  SOPT_STATUS_DEGENERATE = 5,
  SOPT_STATUS_INDEX_OUT_OF_RANGE = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  SOPT_STATUS_PANIC = 7,
} SoptStatus;

typedef enum SoptTermination {
  SOPT_TERMINATION_BUDGET = 0,
  SOPT_TERMINATION_MODEL_INCONSISTENT = 1,
} SoptTermination;

typedef enum SoptSolveStatus {
  SOPT_SOLVE_STATUS_OPTIMAL = 0,
  SOPT_SOLVE_STATUS_INFEASIBLE = 1,
  SOPT_SOLVE_STATUS_UNBOUNDED = 2,
  SOPT_SOLVE_STATUS_MAX_ITER = 3,
} SoptSolveStatus;

/**
 * List of Sobol constraints for a fixed dimension.
 */
typedef struct SoptConstraints SoptConstraints;

/**
 * Outcome of [`sopt_run`].
 */
typedef struct SoptRunResult SoptRunResult;

/**
 * Objective callback: `x` has `dim` entries in `[-1, 1]`.
 */
typedef double (*SoptObjective)(const double *x, size_t dim, void *user_data);

/**
 * Scalar results of [`sopt_qcqp_solve`].
 */
typedef struct SoptQcqpOutcome {
  enum SoptSolveStatus status;
  double value;
  double gap;
  double kkt_residual;
  size_t newton_steps;
} SoptQcqpOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *sopt_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sopt_version(void);

/**
 * Unit-variance Legendre polynomial of degree `n` at `x`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum SoptStatus sopt_psi(size_t n, double x, double *out);

/**
 * Empty constraint list for dimension `dim`; null on invalid `dim`.
 */
struct SoptConstraints *sopt_constraints_new(size_t dim);

/**
 * Constraints of experiment `tag` (`'A'` to `'D'`, dimension 3).
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum SoptStatus sopt_constraints_preset(char tag, struct SoptConstraints **out);

/**
 * Appends the constraint `sum_{u in family} S_u <= bound`. The family has
 * `n_sets` subsets; subset `k` has `set_lengths[k]` 1-based coordinates,
 * stored consecutively in `members`. A zero bound eliminates the family.
 *
 * # Safety
 * `h` must come from this library; `members` must hold the sum of
 * `set_lengths` entries and `set_lengths` must hold `n_sets` entries.
 */
enum SoptStatus sopt_constraints_add(struct SoptConstraints *h,
                                     const size_t *members,
                                     const size_t *set_lengths,
                                     size_t n_sets,
                                     double bound);

/**
 * Number of constraints in the list (0 for a null handle).
 *
 * # Safety
 * `h` must be null or come from this library.
 */
size_t sopt_constraints_len(const struct SoptConstraints *h);

/**
 * # Safety
 * `h` must be null or come from this library, and not be used afterwards.
 */
void sopt_constraints_free(struct SoptConstraints *h);

/**
 * Minimizes `f` over `[-1, 1]^dim` with `budget` certification solves.
 * `constraints` may be null for no constraints; otherwise its dimension must
 * equal `dim`.
 *
 * # Safety
 * `constraints` must be null or come from this library; `f` must be safe to
 * call with `user_data`; `out` must be valid for one write.
 */
enum SoptStatus sopt_run(size_t dim,
                         size_t degree,
                         size_t budget,
                         uint64_t seed,
                         const struct SoptConstraints *constraints,
                         SoptObjective f,
                         void *user_data,
                         struct SoptRunResult **out);

/**
 * # Safety
 * `r` must be null or come from [`sopt_run`].
 */
size_t sopt_result_n_eval(const struct SoptRunResult *r);

/**
 * Best objective value; NaN for a null handle.
 *
 * # Safety
 * `r` must be null or come from [`sopt_run`].
 */
double sopt_result_m_best(const struct SoptRunResult *r);

/**
 * # Safety
 * `r` must be null or come from [`sopt_run`].
 */
size_t sopt_result_solves_used(const struct SoptRunResult *r);

/**
 * # Safety
 * `r` must be null or come from [`sopt_run`].
 */
enum SoptTermination sopt_result_termination(const struct SoptRunResult *r);

/**
 * Copies evaluation `i` (0-based, in evaluation order) into `x_out`
 * (`x_len` entries, at least the dimension) and `y_out`.
 *
 * # Safety
 * `r` must come from [`sopt_run`]; `x_out` must be valid for `x_len` writes
 * and `y_out` for one.
 */
enum SoptStatus sopt_result_point(const struct SoptRunResult *r,
                                  size_t i,
                                  double *x_out,
                                  size_t x_len,
                                  double *y_out);

/**
 * # Safety
 * `r` must be null or come from [`sopt_run`], and not be used afterwards.
 */
void sopt_result_free(struct SoptRunResult *r);

/**
 * First-order and total Sobol indices of `f` by pick-freeze Monte Carlo
 * with `n_base` base samples; writes `dim` entries to each output.
 *
 * # Safety
 * `f` must be safe to call with `user_data`; `first_order` and `total` must
 * be valid for `dim` writes.
 */
enum SoptStatus sopt_sensitivity(SoptObjective f,
                                 void *user_data,
                                 size_t dim,
                                 size_t n_base,
                                 uint64_t seed,
                                 double *first_order,
                                 double *total);

/**
 * Minimizes `c.z` subject to `A z = b` (`A` is `m x n`, row-major) and
 * `n_balls` constraints `sum_{p in P_j} z_p^2 <= radii_sq[j]`. Ball `j` has
 * `ball_lengths[j]` 0-based positions stored consecutively in
 * `ball_positions`. `z_out` (`n` entries, may be null) receives the
 * minimizer when the status is optimal.
 *
 * # Safety
 * All arrays must hold the stated number of entries; `out` must be valid for
 * one write.
 */
enum SoptStatus sopt_qcqp_solve(size_t n,
                                const double *c,
                                size_t m,
                                const double *a,
                                const double *b,
                                size_t n_balls,
                                const size_t *ball_positions,
                                const size_t *ball_lengths,
                                const double *radii_sq,
                                double tol,
                                struct SoptQcqpOutcome *out,
                                double *z_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SENSOPT_H */
