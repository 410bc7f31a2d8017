#ifndef RESPOLY_H
#define RESPOLY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. The first four match the exit codes of the CLI.
typedef enum RpStatus {
  RP_STATUS_OK = 0,
  RP_STATUS_INVALID_INPUT = 1,
  RP_STATUS_NUMERICAL = 2,
  RP_STATUS_INVARIANT = 3,
  RP_STATUS_NULL_POINTER = 4,
  // The output buffer is too short; the needed length was written.
  RP_STATUS_BUFFER_TOO_SMALL = 5,
  RP_STATUS_PANIC = 6,
} RpStatus;

// A set of intervals with a point `x0` off the set.
typedef struct RpProblem RpProblem;

// A solved residual polynomial.
typedef struct RpSolution RpSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next `rp_*` call on the same thread.
const char *rp_last_error(void);

// Library version as a static NUL-terminated string.
const char *rp_version(void);

// Builds a problem from `count` intervals given as `[lo0, hi0, lo1, hi1, ...]`.
//
// # Safety
// `intervals` must point to `2 * count` doubles and `out` must be writable.
enum RpStatus rp_problem_new(const double *intervals,
                             size_t count,
                             double x0,
                             struct RpProblem **out);

// Releases a problem. Null is ignored.
//
// # Safety
// `problem` must come from `rp_problem_new` and not be freed twice.
void rp_problem_free(struct RpProblem *problem);

// Number of intervals after merging overlaps.
//
// # Safety
// `problem` must be a live handle and `out` writable.
enum RpStatus rp_problem_components(const struct RpProblem *problem, size_t *out);

// Green's function of the set with pole at infinity, at `re + i·im`.
//
// # Safety
// `problem` must be a live handle and `out` writable.
enum RpStatus rp_problem_green(const struct RpProblem *problem, double re, double im, double *out);

// Logarithmic capacity of the set.
//
// # Safety
// `problem` must be a live handle and `out` writable.
enum RpStatus rp_problem_capacity(const struct RpProblem *problem, double *out);

// Parreau–Widom constant of the set for the pole `x0`.
//
// # Safety
// `problem` must be a live handle and `out` writable.
enum RpStatus rp_problem_pw(const struct RpProblem *problem, double *out);

// Solves for the residual polynomial of degree at most `n`.
//
// # Safety
// `problem` must be a live handle and `out` writable.
enum RpStatus rp_solve(const struct RpProblem *problem, size_t n, struct RpSolution **out);

// Releases a solution. Null is ignored.
//
// # Safety
// `solution` must come from `rp_solve` and not be freed twice.
void rp_solution_free(struct RpSolution *solution);

// Sup norm of the residual polynomial on the set.
//
// # Safety
// `solution` must be a live handle and `out` writable.
enum RpStatus rp_solution_norm(const struct RpSolution *solution, double *out);

// Effective degree, `n` or `n - 1`.
//
// # Safety
// `solution` must be a live handle and `out` writable.
enum RpStatus rp_solution_degree(const struct RpSolution *solution, size_t *out);

// Value of the residual polynomial at `x`.
//
// # Safety
// `solution` must be a live handle and `out` writable.
enum RpStatus rp_solution_eval(const struct RpSolution *solution, double x, double *out);

// Coefficients in the Chebyshev basis of the hull `[lo, hi]`, see
// `rp_solution_basis`. Writes the count to `len`; fails with
// `RP_STATUS_BUFFER_TOO_SMALL` when `cap` is short.
//
// # Safety
// `solution` must be a live handle, `buf` must hold `cap` doubles and `len`
// must be writable.
enum RpStatus rp_solution_coefficients(const struct RpSolution *solution,
                                       double *buf,
                                       size_t cap,
                                       size_t *len);

// Interval of the Chebyshev basis used by `rp_solution_coefficients`.
//
// # Safety
// `solution` must be a live handle, `lo` and `hi` writable.
enum RpStatus rp_solution_basis(const struct RpSolution *solution, double *lo, double *hi);

// Bands `{|R| ≤ r}` as `[lo0, hi0, lo1, hi1, ...]`; `len` receives the
// number of doubles.
//
// # Safety
// `solution` must be a live handle, `buf` must hold `cap` doubles and `len`
// must be writable.
enum RpStatus rp_solution_bands(const struct RpSolution *solution,
                                double *buf,
                                size_t cap,
                                size_t *len);

// Widom factor `W_n` of the solution.
//
// # Safety
// `solution` must be a live handle and `out` writable.
enum RpStatus rp_solution_widom(const struct RpSolution *solution, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RESPOLY_H */
