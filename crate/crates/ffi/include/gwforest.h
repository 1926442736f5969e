#ifndef GWFOREST_H
#define GWFOREST_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GwNorm {
  GW_NORM_FROBENIUS = 0,
  GW_NORM_SPECTRAL = 1,
  GW_NORM_MAX = 2,
} GwNorm;

typedef enum GwComparison {
  GW_COMPARISON_LESS = 0,
  GW_COMPARISON_LESS_OR_EQUAL = 1,
} GwComparison;

// Result code of every fallible call.
typedef enum GwStatus {
  GW_STATUS_OK = 0,
  GW_STATUS_NULL_POINTER = 1,
  GW_STATUS_INVALID_ARGUMENT = 2,
  GW_STATUS_NOT_STOCHASTIC = 3,
  GW_STATUS_DIMENSION_MISMATCH = 4,
  GW_STATUS_NOT_REGULAR = 5,
  GW_STATUS_NO_CONVERGENCE = 6,
  GW_STATUS_BUFFER_TOO_SMALL = 7,
  GW_STATUS_PANIC = 99,
} GwStatus;

typedef enum GwConvention {
  GW_CONVENTION_FIRST_STEP_ODD = 0,
  GW_CONVENTION_FIRST_STEP_EVEN = 1,
} GwConvention;

typedef enum GwVariant {
  GW_VARIANT_BOTH = 0,
  GW_VARIANT_BRANCHING_ONLY = 1,
  GW_VARIANT_IMMIGRATION_ONLY = 2,
} GwVariant;

typedef enum GwMode {
  GW_MODE_FIXED_POINT = 0,
  GW_MODE_PERIOD2 = 1,
  GW_MODE_EXHAUSTED = 2,
} GwMode;

// Opaque dense square matrix.
typedef struct GwMatrix GwMatrix;

// Opaque result of an iteration run.
typedef struct GwReport GwReport;

// Stopping rule of an iteration run.
typedef struct GwCriterion {
  enum GwNorm norm;
  double epsilon;
  enum GwComparison comparison;
  size_t max_iterations;
  bool cycle_detection;
} GwCriterion;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or null.
//
// The pointer stays valid until the next failing call on the same thread.
const char *gw_last_error(void);

// Default criterion: Frobenius norm, epsilon 1e-8, strict comparison,
// 10000 iterations, no cycle detection.
struct GwCriterion gw_criterion_default(void);

// Copies `n * n` row-major entries into a new matrix handle.
//
// # Safety
// `data` must point to `n * n` readable doubles; `out` must be writable.
enum GwStatus gw_matrix_new(size_t n, const double *data, struct GwMatrix **out);

// Divides each row by its sum.
//
// # Safety
// `m` must be a live handle; `out` must be writable.
enum GwStatus gw_matrix_normalize(const struct GwMatrix *m, struct GwMatrix **out);

// Transition matrix `D^-1 A` of a nonnegative affinity matrix.
//
// # Safety
// `data` must point to `n * n` readable doubles; `out` must be writable.
enum GwStatus gw_matrix_from_affinity(size_t n, const double *data, struct GwMatrix **out);

// # Safety
// `m` must be null or a handle from this library, freed at most once.
void gw_matrix_free(struct GwMatrix *m);

// Dimension of `m`, or 0 for a null handle.
//
// # Safety
// `m` must be null or a live handle.
size_t gw_matrix_dim(const struct GwMatrix *m);

// Copies the row-major entries into `buf`, which holds `len` doubles.
//
// # Safety
// `m` must be a live handle; `buf` must point to `len` writable doubles.
enum GwStatus gw_matrix_copy(const struct GwMatrix *m, double *buf, size_t len);

// Product of two row-stochastic matrices.
//
// # Safety
// `a`, `b` must be live handles; `out` must be writable.
enum GwStatus gw_matmul(const struct GwMatrix *a, const struct GwMatrix *b, struct GwMatrix **out);

// `||f - g||` in the chosen norm.
//
// # Safety
// `f`, `g` must be live handles; `out` must be writable.
enum GwStatus gw_diff_norm(const struct GwMatrix *f,
                           const struct GwMatrix *g,
                           enum GwNorm norm,
                           double *out);

// Regularity test; `index` receives the smallest `k` with `T^k > 0`, or 0.
//
// # Safety
// `t` must be a live handle; `regular` and `index` must be writable.
enum GwStatus gw_chain_is_regular(const struct GwMatrix *t, bool *regular, size_t *index);

// Period of an irreducible chain.
//
// # Safety
// `t` must be a live handle; `out` must be writable.
enum GwStatus gw_chain_period(const struct GwMatrix *t, size_t *out);

// Stationary vector of a regular chain, written to `pi[0..n]`.
//
// # Safety
// `t` must be a live handle; `pi` must point to `len` writable doubles.
enum GwStatus gw_chain_stationary(const struct GwMatrix *t, double *pi, size_t len);

// Second-largest eigenvalue modulus of a stochastic matrix.
//
// # Safety
// `t` must be a live handle; `out` must be writable.
enum GwStatus gw_chain_subdominant_modulus(const struct GwMatrix *t, double *out);

// `F <- F P` from `F_0 = P`.
//
// # Safety
// `p` must be a live handle; `criterion` readable; `out` writable.
enum GwStatus gw_run_diffusion(const struct GwMatrix *p,
                               const struct GwCriterion *criterion,
                               struct GwReport **out);

// `F <- alpha F P + (1 - alpha) Y` from `F_0 = P`.
//
// # Safety
// `p`, `y` must be live handles; `criterion` readable; `out` writable.
enum GwStatus gw_run_pagerank(const struct GwMatrix *p,
                              const struct GwMatrix *y,
                              double alpha,
                              const struct GwCriterion *criterion,
                              struct GwReport **out);

// Diffusion with `lambda P + (1 - lambda) I` on even steps.
//
// # Safety
// `p` must be a live handle; `criterion` readable; `out` writable.
enum GwStatus gw_run_alternating_diffusion(const struct GwMatrix *p,
                                           double lambda,
                                           enum GwConvention convention,
                                           const struct GwCriterion *criterion,
                                           struct GwReport **out);

// PageRank with an alternating schedule selected by `variant`.
//
// # Safety
// `p`, `y`, `j` must be live handles; `criterion` readable; `out` writable.
enum GwStatus gw_run_alternating_pagerank(const struct GwMatrix *p,
                                          const struct GwMatrix *y,
                                          const struct GwMatrix *j,
                                          double lambda,
                                          double alpha,
                                          enum GwVariant variant,
                                          enum GwConvention convention,
                                          const struct GwCriterion *criterion,
                                          struct GwReport **out);

// # Safety
// `r` must be null or a handle from this library, freed at most once.
void gw_report_free(struct GwReport *r);

// # Safety
// `r` must be a live handle.
enum GwMode gw_report_mode(const struct GwReport *r);

// Update steps performed, or 0 for a null handle.
//
// # Safety
// `r` must be null or a live handle.
size_t gw_report_iterations(const struct GwReport *r);

// Number of final states: 1, or 2 for a period-2 cycle.
//
// # Safety
// `r` must be null or a live handle.
size_t gw_report_state_count(const struct GwReport *r);

// Copies final state `k` into a new matrix handle.
//
// # Safety
// `r` must be a live handle; `out` writable.
enum GwStatus gw_report_state(const struct GwReport *r, size_t k, struct GwMatrix **out);

// Monte Carlo law of one lineage.
//
// With `alpha` in (0, 1) the immigration mechanism with matrices `p` and
// `t_or_y` is sampled at depth `generation`; with `alpha < 0` the pure
// mutation mechanism (branching `p`, mutation `t_or_y`) at generation
// `generation >= 1`. `out` receives the row frequencies.
//
// # Safety
// `p`, `t_or_y` must be live handles; `out` writable.
enum GwStatus gw_simulate(const struct GwMatrix *p,
                          const struct GwMatrix *t_or_y,
                          double alpha,
                          size_t generation,
                          uint64_t replicates,
                          uint64_t seed,
                          struct GwMatrix **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GWFOREST_H */
