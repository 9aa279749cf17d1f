#ifndef RUINWALK_H
#define RUINWALK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum RwStatus {
  RW_STATUS_OK = 0,
  RW_STATUS_NULL_ARGUMENT = 1,
  RW_STATUS_INVALID_MODEL = 2,
  RW_STATUS_NET_PROFIT = 3,
  RW_STATUS_NUMERICAL = 4,
  RW_STATUS_OUT_OF_RANGE = 5,
  RW_STATUS_PANIC = 6,
} RwStatus;

// Opaque risk model.
typedef struct RwModel RwModel;

// Opaque solved model: roots, initial values and `phi(0..=u_max)`.
typedef struct RwSolution RwSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next `rw_*` call on the same thread.
const char *rw_last_error(void);

// Library version as a static NUL-terminated string.
const char *rw_version(void);

// Builds a model from a JSON model document.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum RwStatus rw_model_from_json(const char *json, struct RwModel **out);

// Builds a model from explicit weights: `claim[k] = P(X = claim_offset + k)`
// and `interarrival[k] = P(c*theta = interarrival_offset + k)`.
//
// # Safety
// Each weight pointer must reference `len` readable doubles; `out` must be
// writable.
enum RwStatus rw_model_from_pmfs(int64_t claim_offset,
                                 const double *claim,
                                 size_t claim_len,
                                 int64_t interarrival_offset,
                                 const double *interarrival,
                                 size_t interarrival_len,
                                 struct RwModel **out);

// # Safety
// `model` must come from a `rw_model_from_*` call and not be freed yet.
void rw_model_free(struct RwModel *model);

// Depth `m` of the largest downward step, 0 for a NULL model.
//
// # Safety
// `model` must be NULL or a live handle.
size_t rw_model_m(const struct RwModel *model);

// `E(X - c*theta)`, NaN for a NULL model.
//
// # Safety
// `model` must be NULL or a live handle.
double rw_model_drift(const struct RwModel *model);

// Finds the roots, the initial values and `phi(0..=u_max)`.
//
// # Safety
// `model` must be a live handle; `out` must be writable.
enum RwStatus rw_solve(const struct RwModel *model, size_t u_max, struct RwSolution **out);

// # Safety
// `sol` must come from [`rw_solve`] and not be freed yet.
void rw_solution_free(struct RwSolution *sol);

// Number of entries in the survival table (`u_max + 1`).
//
// # Safety
// `sol` must be NULL or a live handle.
size_t rw_solution_phi_len(const struct RwSolution *sol);

// `phi(u)` from the solved table.
//
// # Safety
// `sol` must be a live handle; `out` must be writable.
enum RwStatus rw_solution_phi(const struct RwSolution *sol, size_t u, double *out);

// Number of initial values `pi_0..pi_{m-1}`.
//
// # Safety
// `sol` must be NULL or a live handle.
size_t rw_solution_pi_len(const struct RwSolution *sol);

// `pi_k = phi(k + 1) - phi(k)` for `k < m`.
//
// # Safety
// `sol` must be a live handle; `out` must be writable.
enum RwStatus rw_solution_pi(const struct RwSolution *sol, size_t k, double *out);

// Number of distinct unit-disk roots.
//
// # Safety
// `sol` must be NULL or a live handle.
size_t rw_solution_root_count(const struct RwSolution *sol);

// Root `i` as real part, imaginary part and multiplicity.
//
// # Safety
// `sol` must be a live handle; the out pointers must be writable.
enum RwStatus rw_solution_root(const struct RwSolution *sol,
                               size_t i,
                               double *re,
                               double *im,
                               size_t *multiplicity);

// Writes `phi(u, t)` for `u = 0..=u_max` into `out`, which must hold
// `u_max + 1` doubles.
//
// # Safety
// `model` must be a live handle; `out` must reference `out_len` writable
// doubles.
enum RwStatus rw_finite_survival(const struct RwModel *model,
                                 size_t u_max,
                                 size_t t,
                                 double *out,
                                 size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RUINWALK_H */
