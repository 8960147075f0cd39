#ifndef WARPSYN_H
#define WARPSYN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. Values 1 to 4 match the process exit codes of the CLI.
 */
typedef enum WsStatus {
  WS_STATUS_OK = 0,
  WS_STATUS_IO = 1,
  WS_STATUS_PARSE = 2,
  WS_STATUS_PRECONDITION = 3,
  WS_STATUS_ZENO_GUARD = 4,
  WS_STATUS_NULL_POINTER = 5,
  WS_STATUS_OUT_OF_RANGE = 6,
  WS_STATUS_PANIC = 7,
} WsStatus;

typedef struct WsPotential WsPotential;

typedef struct WsTrajectory WsTrajectory;

typedef struct WsWeight WsWeight;

/**
 * One trajectory sample; mirrors a CSV row.
 */
typedef struct WsRecord {
  double t;
  uint64_t j;
  uint32_t q[2];
  double e[2];
  double omega[3];
  double tau[3];
  double v;
  double u[2];
  double mu[2];
} WsRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ws_version(void);

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *ws_last_error(void);

/**
 * # Safety
 * `a` points to 9 doubles; `out` is writable.
 */
enum WsStatus ws_weight_new(const double *a, struct WsWeight **out);

/**
 * # Safety
 * `w` is NULL or came from [`ws_weight_new`] and was not freed.
 */
void ws_weight_free(struct WsWeight *w);

/**
 * Admissible gain bound `k̄`.
 *
 * # Safety
 * `w` is a live handle; `out` is writable.
 */
enum WsStatus ws_weight_k_bound(const struct WsWeight *w, double *out);

/**
 * Gap-maximizing warping axis and the resulting `min Δ`.
 *
 * # Safety
 * `w` is a live handle; `u` has room for 3 doubles; `min_delta` is NULL or writable.
 */
enum WsStatus ws_weight_optimal_u(const struct WsWeight *w, double *u, double *min_delta);

/**
 * Warped family with gains `{k, −k}` about the unit axis `u`.
 *
 * # Safety
 * `w` is a live handle; `u` points to 3 doubles; `out` is writable.
 */
enum WsStatus ws_potential_new(const struct WsWeight *w,
                               const double *u,
                               double k,
                               struct WsPotential **out);

/**
 * # Safety
 * `p` is NULL or came from [`ws_potential_new`] and was not freed.
 */
void ws_potential_free(struct WsPotential *p);

/**
 * Synergistic gap.
 *
 * # Safety
 * `p` is a live handle; `out` is writable.
 */
enum WsStatus ws_potential_gap(const struct WsPotential *p, double *out);

/**
 * `U(R, q)`; `q` is 1-based.
 *
 * # Safety
 * `p` is a live handle; `r` points to 9 doubles; `out` is writable.
 */
enum WsStatus ws_potential_value(const struct WsPotential *p,
                                 const double *r,
                                 uint32_t q,
                                 double *out);

/**
 * `μ(R, q) = U(R, q) − min_p U(R, p)`; `q` is 1-based.
 *
 * # Safety
 * `p` is a live handle; `r` points to 9 doubles; `out` is writable.
 */
enum WsStatus ws_potential_mu(const struct WsPotential *p,
                              const double *r,
                              uint32_t q,
                              double *out);

/**
 * Runs a scenario file. `controller` is NULL (use the file), `"hybrid"`
 * or `"smooth"`. `seed` overrides the file seed when `has_seed` is nonzero.
 *
 * # Safety
 * `path` is a NUL-terminated string; `controller` is NULL or one; `out` is writable.
 */
enum WsStatus ws_scenario_run(const char *path,
                              const char *controller,
                              int paper_exact,
                              int has_seed,
                              uint64_t seed,
                              struct WsTrajectory **out);

/**
 * # Safety
 * `t` is a live handle; `out` is writable.
 */
enum WsStatus ws_trajectory_len(const struct WsTrajectory *t, size_t *out);

/**
 * # Safety
 * `t` is a live handle; `out` is writable.
 */
enum WsStatus ws_trajectory_record(const struct WsTrajectory *t,
                                   size_t index,
                                   struct WsRecord *out);

/**
 * Writes the trajectory in the CLI's CSV format, header comments included.
 *
 * # Safety
 * `t` is a live handle; `path` is a NUL-terminated string.
 */
enum WsStatus ws_trajectory_write_csv(const struct WsTrajectory *t, const char *path);

/**
 * # Safety
 * `t` is NULL or came from [`ws_scenario_run`] and was not freed.
 */
void ws_trajectory_free(struct WsTrajectory *t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WARPSYN_H */
