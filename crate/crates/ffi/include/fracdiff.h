/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef FRACDIFF_H
#define FRACDIFF_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define FD_FORM_RIEMANN_LIOUVILLE 0

#define FD_FORM_PATIE_SIMON 1

#define FD_FORM_CAPUTO 2

#define FD_BOUNDARY_ABSORBING 0

#define FD_BOUNDARY_REFLECTING 1

#define FD_METHOD_EXPLICIT 0

#define FD_METHOD_IMPLICIT 1

#define FD_INITIAL_TENT 0

#define FD_INITIAL_SINE_BUMP 1

#define FD_INITIAL_UNIFORM 2

// Start from `FdSolveOptions::initial_values` (`n + 1` entries).
#define FD_INITIAL_VALUES 3

// Result code of every fallible call.
typedef enum FdStatus {
  FD_STATUS_OK = 0,
  FD_STATUS_NULL_POINTER = 1,
  FD_STATUS_INVALID_ARGUMENT = 2,
  // The scheme combination or operation is not defined (e.g. Caputo with a
  // reflecting boundary).
  FD_STATUS_UNSUPPORTED = 3,
  FD_STATUS_SINGULAR_SYSTEM = 4,
  // Explicit step above the stability limit without `allow_unstable`.
  FD_STATUS_STABILITY_VIOLATION = 5,
  FD_STATUS_IO = 6,
  FD_STATUS_BUFFER_TOO_SMALL = 7,
  // A Rust panic was caught at the boundary. Indicates a bug.
  FD_STATUS_PANIC = 8,
} FdStatus;

// Opaque iteration matrix.
typedef struct FdMatrix FdMatrix;

// Opaque record of a solver run.
typedef struct FdSeries FdSeries;

// Discretisation: derivative form, boundary conditions, order `alpha` in
// (1, 2), diffusivity `c > 0` and `n` grid intervals on [0, 1].
typedef struct FdScheme {
  uint32_t form;
  uint32_t left;
  uint32_t right;
  double alpha;
  double c;
  size_t n;
} FdScheme;

// Inputs to [`fd_solve`]. Array pointers may be null when their length is 0.
typedef struct FdSolveOptions {
  struct FdScheme scheme;
  double dt;
  double t_end;
  uint32_t method;
  uint32_t initial;
  const double *initial_values;
  size_t initial_len;
  // Sorted output times in [0, t_end]. Each snapshot is taken at the first
  // step on or after the requested time.
  const double *snapshot_times;
  size_t snapshot_count;
  bool allow_unstable;
} FdSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *fd_version(void);

// Message of the most recent failure on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *fd_last_error(void);

// Largest stable explicit step `h^alpha / (c alpha)`.
double fd_stability_limit(double alpha, double c, double h);

// Writes the Grünwald weights `g_0..=g_m` of `order` to `out`, which must
// hold at least `m + 1` values.
//
// # Safety
// `out` must point to `out_len` writable doubles.
enum FdStatus fd_grunwald_weights(double order, size_t m, double *out, size_t out_len);

// Builds the `(n+1) x (n+1)` iteration matrix of `scheme`.
//
// # Safety
// `scheme` must be null or valid; `out` must be null or writable.
enum FdStatus fd_matrix_new(const struct FdScheme *scheme, struct FdMatrix **out);

// Number of rows (and columns), or 0 for a null handle.
//
// # Safety
// `m` must be null or a live handle.
size_t fd_matrix_dim(const struct FdMatrix *m);

// Entry `b[i][j]`: the rate of mass moving from node `i` to node `j`.
//
// # Safety
// `m` must be null or a live handle; `out` must be null or writable.
enum FdStatus fd_matrix_get(const struct FdMatrix *m, size_t i, size_t j, double *out);

// Copies all entries in row-major order; `out` needs `dim * dim` values.
//
// # Safety
// `m` must be null or a live handle; `out` must point to `out_len` doubles.
enum FdStatus fd_matrix_copy(const struct FdMatrix *m, double *out, size_t out_len);

// Row sums; their negation is the absorption rate of each node.
//
// # Safety
// `m` must be null or a live handle; `out` must point to `out_len` doubles.
enum FdStatus fd_matrix_row_sums(const struct FdMatrix *m, double *out, size_t out_len);

// Releases a matrix. Null is ignored.
//
// # Safety
// `m` must be null or a handle from [`fd_matrix_new`] not yet freed.
void fd_matrix_free(struct FdMatrix *m);

// Runs a simulation and returns its record in `*out`.
//
// # Safety
// `options` and the arrays it points to must be valid for their stated
// lengths; `out` must be null or writable.
enum FdStatus fd_solve(const struct FdSolveOptions *options, struct FdSeries **out);

// Number of recorded snapshots, or 0 for a null handle.
//
// # Safety
// `s` must be null or a live handle.
size_t fd_series_snapshot_count(const struct FdSeries *s);

// Values per snapshot (`n + 1`), or 0 for a null handle.
//
// # Safety
// `s` must be null or a live handle.
size_t fd_series_node_count(const struct FdSeries *s);

// Number of per-step mass samples (steps + 1), or 0 for a null handle.
//
// # Safety
// `s` must be null or a live handle.
size_t fd_series_step_count(const struct FdSeries *s);

// Actual snapshot times.
//
// # Safety
// `s` must be null or a live handle; `out` must point to `out_len` doubles.
enum FdStatus fd_series_times(const struct FdSeries *s, double *out, size_t out_len);

// Node values of snapshot `k`.
//
// # Safety
// `s` must be null or a live handle; `out` must point to `out_len` doubles.
enum FdStatus fd_series_snapshot(const struct FdSeries *s, size_t k, double *out, size_t out_len);

// Mass `h sum(u)` at each snapshot.
//
// # Safety
// `s` must be null or a live handle; `out` must point to `out_len` doubles.
enum FdStatus fd_series_mass_trace(const struct FdSeries *s, double *out, size_t out_len);

// Cumulative absorbed mass at each snapshot.
//
// # Safety
// `s` must be null or a live handle; `out` must point to `out_len` doubles.
enum FdStatus fd_series_absorbed(const struct FdSeries *s, double *out, size_t out_len);

// Mass after every step, starting with the initial state.
//
// # Safety
// `s` must be null or a live handle; `out` must point to `out_len` doubles.
enum FdStatus fd_series_step_mass(const struct FdSeries *s, double *out, size_t out_len);

// Smallest value over all snapshots and where it occurs.
//
// # Safety
// `s` must be null or a live handle; the output pointers must be writable.
enum FdStatus fd_series_min(const struct FdSeries *s,
                            double *value,
                            size_t *snapshot,
                            size_t *node);

// Exponential decay rate of the L1 norm over the later snapshots.
//
// # Safety
// `s` must be null or a live handle; `out` must be writable.
enum FdStatus fd_series_decay_rate(const struct FdSeries *s, double *out);

// Writes the `t,x,u` CSV and its `.meta.json` sidecar to `path` (UTF-8).
//
// # Safety
// `s` must be null or a live handle; `path` must be null or NUL-terminated.
enum FdStatus fd_series_write_csv(const struct FdSeries *s, const char *path);

// Releases a series. Null is ignored.
//
// # Safety
// `s` must be null or a handle from [`fd_solve`] not yet freed.
void fd_series_free(struct FdSeries *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACDIFF_H */
