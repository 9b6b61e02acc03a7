#ifndef SYMFLOW_H
#define SYMFLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SymflowStatus {
  SymflowStatus_Ok = 0,
  SymflowStatus_NullPointer = 1,
  SymflowStatus_InvalidArgument = 2,
  SymflowStatus_Config = 3,
  SymflowStatus_Numerical = 4,
  SymflowStatus_Panic = 5,
} SymflowStatus;

/**
 * Why a simulation stopped, or `Running` while it has not.
 */
typedef enum SymflowStop {
  SymflowStop_Running = 0,
  SymflowStop_ReachedTEnd = 1,
  SymflowStop_CurvatureBlowup = 2,
  SymflowStop_StepUnderflow = 3,
} SymflowStop;

/**
 * Opaque simulation handle owning one engine.
 */
typedef struct SymflowSim SymflowSim;

/**
 * One diagnostics row. Columns that do not apply to the run are NaN.
 */
typedef struct SymflowRecord {
  double t;
  double dt;
  double v;
  double e;
  double min_s;
  double max_gradu_sq;
  double max_riem;
  double gauss_bonnet;
  double l;
  double det_g_min;
  double det_g_max;
  double max_energy_density;
  double w_plus;
  double u_min;
  double u_max;
  double max_r;
  double min_r;
  double dissipation;
  double sol_residual;
} SymflowRecord;

typedef struct SymflowSolLimit {
  /**
   * Symmetric `X` with `e^X = HᵀH`, as `[xx, xy, yy]`.
   */
  double x[3];
  /**
   * `½Tr(X²)`.
   */
  double slope;
  double c;
  /**
   * `4c²`.
   */
  double slope_conjugation_invariant;
} SymflowSolLimit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a simulation from a named preset. `n = 0` keeps the preset grid
 * and `t_end ≤ 0` keeps the preset end time.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SymflowStatus symflow_sim_from_preset(const char *name,
                                           uint32_t n,
                                           double t_end,
                                           struct SymflowSim **out);

/**
 * Creates a simulation from configuration text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SymflowStatus symflow_sim_from_config(const char *text, struct SymflowSim **out);

/**
 * Takes one step and reports whether the run is over.
 *
 * # Safety
 * `sim` must come from a constructor here and `stop` be a valid pointer.
 */
enum SymflowStatus symflow_sim_step(struct SymflowSim *sim, enum SymflowStop *stop);

/**
 * Steps until the run stops.
 *
 * # Safety
 * As for [`symflow_sim_step`].
 */
enum SymflowStatus symflow_sim_run(struct SymflowSim *sim, enum SymflowStop *stop);

/**
 * # Safety
 * `sim` must come from a constructor here and `out` be a valid pointer.
 */
enum SymflowStatus symflow_sim_time(const struct SymflowSim *sim, double *out);

/**
 * Number of stored diagnostics rows, the initial state included.
 *
 * # Safety
 * `sim` must come from a constructor here and `out` be a valid pointer.
 */
enum SymflowStatus symflow_sim_record_count(const struct SymflowSim *sim, uintptr_t *out);

/**
 * # Safety
 * `sim` must come from a constructor here and `out` be a valid pointer.
 */
enum SymflowStatus symflow_sim_record(const struct SymflowSim *sim,
                                      uintptr_t index,
                                      struct SymflowRecord *out);

/**
 * Releases a simulation. Null is ignored.
 *
 * # Safety
 * `sim` must come from a constructor here and not be used afterwards.
 */
void symflow_sim_free(struct SymflowSim *sim);

/**
 * Geodesic distance between two positive-definite matrices given as
 * `[xx, xy, yy]`.
 *
 * # Safety
 * `a` and `b` must point to three doubles and `out` be a valid pointer.
 */
enum SymflowStatus symflow_spd_distance(const double *a, const double *b, double *out);

/**
 * Limit data of the Sol attractor for the integer matrix `h` in row-major order.
 *
 * # Safety
 * `h` must point to four integers and `out` be a valid pointer.
 */
enum SymflowStatus symflow_sol_limit(const int64_t *h, struct SymflowSolLimit *out);

/**
 * Copies the calling thread's last error message into `buf` (truncated,
 * always NUL-terminated when `len > 0`) and returns the full message length.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null.
 */
uintptr_t symflow_last_error(char *buf, uintptr_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *symflow_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMFLOW_H */
