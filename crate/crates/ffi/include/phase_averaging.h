#ifndef PHASE_AVERAGING_H
#define PHASE_AVERAGING_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum {
  PA_STATUS_OK = 0,
  PA_STATUS_NULL_POINTER = 1,
  PA_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The mass matrix is singular or exceeded the conditioning cap.
   */
  PA_STATUS_ILL_CONDITIONED = 3,
  /**
   * The integration failed: step size underflow or a non-finite state.
   */
  PA_STATUS_NUMERICAL_FAILURE = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  PA_STATUS_PANIC = 5,
} PaStatus;

/**
 * Opaque model handle.
 */
typedef struct PaModel PaModel;

/**
 * Opaque handle to precomputed averaging tables.
 */
typedef struct PaTables PaTables;

/**
 * Opaque sampled trajectory.
 */
typedef struct PaTrajectory PaTrajectory;

typedef struct {
  double rtol;
  double atol;
  /**
   * Spacing of the output grid in seconds.
   */
  double sample_dt;
} PaSolverSettings;

/**
 * Physical parameters of the swinging spring (SI units).
 */
typedef struct {
  double mass;
  double length;
  double gravity;
  double spring_k;
} PaSpringParams;

typedef struct {
  double re;
  double im;
} PaComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len - 1` bytes) and returns the full message length, or 0
 * when there is no error.
 */
uintptr_t pa_last_error_message(char *buf, uintptr_t len);

PaSolverSettings pa_solver_settings_default(void);

PaSpringParams pa_spring_params_default(void);

/**
 * Shifted Gaussian moment `R_alpha(c)` without the damping factor.
 */
PaStatus pa_shifted_moment(uintptr_t alpha, double frequency, double window, PaComplex *out);

/**
 * Swinging-spring model. `freq_ratio <= 0` keeps the ratio implied by the
 * physical parameters.
 */
PaStatus pa_spring_model_new(const PaSpringParams *params, double freq_ratio, PaModel **out);

/**
 * State dimension (3 for the spring).
 */
uintptr_t pa_model_dim(const PaModel *model);

/**
 * Complex initial state from positions and velocities (three each).
 */
PaStatus pa_model_initial_state(const PaModel *model,
                                const double *positions,
                                const double *velocities,
                                PaComplex *out);

void pa_model_free(PaModel *model);

/**
 * Averaging tables for degree `p` and window `window` over the model's
 * frequencies. Ill-conditioned mass matrices are accepted; query
 * [`pa_tables_condition`] to inspect them.
 */
PaStatus pa_tables_new(const PaModel *model, uintptr_t p, double window, PaTables **out);

/**
 * 1-norm condition number of the mass matrix, or NaN for a null handle.
 */
double pa_tables_condition(const PaTables *tables);

void pa_tables_free(PaTables *tables);

/**
 * Averaged right-hand side for the stacked state `V_0 ... V_p`
 * (block-major, `len = dim * (p + 1)`), written to `out` of the same length.
 */
PaStatus pa_assemble_rhs(const PaModel *model,
                         const PaTables *tables,
                         double t,
                         const PaComplex *state,
                         uintptr_t len,
                         PaComplex *out);

/**
 * Exact modulated run from `y0` (model dimension entries).
 */
PaStatus pa_integrate_exact(const PaModel *model,
                            const PaComplex *y0,
                            double t_final,
                            const PaSolverSettings *settings,
                            PaTrajectory **out);

/**
 * Averaged run, resetting the higher blocks every `reset_dt` seconds
 * (`INFINITY` for never). The trajectory holds `V_0`.
 */
PaStatus pa_integrate_with_reset(const PaModel *model,
                                 const PaTables *tables,
                                 const PaComplex *y0,
                                 double t_final,
                                 double reset_dt,
                                 const PaSolverSettings *settings,
                                 PaTrajectory **out);

/**
 * Number of samples, or 0 for a null handle.
 */
uintptr_t pa_trajectory_len(const PaTrajectory *traj);

/**
 * Components per sample, or 0 for a null handle.
 */
uintptr_t pa_trajectory_width(const PaTrajectory *traj);

/**
 * Largest modulus of the unstored higher blocks over all samples.
 */
double pa_trajectory_higher_block_peak(const PaTrajectory *traj);

/**
 * Copies sample times (`len` entries) and states (`len * width`, sample
 * major) into caller buffers. Either buffer may be null to skip it.
 */
PaStatus pa_trajectory_copy(const PaTrajectory *traj, double *times, PaComplex *states);

void pa_trajectory_free(PaTrajectory *traj);

/**
 * Relative L2 error of one component of `traj` against `reference`.
 */
PaStatus pa_l2_error(const PaTrajectory *traj,
                     const PaTrajectory *reference,
                     uintptr_t component,
                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHASE_AVERAGING_H */
