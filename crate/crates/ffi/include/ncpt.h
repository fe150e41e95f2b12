#ifndef NCPT_H
#define NCPT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define NCPT_LASER_SXFEL 0

#define NCPT_LASER_XFELO 1

#define NCPT_GEOMETRY_COPROPAGATING 0

#define NCPT_GEOMETRY_CROSSED 1

#define NCPT_TRANSITION_PUMP 0

#define NCPT_TRANSITION_STOKES 1

#define NCPT_REGIME_PI_PULSE 0

#define NCPT_REGIME_STIRAP 1

#define NCPT_REGIME_MIXED 2

#define NCPT_REGIME_FAILED 3

typedef enum NcptStatus {
  NCPT_OK = 0,
  NCPT_ERR_NULL_POINTER = 1,
  NCPT_ERR_INVALID_ARGUMENT = 2,
  NCPT_ERR_INTEGRATION = 3,
  NCPT_ERR_PANIC = 4,
} NcptStatus;

/*
 A nucleus with laser settings, geometry and Stokes ratio.
 */
typedef struct NcptContext NcptContext;

/*
 A built nuclear Λ system.
 */
typedef struct NcptSystem NcptSystem;

/*
 Widths of the system in eV.
 */
typedef struct NcptWidths {
  double gamma31_ev;
  double gamma32_ev;
  double gamma3_ev;
  double gamma2_ev;
} NcptWidths;

/*
 Resonant kinematics.
 */
typedef struct NcptPlan {
  double gamma;
  double beta;
  double e_pump_ev;
  double e_stokes_ev;
  double theta_stokes_rad;
  double d_pump;
  double d_stokes;
} NcptPlan;

/*
 One evolution at fixed pump intensity and delay τ_p − τ_S.
 */
typedef struct NcptOutcome {
  double eta;
  double delay_s;
  double max_rho33;
  double omega_p_peak;
  double omega_s_peak;
  double adiabaticity;
} NcptOutcome;

/*
 One row of an intensity sweep; NaN fields when `regime` is failed.
 */
typedef struct NcptSweepRow {
  double i_p_wcm2;
  struct NcptOutcome outcome;
  int32_t regime;
} NcptSweepRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version, a static NUL-terminated string.
 */
const char *ncpt_version(void);

/*
 Message of the last failed call on this thread, empty after a success.
 Valid until the next ncpt call on the same thread.
 */
const char *ncpt_last_error(void);

/*
 Builds a preset nucleus ("re185", "tc97", "gd154", "er168").
 */
enum NcptStatus ncpt_system_from_preset(const char *id, struct NcptSystem **out);

void ncpt_system_free(struct NcptSystem *system);

enum NcptStatus ncpt_system_widths(const struct NcptSystem *system, struct NcptWidths *out);

/*
 Lorentz factor bringing a head-on photon into resonance with a
 transition.
 */
enum NcptStatus ncpt_solve_gamma(double e_transition_ev, double e_photon_ev, double *out);

/*
 Context for a system with a laser preset (`NCPT_LASER_*`), a geometry
 (`NCPT_GEOMETRY_*`) and the Stokes-to-pump intensity ratio.
 */
enum NcptStatus ncpt_context_new(const struct NcptSystem *system,
                                 uint32_t laser,
                                 uint32_t geometry,
                                 double ratio,
                                 struct NcptContext **out);

/*
 Context from a TOML run configuration, with the same schema as the
 command-line `--config` file.
 */
enum NcptStatus ncpt_context_from_config(const char *toml, struct NcptContext **out);

void ncpt_context_free(struct NcptContext *ctx);

/*
 Worker threads for sweeps; 0 picks automatically.
 */
enum NcptStatus ncpt_context_set_workers(struct NcptContext *ctx, size_t workers);

enum NcptStatus ncpt_context_plan(const struct NcptContext *ctx, struct NcptPlan *out);

/*
 Evolves once at pump intensity `i_p_wcm2` (W/cm²) and delay `delay_s`.
 */
enum NcptStatus ncpt_run(const struct NcptContext *ctx,
                         double i_p_wcm2,
                         double delay_s,
                         struct NcptOutcome *out);

/*
 Maximizes the transfer over the delay at fixed pump intensity.
 */
enum NcptStatus ncpt_optimize_delay(const struct NcptContext *ctx,
                                    double i_p_wcm2,
                                    struct NcptOutcome *out);

/*
 Lab intensity (W/cm²) making a single pulse on `transition`
 (`NCPT_TRANSITION_*`) a π pulse.
 */
enum NcptStatus ncpt_pi_pulse_intensity(const struct NcptContext *ctx,
                                        uint32_t transition,
                                        double *out);

/*
 Delay-optimized sweep over `n` strictly increasing intensities. `rows`
 must hold `n` entries. Points whose evolution fails are reported with
 `NCPT_REGIME_FAILED` and the call still succeeds.
 */
enum NcptStatus ncpt_sweep(const struct NcptContext *ctx,
                           const double *intensities_wcm2,
                           size_t n,
                           struct NcptSweepRow *rows);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NCPT_H */
