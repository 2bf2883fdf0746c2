#ifndef FOREARM_H
#define FOREARM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FmStatus {
  FM_STATUS_OK = 0,
  FM_STATUS_NULL_POINTER = 1,
  FM_STATUS_INVALID_UTF8 = 2,
  FM_STATUS_PARSE = 3,
  FM_STATUS_VALIDATION = 4,
  FM_STATUS_IO = 5,
  /**
   * A value lies outside its allowed range (joint limit, sensor range,
   * dangling tension...).
   */
  FM_STATUS_OUT_OF_RANGE = 6,
  /**
   * Torque target cannot be met within the tension limits.
   */
  FM_STATUS_INFEASIBLE = 7,
  /**
   * Output buffer too short; the required length was reported.
   */
  FM_STATUS_BUFFER_TOO_SMALL = 8,
  FM_STATUS_INVALID_ARGUMENT = 9,
  FM_STATUS_PANIC = 10,
} FmStatus;

/**
 * Opaque model handle.
 */
typedef struct FmModel FmModel;

typedef struct FmActuatorSpec {
  double gear_ratio;
  /**
   * Meters.
   */
  double pulley_radius;
  double efficiency;
  /**
   * Newtons.
   */
  double continuous_max_tension;
  /**
   * Meters per second.
   */
  double no_load_winding_rate;
  /**
   * Ohms.
   */
  double winding_resistance;
  /**
   * Newton-meters per ampere.
   */
  double torque_constant;
} FmActuatorSpec;

typedef struct FmSensorGeometry {
  /**
   * Meters.
   */
  double r1;
  double r2;
  double r3;
  /**
   * Newtons.
   */
  double loadcell_max;
} FmSensorGeometry;

typedef struct FmCalibration {
  double gain;
  double offset;
  double rms_residual;
} FmCalibration;

typedef struct FmSpeedGain {
  double delta_v;
  double percent;
} FmSpeedGain;

typedef struct FmThermalParams {
  double c_motor;
  double c_structure;
  double r_motor_structure_sheet;
  double r_motor_structure_air;
  double r_motor_ambient;
  double r_structure_ambient;
  double t_ambient;
} FmThermalParams;

typedef struct FmThermalSample {
  double time;
  double t_motor;
  double t_structure;
} FmThermalSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message, NUL-terminated and
 * truncated to `len` bytes, into `buf`. Returns the full message length
 * excluding the terminator (0 if there is none). `buf` may be null to query
 * the length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t fm_last_error_message(char *buf, size_t len);

/**
 * Parses and validates a model description.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum FmStatus fm_model_from_json(const char *json, struct FmModel **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum FmStatus fm_model_from_file(const char *path, struct FmModel **out);

/**
 * The model shipped with the library.
 *
 * # Safety
 * `out` must be writable.
 */
enum FmStatus fm_model_shipped(struct FmModel **out);

/**
 * Copy of `model` with the radioulnar axis along the forearm.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum FmStatus fm_model_straight_variant(const struct FmModel *model, struct FmModel **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void fm_model_free(struct FmModel *model);

/**
 * Number of joints, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t fm_model_dof(const struct FmModel *model);

/**
 * # Safety
 * `model` must be null or a live handle.
 */
size_t fm_model_num_muscles(const struct FmModel *model);

/**
 * Position of `name` in the joint order.
 *
 * # Safety
 * `model` must be a live handle, `name` NUL-terminated, `out` writable.
 */
enum FmStatus fm_model_joint_index(const struct FmModel *model, const char *name, size_t *out);

/**
 * Actuator driving muscle number `muscle`.
 *
 * # Safety
 * `model` must be a live handle; `out` writable.
 */
enum FmStatus fm_model_muscle_actuator(const struct FmModel *model,
                                       size_t muscle,
                                       struct FmActuatorSpec *out);

/**
 * Base-frame palm point, meters, written to `out[0..3]`.
 *
 * # Safety
 * `angles` must hold `n_angles` values and `out` three.
 */
enum FmStatus fm_palm_point(const struct FmModel *model,
                            const double *angles,
                            size_t n_angles,
                            double *out);

/**
 * `FM_STATUS_OK` if every angle is within its limits, otherwise
 * `FM_STATUS_OUT_OF_RANGE` with the first offending joint index in
 * `violating_joint` (may be null).
 *
 * # Safety
 * `angles` must hold `n_angles` values; `violating_joint` null or writable.
 */
enum FmStatus fm_check_limits(const struct FmModel *model,
                              const double *angles,
                              size_t n_angles,
                              size_t *violating_joint);

/**
 * `∂l/∂θ`, row-major `n_muscles × dof`, into `out` of length `out_len`.
 *
 * # Safety
 * `angles` must hold `n_angles` values and `out` `out_len`.
 */
enum FmStatus fm_muscle_jacobian(const struct FmModel *model,
                                 const double *angles,
                                 size_t n_angles,
                                 double *out,
                                 size_t out_len);

/**
 * Per-joint torque range with each muscle in `[0, f_max[i]]`.
 *
 * # Safety
 * `angles` holds `n_angles` values, `f_max` `n_muscles`, and `tau_min`,
 * `tau_max` `n_joints` each.
 */
enum FmStatus fm_torque_bounds(const struct FmModel *model,
                               const double *angles,
                               size_t n_angles,
                               const double *f_max,
                               size_t n_muscles,
                               double *tau_min,
                               double *tau_max,
                               size_t n_joints);

/**
 * Minimum-norm tensions producing `tau` (length `n_joints`) within
 * `[0, f_max]`, written to `out` (length `n_muscles`).
 *
 * # Safety
 * Array arguments must hold the stated number of values.
 */
enum FmStatus fm_distribute_tension(const struct FmModel *model,
                                    const double *angles,
                                    size_t n_angles,
                                    const double *tau,
                                    size_t n_joints,
                                    const double *f_max,
                                    size_t n_muscles,
                                    double *out);

/**
 * Geometry of the shipped tension-measurement unit.
 */
struct FmSensorGeometry fm_sensor_geometry_default(void);

/**
 * Wire tension in newtons for a load-cell reading in newtons.
 *
 * # Safety
 * `geom` must be readable and `out` writable.
 */
enum FmStatus fm_unit_tension(const struct FmSensorGeometry *geom, double reading, double *out);

/**
 * Least-squares `tension = gain · raw + offset` over `n` samples.
 *
 * # Safety
 * `raw` and `tension` must hold `n` values; `out` writable.
 */
enum FmStatus fm_calibrate(const double *raw,
                           const double *tension,
                           size_t n,
                           struct FmCalibration *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum FmStatus fm_slant_speed_gain(double omega,
                                  double delta_r,
                                  double total,
                                  struct FmSpeedGain *out);

/**
 * Convex-hull volume of `n_points` points stored as `x, y, z` triples.
 * Degenerate (flat) clouds give 0.
 *
 * # Safety
 * `xyz` must hold `3 · n_points` values; `out` writable.
 */
enum FmStatus fm_hull_volume(const double *xyz, size_t n_points, double *out);

/**
 * Fitted parameters of the shipped module.
 */
struct FmThermalParams fm_thermal_params_default(void);

/**
 * Holds `tension` newtons for `duration` seconds from ambient and writes the
 * 1 Hz trace (plus the final state) to `out`. `written` receives the trace
 * length; if it exceeds `capacity` nothing is written and
 * `FM_STATUS_BUFFER_TOO_SMALL` is returned.
 *
 * # Safety
 * `params`, `spec` readable; `out` holds `capacity` samples; `written`
 * writable.
 */
enum FmStatus fm_simulate_hold(const struct FmThermalParams *params,
                               const struct FmActuatorSpec *spec,
                               double tension,
                               double duration,
                               bool with_sheet,
                               struct FmThermalSample *out,
                               size_t capacity,
                               size_t *written);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FOREARM_H */
