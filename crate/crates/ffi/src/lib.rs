//! C ABI over `forearm-core`.
//!
//! Models are opaque heap handles (`FmModel *`) created by one of the
//! `fm_model_*` constructors and released with [`fm_model_free`]. Every
//! fallible call returns an [`FmStatus`]; on failure a message is kept per
//! thread and can be copied out with [`fm_last_error_message`]. Arrays are
//! caller-owned, passed as pointer + length. Joint angles are radians in the
//! model's joint order; Jacobians are row-major, one row per muscle.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use forearm_core::actuation::{self, ActuationError, ActuatorSpec, SensorGeometry};
use forearm_core::analysis::{self, AnalysisError};
use forearm_core::kinematics::{self, KinematicsError, Posture};
use forearm_core::model::{self, ModelError, RobotModel};
use forearm_core::muscle::{self, MuscleError};
use forearm_core::thermal::{self, ThermalError, ThermalParams, ThermalState};
use forearm_core::Error;
use nalgebra::Vector3;

/// Opaque model handle.
pub struct FmModel {
    inner: RobotModel,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    Io = 5,
    /// A value lies outside its allowed range (joint limit, sensor range,
    /// dangling tension...).
    OutOfRange = 6,
    /// Torque target cannot be met within the tension limits.
    Infeasible = 7,
    /// Output buffer too short; the required length was reported.
    BufferTooSmall = 8,
    InvalidArgument = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FmActuatorSpec {
    pub gear_ratio: f64,
    /// Meters.
    pub pulley_radius: f64,
    pub efficiency: f64,
    /// Newtons.
    pub continuous_max_tension: f64,
    /// Meters per second.
    pub no_load_winding_rate: f64,
    /// Ohms.
    pub winding_resistance: f64,
    /// Newton-meters per ampere.
    pub torque_constant: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FmSensorGeometry {
    /// Meters.
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    /// Newtons.
    pub loadcell_max: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FmCalibration {
    pub gain: f64,
    pub offset: f64,
    pub rms_residual: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FmSpeedGain {
    pub delta_v: f64,
    pub percent: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FmThermalParams {
    pub c_motor: f64,
    pub c_structure: f64,
    pub r_motor_structure_sheet: f64,
    pub r_motor_structure_air: f64,
    pub r_motor_ambient: f64,
    pub r_structure_ambient: f64,
    pub t_ambient: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FmThermalSample {
    pub time: f64,
    pub t_motor: f64,
    pub t_structure: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(FmStatus, String);

impl Failure {
    fn new(status: FmStatus, msg: impl Into<String>) -> Self {
        Self(status, msg.into())
    }
}

fn status_of(e: &Error) -> FmStatus {
    match e {
        Error::Model(ModelError::Parse { .. }) => FmStatus::Parse,
        Error::Model(_) => FmStatus::Validation,
        Error::Io(_) => FmStatus::Io,
        Error::Analysis(AnalysisError::InfeasibleJoint { .. } | AnalysisError::InfeasibleCoupled) => {
            FmStatus::Infeasible
        }
        Error::Actuation(ActuationError::SensorSaturated { .. })
        | Error::Thermal(ThermalError::TensionOutOfRange { .. } | ThermalError::Unstable { .. }) => {
            FmStatus::OutOfRange
        }
        _ => FmStatus::InvalidArgument,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

macro_rules! via_core_error {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Error::from(e).into()
            }
        }
    )*};
}

via_core_error!(ModelError, MuscleError, ActuationError, ThermalError, AnalysisError, KinematicsError);

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            FmStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure::new(FmStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn model_ref<'a>(model: *const FmModel) -> Result<&'a RobotModel, Failure> {
    model.as_ref().map(|m| &m.inner).ok_or_else(|| null("model"))
}

unsafe fn input<'a>(ptr: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(name));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

unsafe fn output<'a>(ptr: *mut f64, len: usize, name: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(null(name));
    }
    Ok(slice::from_raw_parts_mut(ptr, len))
}

unsafe fn text<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|e| Failure::new(FmStatus::InvalidUtf8, format!("`{name}`: {e}")))
}

fn expect_len(name: &str, got: usize, expected: usize) -> Result<(), Failure> {
    if got == expected {
        Ok(())
    } else {
        Err(Failure::new(
            FmStatus::InvalidArgument,
            format!("`{name}` has length {got}, expected {expected}"),
        ))
    }
}

unsafe fn posture(model: &RobotModel, angles: *const f64, n: usize) -> Result<Posture, Failure> {
    expect_len("angles", n, model.dof())?;
    Ok(Posture::from_ordered(model, input(angles, n, "angles")?))
}

unsafe fn store<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn hand_out(out: *mut *mut FmModel, model: RobotModel) -> Result<(), Failure> {
    store(out, Box::into_raw(Box::new(FmModel { inner: model })), "out")
}

impl From<FmActuatorSpec> for ActuatorSpec {
    fn from(s: FmActuatorSpec) -> Self {
        ActuatorSpec {
            gear_ratio: s.gear_ratio,
            pulley_radius: s.pulley_radius,
            efficiency: s.efficiency,
            continuous_max_tension: s.continuous_max_tension,
            no_load_winding_rate: s.no_load_winding_rate,
            winding_resistance: s.winding_resistance,
            torque_constant: s.torque_constant,
        }
    }
}

impl From<ActuatorSpec> for FmActuatorSpec {
    fn from(s: ActuatorSpec) -> Self {
        FmActuatorSpec {
            gear_ratio: s.gear_ratio,
            pulley_radius: s.pulley_radius,
            efficiency: s.efficiency,
            continuous_max_tension: s.continuous_max_tension,
            no_load_winding_rate: s.no_load_winding_rate,
            winding_resistance: s.winding_resistance,
            torque_constant: s.torque_constant,
        }
    }
}

impl From<FmThermalParams> for ThermalParams {
    fn from(p: FmThermalParams) -> Self {
        ThermalParams {
            c_motor: p.c_motor,
            c_structure: p.c_structure,
            r_motor_structure_sheet: p.r_motor_structure_sheet,
            r_motor_structure_air: p.r_motor_structure_air,
            r_motor_ambient: p.r_motor_ambient,
            r_structure_ambient: p.r_structure_ambient,
            t_ambient: p.t_ambient,
        }
    }
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `len` bytes, into `buf`. Returns the full message length
/// excluding the terminator (0 if there is none). `buf` may be null to query
/// the length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fm_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Parses and validates a model description.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_model_from_json(json: *const c_char, out: *mut *mut FmModel) -> FmStatus {
    guard(|| {
        let m = model::load_model(text(json, "json")?)?;
        hand_out(out, m)
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_model_from_file(path: *const c_char, out: *mut *mut FmModel) -> FmStatus {
    guard(|| {
        let m = model::load_model_file(text(path, "path")?)?;
        hand_out(out, m)
    })
}

/// The model shipped with the library.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_model_shipped(out: *mut *mut FmModel) -> FmStatus {
    guard(|| hand_out(out, forearm_core::kengoro_forearm()))
}

/// Copy of `model` with the radioulnar axis along the forearm.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_model_straight_variant(model: *const FmModel, out: *mut *mut FmModel) -> FmStatus {
    guard(|| {
        let m = model::straight_axis_variant(model_ref(model)?)?;
        hand_out(out, m)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fm_model_free(model: *mut FmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of joints, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fm_model_dof(model: *const FmModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.dof())
}

/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fm_model_num_muscles(model: *const FmModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.muscles().len())
}

/// Position of `name` in the joint order.
///
/// # Safety
/// `model` must be a live handle, `name` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fm_model_joint_index(model: *const FmModel, name: *const c_char, out: *mut usize) -> FmStatus {
    guard(|| {
        let m = model_ref(model)?;
        let name = text(name, "name")?;
        let idx = m
            .joint_index(name)
            .ok_or_else(|| Failure::new(FmStatus::InvalidArgument, format!("unknown joint `{name}`")))?;
        store(out, idx, "out")
    })
}

/// Actuator driving muscle number `muscle`.
///
/// # Safety
/// `model` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fm_model_muscle_actuator(
    model: *const FmModel,
    muscle: usize,
    out: *mut FmActuatorSpec,
) -> FmStatus {
    guard(|| {
        let m = model_ref(model)?;
        if muscle >= m.muscles().len() {
            return Err(Failure::new(FmStatus::InvalidArgument, format!("muscle index {muscle} out of range")));
        }
        store(out, (*m.muscle_actuator(muscle)).into(), "out")
    })
}

/// Base-frame palm point, meters, written to `out[0..3]`.
///
/// # Safety
/// `angles` must hold `n_angles` values and `out` three.
#[no_mangle]
pub unsafe extern "C" fn fm_palm_point(
    model: *const FmModel,
    angles: *const f64,
    n_angles: usize,
    out: *mut f64,
) -> FmStatus {
    guard(|| {
        let m = model_ref(model)?;
        let p = kinematics::palm_point(m, &posture(m, angles, n_angles)?)?;
        output(out, 3, "out")?.copy_from_slice(p.as_slice());
        Ok(())
    })
}

/// `FM_STATUS_OK` if every angle is within its limits, otherwise
/// `FM_STATUS_OUT_OF_RANGE` with the first offending joint index in
/// `violating_joint` (may be null).
///
/// # Safety
/// `angles` must hold `n_angles` values; `violating_joint` null or writable.
#[no_mangle]
pub unsafe extern "C" fn fm_check_limits(
    model: *const FmModel,
    angles: *const f64,
    n_angles: usize,
    violating_joint: *mut usize,
) -> FmStatus {
    guard(|| {
        let m = model_ref(model)?;
        let report = kinematics::check_limits(m, &posture(m, angles, n_angles)?);
        let Some(bad) = report.failures().next() else {
            return Ok(());
        };
        if !violating_joint.is_null() {
            *violating_joint = m.joint_index(&bad.joint).expect("reported joint exists");
        }
        Err(Failure::new(
            FmStatus::OutOfRange,
            format!("joint `{}` is outside [{}, {}] rad", bad.joint, bad.angle_min, bad.angle_max),
        ))
    })
}

/// `∂l/∂θ`, row-major `n_muscles × dof`, into `out` of length `out_len`.
///
/// # Safety
/// `angles` must hold `n_angles` values and `out` `out_len`.
#[no_mangle]
pub unsafe extern "C" fn fm_muscle_jacobian(
    model: *const FmModel,
    angles: *const f64,
    n_angles: usize,
    out: *mut f64,
    out_len: usize,
) -> FmStatus {
    guard(|| {
        let m = model_ref(model)?;
        let jac = muscle::muscle_jacobian(m, &posture(m, angles, n_angles)?)?;
        let (nm, nj) = (jac.num_muscles(), jac.num_joints());
        expect_len("out", out_len, nm * nj)?;
        let out = output(out, out_len, "out")?;
        for i in 0..nm {
            for j in 0..nj {
                out[i * nj + j] = jac.matrix[(i, j)];
            }
        }
        Ok(())
    })
}

/// Per-joint torque range with each muscle in `[0, f_max[i]]`.
///
/// # Safety
/// `angles` holds `n_angles` values, `f_max` `n_muscles`, and `tau_min`,
/// `tau_max` `n_joints` each.
#[no_mangle]
pub unsafe extern "C" fn fm_torque_bounds(
    model: *const FmModel,
    angles: *const f64,
    n_angles: usize,
    f_max: *const f64,
    n_muscles: usize,
    tau_min: *mut f64,
    tau_max: *mut f64,
    n_joints: usize,
) -> FmStatus {
    guard(|| {
        let m = model_ref(model)?;
        let jac = muscle::muscle_jacobian(m, &posture(m, angles, n_angles)?)?;
        expect_len("tau_min", n_joints, jac.num_joints())?;
        let bounds = analysis::torque_bounds_all(&jac, input(f_max, n_muscles, "f_max")?)?;
        let lo = output(tau_min, n_joints, "tau_min")?;
        let hi = output(tau_max, n_joints, "tau_max")?;
        for (j, b) in bounds.iter().enumerate() {
            lo[j] = b.tau_min;
            hi[j] = b.tau_max;
        }
        Ok(())
    })
}

/// Minimum-norm tensions producing `tau` (length `n_joints`) within
/// `[0, f_max]`, written to `out` (length `n_muscles`).
///
/// # Safety
/// Array arguments must hold the stated number of values.
#[no_mangle]
pub unsafe extern "C" fn fm_distribute_tension(
    model: *const FmModel,
    angles: *const f64,
    n_angles: usize,
    tau: *const f64,
    n_joints: usize,
    f_max: *const f64,
    n_muscles: usize,
    out: *mut f64,
) -> FmStatus {
    guard(|| {
        let m = model_ref(model)?;
        let jac = muscle::muscle_jacobian(m, &posture(m, angles, n_angles)?)?;
        let f = analysis::distribute_tension(&jac, input(tau, n_joints, "tau")?, input(f_max, n_muscles, "f_max")?)?;
        output(out, n_muscles, "out")?.copy_from_slice(f.values());
        Ok(())
    })
}

/// Geometry of the shipped tension-measurement unit.
#[no_mangle]
pub extern "C" fn fm_sensor_geometry_default() -> FmSensorGeometry {
    let g = SensorGeometry::tension_unit();
    FmSensorGeometry {
        r1: g.r1,
        r2: g.r2,
        r3: g.r3,
        loadcell_max: g.loadcell_max,
    }
}

/// Wire tension in newtons for a load-cell reading in newtons.
///
/// # Safety
/// `geom` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fm_unit_tension(geom: *const FmSensorGeometry, reading: f64, out: *mut f64) -> FmStatus {
    guard(|| {
        let g = geom.as_ref().ok_or_else(|| null("geom"))?;
        let geom = SensorGeometry {
            r1: g.r1,
            r2: g.r2,
            r3: g.r3,
            loadcell_max: g.loadcell_max,
        };
        store(out, actuation::unit_tension_from_loadcell(&geom, reading)?, "out")
    })
}

/// Least-squares `tension = gain · raw + offset` over `n` samples.
///
/// # Safety
/// `raw` and `tension` must hold `n` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fm_calibrate(
    raw: *const f64,
    tension: *const f64,
    n: usize,
    out: *mut FmCalibration,
) -> FmStatus {
    guard(|| {
        let samples: Vec<(f64, f64)> = input(raw, n, "raw")?
            .iter()
            .copied()
            .zip(input(tension, n, "tension")?.iter().copied())
            .collect();
        let c = actuation::calibrate_sensor(&samples)?;
        store(
            out,
            FmCalibration {
                gain: c.gain,
                offset: c.offset,
                rms_residual: c.rms_residual,
            },
            "out",
        )
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_slant_speed_gain(omega: f64, delta_r: f64, total: f64, out: *mut FmSpeedGain) -> FmStatus {
    guard(|| {
        let g = analysis::slant_speed_gain(omega, delta_r, total)?;
        store(
            out,
            FmSpeedGain {
                delta_v: g.delta_v,
                percent: g.percent,
            },
            "out",
        )
    })
}

/// Convex-hull volume of `n_points` points stored as `x, y, z` triples.
/// Degenerate (flat) clouds give 0.
///
/// # Safety
/// `xyz` must hold `3 · n_points` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fm_hull_volume(xyz: *const f64, n_points: usize, out: *mut f64) -> FmStatus {
    guard(|| {
        let len = n_points
            .checked_mul(3)
            .ok_or_else(|| Failure::new(FmStatus::InvalidArgument, "point count overflows"))?;
        let pts: Vec<Vector3<f64>> = input(xyz, len, "xyz")?
            .chunks_exact(3)
            .map(Vector3::from_column_slice)
            .collect();
        store(out, analysis::convex_hull_volume(&pts), "out")
    })
}

/// Fitted parameters of the shipped module.
#[no_mangle]
pub extern "C" fn fm_thermal_params_default() -> FmThermalParams {
    let p = ThermalParams::module_default();
    FmThermalParams {
        c_motor: p.c_motor,
        c_structure: p.c_structure,
        r_motor_structure_sheet: p.r_motor_structure_sheet,
        r_motor_structure_air: p.r_motor_structure_air,
        r_motor_ambient: p.r_motor_ambient,
        r_structure_ambient: p.r_structure_ambient,
        t_ambient: p.t_ambient,
    }
}

/// Holds `tension` newtons for `duration` seconds from ambient and writes the
/// 1 Hz trace (plus the final state) to `out`. `written` receives the trace
/// length; if it exceeds `capacity` nothing is written and
/// `FM_STATUS_BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `params`, `spec` readable; `out` holds `capacity` samples; `written`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fm_simulate_hold(
    params: *const FmThermalParams,
    spec: *const FmActuatorSpec,
    tension: f64,
    duration: f64,
    with_sheet: bool,
    out: *mut FmThermalSample,
    capacity: usize,
    written: *mut usize,
) -> FmStatus {
    guard(|| {
        let params: ThermalParams = (*params.as_ref().ok_or_else(|| null("params"))?).into();
        let spec: ActuatorSpec = (*spec.as_ref().ok_or_else(|| null("spec"))?).into();
        let trace = thermal::simulate_hold(&params, &spec, tension, duration, with_sheet)?;
        store(written, trace.len(), "written")?;
        if trace.len() > capacity {
            return Err(Failure::new(
                FmStatus::BufferTooSmall,
                format!("trace has {} samples, buffer holds {capacity}", trace.len()),
            ));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let dst = slice::from_raw_parts_mut(out, trace.len());
        for (d, s) in dst.iter_mut().zip(&trace) {
            let ThermalState {
                t_motor,
                t_structure,
                time,
            } = *s;
            *d = FmThermalSample {
                time,
                t_motor,
                t_structure,
            };
        }
        Ok(())
    })
}
