//! Two-node lumped thermal model: the motor node and the bone-structure node.
//!
//! ```text
//!            P_heat
//!              │
//!   ambient ─R_ma─ motor ─R_ms─ structure ─R_sa─ ambient
//! ```
//!
//! `R_ms` is the heat-transfer-sheet resistance when the sheet is fitted and
//! the (larger) air-gap resistance otherwise. Integration is explicit Euler.

use nalgebra::Matrix2;
use thiserror::Error;

use crate::actuation::{heat_power_from_tension, ActuationError, ActuatorSpec};
use crate::units::kgf_to_newtons;

/// Internal integration step used by [`simulate_hold`] and
/// [`simulate_dangling`], seconds.
pub const HOLD_DT: f64 = 0.1;
/// Largest step accepted by [`thermal_step`], seconds.
pub const MAX_DT: f64 = 1.0;
/// Temperature rise below which a hold counts as negligible, kelvin. Fitted
/// target for the dangling scenario.
pub const NEGLIGIBLE_RISE_K: f64 = 2.0;
/// Finger-muscle tension range during dangling, kgf.
pub const DANGLING_RANGE_KGF: (f64, f64) = (15.0, 30.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThermalError {
    #[error("time step must satisfy 0 < dt ≤ {MAX_DT} s, got {0}")]
    BadStep(f64),
    #[error("time step {dt} s exceeds the explicit-Euler stability limit {limit} s")]
    Unstable { dt: f64, limit: f64 },
    #[error("duration must be positive, got {0}")]
    BadDuration(f64),
    #[error("invalid thermal parameter: {0}")]
    BadParams(String),
    #[error("tension {value} N for muscle {index} is outside the dangling range [0, {max}] N")]
    TensionOutOfRange { index: usize, value: f64, max: f64 },
    #[error("{specs} actuator specs for {tensions} tensions")]
    LengthMismatch { specs: usize, tensions: usize },
    #[error(transparent)]
    Actuation(#[from] ActuationError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams {
    /// Motor heat capacity, J/K.
    pub c_motor: f64,
    /// Bone-structure heat capacity, J/K.
    pub c_structure: f64,
    /// Motor↔structure resistance through the heat-transfer sheet, K/W.
    pub r_motor_structure_sheet: f64,
    /// Motor↔structure resistance across the air gap, K/W.
    pub r_motor_structure_air: f64,
    pub r_motor_ambient: f64,
    pub r_structure_ambient: f64,
    /// Kelvin.
    pub t_ambient: f64,
}

impl ThermalParams {
    /// Fitted parameters for the miniature bone-muscle module. Chosen to give
    /// the qualitative with/without-sheet separation and a negligible rise in
    /// the five-minute dangling hold; not measured values.
    pub fn module_default() -> Self {
        Self {
            c_motor: 25.0,
            c_structure: 300.0,
            r_motor_structure_sheet: 1.0,
            r_motor_structure_air: 25.0,
            r_motor_ambient: 30.0,
            r_structure_ambient: 4.0,
            t_ambient: 298.15,
        }
    }

    pub fn validate(&self) -> Result<(), ThermalError> {
        let fields = [
            ("c_motor", self.c_motor),
            ("c_structure", self.c_structure),
            ("r_motor_structure_sheet", self.r_motor_structure_sheet),
            ("r_motor_structure_air", self.r_motor_structure_air),
            ("r_motor_ambient", self.r_motor_ambient),
            ("r_structure_ambient", self.r_structure_ambient),
            ("t_ambient", self.t_ambient),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ThermalError::BadParams(format!("{name} must be positive, got {v}")));
            }
        }
        if self.r_motor_structure_sheet >= self.r_motor_structure_air {
            return Err(ThermalError::BadParams(
                "sheet resistance must be below the air-gap resistance".into(),
            ));
        }
        Ok(())
    }

    pub fn r_motor_structure(&self, with_sheet: bool) -> f64 {
        if with_sheet {
            self.r_motor_structure_sheet
        } else {
            self.r_motor_structure_air
        }
    }

    /// State matrix `A` of `d/dt [ΔT_m, ΔT_s] = A·[ΔT_m, ΔT_s] + [P/C_m, 0]`.
    fn system_matrix(&self, with_sheet: bool) -> Matrix2<f64> {
        let g_ms = 1.0 / self.r_motor_structure(with_sheet);
        let g_ma = 1.0 / self.r_motor_ambient;
        let g_sa = 1.0 / self.r_structure_ambient;
        Matrix2::new(
            -(g_ms + g_ma) / self.c_motor,
            g_ms / self.c_motor,
            g_ms / self.c_structure,
            -(g_ms + g_sa) / self.c_structure,
        )
    }

    /// Time constants of the network (fast, slow), seconds.
    pub fn time_constants(&self, with_sheet: bool) -> (f64, f64) {
        let a = self.system_matrix(with_sheet);
        let tr = a.trace();
        let det = a.determinant();
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        let (l1, l2) = (tr / 2.0 - disc, tr / 2.0 + disc);
        (-1.0 / l1, -1.0 / l2)
    }

    /// Largest stable explicit-Euler step, `2 / |λ_max|`.
    pub fn stability_limit(&self, with_sheet: bool) -> f64 {
        2.0 * self.time_constants(with_sheet).0
    }

    /// Motor-to-ambient resistance seen by a constant heat source:
    /// `R_ma ∥ (R_ms + R_sa)`.
    pub fn effective_resistance(&self, with_sheet: bool) -> f64 {
        let series = self.r_motor_structure(with_sheet) + self.r_structure_ambient;
        self.r_motor_ambient * series / (self.r_motor_ambient + series)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState {
    /// Kelvin.
    pub t_motor: f64,
    /// Kelvin.
    pub t_structure: f64,
    /// Seconds.
    pub time: f64,
}

impl ThermalState {
    pub fn ambient(params: &ThermalParams) -> Self {
        Self {
            t_motor: params.t_ambient,
            t_structure: params.t_ambient,
            time: 0.0,
        }
    }

    /// Heat stored relative to ambient, joules.
    pub fn stored_energy(&self, params: &ThermalParams) -> f64 {
        params.c_motor * (self.t_motor - params.t_ambient) + params.c_structure * (self.t_structure - params.t_ambient)
    }
}

/// Heat flow from both nodes to ambient, watts.
pub fn ambient_loss(state: &ThermalState, params: &ThermalParams) -> f64 {
    (state.t_motor - params.t_ambient) / params.r_motor_ambient
        + (state.t_structure - params.t_ambient) / params.r_structure_ambient
}

/// Closed-form steady state `(T_motor, T_structure)` for constant `p_heat`.
pub fn steady_state(params: &ThermalParams, p_heat: f64, with_sheet: bool) -> (f64, f64) {
    let rise_motor = p_heat * params.effective_resistance(with_sheet);
    let series = params.r_motor_structure(with_sheet) + params.r_structure_ambient;
    let rise_structure = rise_motor * params.r_structure_ambient / series;
    (params.t_ambient + rise_motor, params.t_ambient + rise_structure)
}

/// One explicit-Euler step.
pub fn thermal_step(
    state: &ThermalState,
    params: &ThermalParams,
    p_heat: f64,
    dt: f64,
    with_sheet: bool,
) -> Result<ThermalState, ThermalError> {
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(ThermalError::BadStep(dt));
    }
    params.validate()?;
    let limit = params.stability_limit(with_sheet);
    if dt >= limit {
        return Err(ThermalError::Unstable { dt, limit });
    }
    Ok(euler(state, params, p_heat, dt, with_sheet))
}

fn euler(state: &ThermalState, params: &ThermalParams, p_heat: f64, dt: f64, with_sheet: bool) -> ThermalState {
    let q_ms = (state.t_motor - state.t_structure) / params.r_motor_structure(with_sheet);
    let q_ma = (state.t_motor - params.t_ambient) / params.r_motor_ambient;
    let q_sa = (state.t_structure - params.t_ambient) / params.r_structure_ambient;
    ThermalState {
        t_motor: state.t_motor + dt * (p_heat - q_ms - q_ma) / params.c_motor,
        t_structure: state.t_structure + dt * (q_ms - q_sa) / params.c_structure,
        time: state.time + dt,
    }
}

/// Every integration step of a constant-power run, plus the energy ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalRun {
    pub states: Vec<ThermalState>,
    /// Joules delivered by the heat source.
    pub input_energy: f64,
    /// Joules lost to ambient, accumulated with the integrator's own rule.
    pub loss_energy: f64,
}

/// Integrates from `initial` for `duration` seconds with step `dt`; the last
/// step is shortened to land exactly on `duration`.
pub fn run_constant_power(
    params: &ThermalParams,
    initial: ThermalState,
    p_heat: f64,
    duration: f64,
    dt: f64,
    with_sheet: bool,
) -> Result<ThermalRun, ThermalError> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(ThermalError::BadDuration(duration));
    }
    // Validates dt and params once.
    thermal_step(&initial, params, p_heat, dt, with_sheet)?;
    let end = initial.time + duration;
    let steps = ((duration / dt) - 1e-9).ceil().max(1.0) as usize;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(initial);
    let (mut input, mut loss) = (0.0, 0.0);
    let mut s = initial;
    for k in 0..steps {
        let h = if k + 1 == steps { end - s.time } else { dt };
        if h <= 0.0 {
            break;
        }
        input += p_heat * h;
        loss += ambient_loss(&s, params) * h;
        s = euler(&s, params, p_heat, h, with_sheet);
        s.time = if k + 1 == steps { end } else { initial.time + (k + 1) as f64 * dt };
        states.push(s);
    }
    Ok(ThermalRun {
        states,
        input_energy: input,
        loss_energy: loss,
    })
}

/// Samples a fine-step run at whole seconds, always keeping the final state.
fn sample_at_1hz(states: &[ThermalState]) -> Vec<ThermalState> {
    let mut out = Vec::new();
    let mut next = 0.0_f64;
    for s in states {
        if s.time + 1e-9 >= next {
            out.push(ThermalState { time: next, ..*s });
            next += 1.0;
        }
    }
    let last = *states.last().expect("run has at least one state");
    if out.last().is_some_and(|s| (s.time - last.time).abs() > 1e-9) {
        out.push(last);
    }
    out
}

/// Motor heating while holding `tension` newtons, starting at ambient.
/// Returns the trace at 1 Hz plus the final state.
pub fn simulate_hold(
    params: &ThermalParams,
    spec: &ActuatorSpec,
    tension: f64,
    duration: f64,
    with_sheet: bool,
) -> Result<Vec<ThermalState>, ThermalError> {
    let p = heat_power_from_tension(spec, tension)?;
    let run = run_constant_power(params, ThermalState::ambient(params), p, duration, HOLD_DT, with_sheet)?;
    Ok(sample_at_1hz(&run.states))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DanglingReport {
    pub traces: Vec<Vec<ThermalState>>,
    /// Peak motor-temperature rise over ambient, per muscle, kelvin.
    pub max_rise: Vec<f64>,
}

impl DanglingReport {
    pub fn overall_max_rise(&self) -> f64 {
        self.max_rise.iter().copied().fold(0.0, f64::max)
    }
}

/// Per-muscle heating during a hang with the sheet fitted. Tensions must lie
/// in `[0, 30 kgf]`.
pub fn simulate_dangling(
    params: &ThermalParams,
    specs: &[ActuatorSpec],
    tensions: &[f64],
    duration: f64,
) -> Result<DanglingReport, ThermalError> {
    if specs.len() != tensions.len() {
        return Err(ThermalError::LengthMismatch {
            specs: specs.len(),
            tensions: tensions.len(),
        });
    }
    let max = kgf_to_newtons(DANGLING_RANGE_KGF.1);
    let mut traces = Vec::with_capacity(specs.len());
    let mut max_rise = Vec::with_capacity(specs.len());
    for (index, (spec, &f)) in specs.iter().zip(tensions).enumerate() {
        if !(0.0..=max).contains(&f) {
            return Err(ThermalError::TensionOutOfRange { index, value: f, max });
        }
        let trace = simulate_hold(params, spec, f, duration, true)?;
        let rise = trace
            .iter()
            .map(|s| s.t_motor - params.t_ambient)
            .fold(0.0, f64::max);
        traces.push(trace);
        max_rise.push(rise);
    }
    Ok(DanglingReport { traces, max_rise })
}
