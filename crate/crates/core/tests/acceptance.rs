//! Acceptance criteria. Runs as a plain binary so every criterion prints one
//! PASS/FAIL line; exits nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use forearm_core::actuation::{calibrate_sensor, read_calibration_csv, unit_tension_from_loadcell, SensorGeometry};
use forearm_core::analysis::{
    distribute_tension, head_speed, joint_velocities, reachable_set, slant_speed_gain, torque_bounds_all,
    Trajectory, DEFAULT_HEAD_OFFSET,
};
use forearm_core::kinematics::{check_limits, Posture};
use forearm_core::model::{load_model, straight_axis_variant, JointRole};
use forearm_core::muscle::{muscle_jacobian, muscle_jacobian_with_step, MuscleJacobian};
use forearm_core::thermal::{run_constant_power, simulate_hold, ThermalParams, ThermalState};
use forearm_core::units::kgf_to_newtons;
use forearm_core::{kengoro_forearm, thermal};
use nalgebra::{DMatrix, Vector3};
use rand::Rng;

use common::*;

// Tolerances.
const UNIT_TENSION_REL: f64 = 1e-9;
const GAIN_NOISELESS_REL: f64 = 1e-12;
const GAIN_NOISY_REL: f64 = 0.01;
const TOY_JACOBIAN_REL: f64 = 1e-6;
const TWO_STEP_ABS: f64 = 1e-5;
const QP_ARG_FRACTION: f64 = 1e-2;
const QP_OBJECTIVE_REL: f64 = 1e-4;
const QP_RESIDUAL: f64 = 1e-8;
const GAIN_PERCENT_ABS: f64 = 0.1;
const SINGLE_AXIS_REL: f64 = 1e-6;
const HEAD_SPEED_TARGET: f64 = 8.0;
const HEAD_SPEED_BAND: f64 = 0.5;
const STEADY_STATE_REL: f64 = 1e-3;
const ENERGY_BALANCE_REL: f64 = 5e-3;
const LIMIT_STEP: f64 = 1e-6;
const LINEARITY_REL: f64 = 1e-9;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_unit_tension() -> Outcome {
    let geom = SensorGeometry::tension_unit();
    let t = unit_tension_from_loadcell(&geom, kgf_to_newtons(50.0)).map_err(|e| e.to_string())?;
    let expected = kgf_to_newtons(56.5);
    let rel = (t - expected).abs() / expected;
    ensure(rel <= UNIT_TENSION_REL, || format!("{t} N vs {expected} N, rel {rel:e}"))?;
    Ok(format!("{:.6} kgf, rel err {rel:.1e}", t / 9.80665))
}

fn c2_calibration() -> Outcome {
    let ratio = 11.3 / (5.0 + 5.0);
    let clean: Vec<(f64, f64)> = (1..=20).map(|k| (k as f64 * 20.0, ratio * k as f64 * 20.0)).collect();
    let g0 = calibrate_sensor(&clean).map_err(|e| e.to_string())?.gain;
    let rel0 = (g0 - 1.13).abs() / 1.13;
    ensure(rel0 <= GAIN_NOISELESS_REL, || format!("noiseless gain {g0}, rel {rel0:e}"))?;

    let mut rng = rng(2024);
    let noisy: Vec<(f64, f64)> = (0..100)
        .map(|_| {
            let raw: f64 = rng.random_range(0.0..=490.0);
            (raw, ratio * raw * (1.0 + rng.random_range(-0.01..=0.01)))
        })
        .collect();
    let g1 = calibrate_sensor(&noisy).map_err(|e| e.to_string())?.gain;
    let rel1 = (g1 - 1.13).abs() / 1.13;
    ensure(rel1 <= GAIN_NOISY_REL, || format!("noisy gain {g1}, rel {rel1:e}"))?;

    let shipped = read_calibration_csv(include_str!("../data/calibration_samples.csv").as_bytes())
        .map_err(|e| e.to_string())?;
    let g2 = calibrate_sensor(&shipped).map_err(|e| e.to_string())?.gain;
    let rel2 = (g2 - 1.13).abs() / 1.13;
    ensure(shipped.len() == 100 && rel2 <= GAIN_NOISY_REL, || format!("shipped samples gain {g2}"))?;
    Ok(format!("noiseless rel {rel0:.1e}, noisy gain {g1:.5}, shipped file gain {g2:.5}"))
}

fn c3_jacobian() -> Outcome {
    let (a, b) = (0.04, 0.03);
    let mut worst_toy: f64 = 0.0;
    for phi0 in [0.3, 1.0, 2.0] {
        let toy = load_model(&cosine_toy_json(a * 1e3, b * 1e3, phi0)).map_err(|e| e.to_string())?;
        for theta in [-1.2, -0.4, 0.0, 0.5, 1.1] {
            let analytic = cosine_toy_derivative(a, b, phi0, theta);
            let jac = muscle_jacobian(&toy, &Posture::new().with("hinge", theta)).map_err(|e| e.to_string())?;
            let rel = (jac.matrix[(0, 0)] - analytic).abs() / analytic.abs();
            worst_toy = worst_toy.max(rel);
        }
    }
    ensure(worst_toy <= TOY_JACOBIAN_REL, || format!("toy rel err {worst_toy:e}"))?;

    let model = kengoro_forearm();
    let mut rng = rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let posture = Posture::from_ordered(&model, &random_posture(&model, &mut rng));
        let j1 = muscle_jacobian_with_step(&model, &posture, 1e-5).map_err(|e| e.to_string())?;
        let j2 = muscle_jacobian_with_step(&model, &posture, 2e-5).map_err(|e| e.to_string())?;
        worst = worst.max((&j1.matrix - &j2.matrix).amax());
    }
    ensure(worst <= TWO_STEP_ABS, || format!("two-step max diff {worst:e} m"))?;
    Ok(format!("toy rel err {worst_toy:.1e}, two-step max diff {worst:.1e} m"))
}

fn c4_bounds_vs_vertices() -> Outcome {
    let mut rng = rng(4);
    for instance in 0..200 {
        let nm = rng.random_range(1..=8);
        let nj = rng.random_range(1..=4);
        let matrix = DMatrix::from_fn(nm, nj, |_, _| {
            if rng.random_bool(0.15) {
                0.0
            } else {
                rng.random_range(-0.03..0.03)
            }
        });
        let f_max: Vec<f64> = (0..nm).map(|_| rng.random_range(10.0..500.0)).collect();
        let jac = MuscleJacobian::from_matrix(matrix.clone());
        let bounds = torque_bounds_all(&jac, &f_max).map_err(|e| e.to_string())?;
        for (j, b) in bounds.iter().enumerate() {
            let coeffs: Vec<f64> = (0..nm).map(|i| -matrix[(i, j)]).collect();
            let (lo, hi) = vertex_bounds(&coeffs, &f_max);
            ensure(b.tau_min == lo && b.tau_max == hi, || {
                format!("instance {instance} joint {j}: [{}, {}] vs vertices [{lo}, {hi}]", b.tau_min, b.tau_max)
            })?;
        }
    }
    Ok("200 instances, exact match".into())
}

fn c5_distribution_oracle() -> Outcome {
    let mut rng = rng(5);
    let mut worst_arg: f64 = 0.0;
    let mut worst_obj: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    for instance in 0..50 {
        let a: [Vec3; 2] = [
            [0, 1, 2].map(|_| rng.random_range(-0.03..0.03)),
            [0, 1, 2].map(|_| rng.random_range(-0.03..0.03)),
        ];
        let f_max: Vec3 = [0, 1, 2].map(|_| rng.random_range(100.0..500.0));
        // Target generated from an interior point, so every instance is feasible.
        let f0: Vec3 = [0, 1, 2].map(|i| rng.random_range(0.0..f_max[i]));
        let tau = [0, 1].map(|j| (0..3).map(|i| a[j][i] * f0[i]).sum::<f64>());

        // Torque coefficients are −J, so J = −A.
        let jac = MuscleJacobian::from_matrix(DMatrix::from_fn(3, 2, |i, j| -a[j][i]));
        let f = distribute_tension(&jac, &tau, &f_max).map_err(|e| format!("instance {instance}: {e}"))?;
        let f = f.values();
        let (g, g_obj) = grid_qp_oracle(&a, &tau, &f_max).ok_or(format!("instance {instance}: oracle infeasible"))?;

        let obj: f64 = f.iter().map(|x| x * x).sum();
        for i in 0..3 {
            worst_arg = worst_arg.max((f[i] - g[i]).abs() / f_max[i]);
        }
        worst_obj = worst_obj.max((obj - g_obj).abs() / g_obj.max(1.0));
        for j in 0..2 {
            let r: f64 = (0..3).map(|i| a[j][i] * f[i]).sum::<f64>() - tau[j];
            worst_res = worst_res.max(r.abs());
        }
    }
    ensure(worst_arg <= QP_ARG_FRACTION, || format!("argument diff {worst_arg:e} of f_max"))?;
    ensure(worst_obj <= QP_OBJECTIVE_REL, || format!("objective rel diff {worst_obj:e}"))?;
    ensure(worst_res <= QP_RESIDUAL, || format!("equality residual {worst_res:e} Nm"))?;
    Ok(format!(
        "arg {worst_arg:.1e}·f_max, objective rel {worst_obj:.1e}, residual {worst_res:.1e} Nm"
    ))
}

fn c6_reachability() -> Outcome {
    let slanted = kengoro_forearm();
    let straight = straight_axis_variant(&slanted).map_err(|e| e.to_string())?;
    let joints: Vec<&str> = [JointRole::Radioulnar, JointRole::WristRoll, JointRole::WristPitch]
        .into_iter()
        .map(|r| slanted.joint_by_role(r).unwrap().name.as_str())
        .collect();
    let mut detail = Vec::new();
    for res in [10, 15, 25] {
        let s = reachable_set(&slanted, &joints, res).map_err(|e| e.to_string())?;
        let t = reachable_set(&straight, &joints, res).map_err(|e| e.to_string())?;
        ensure(s.hull_volume > t.hull_volume, || {
            format!("res {res}: slanted {:e} <= straight {:e}", s.hull_volume, t.hull_volume)
        })?;
        let span = s.extent.span();
        detail.push(format!(
            "res {res}: {:.4e} > {:.4e} m3, slanted extents {:.3}/{:.3}/{:.3} m",
            s.hull_volume, t.hull_volume, span.x, span.y, span.z
        ));
    }
    Ok(detail.join("; "))
}

fn c7_swing_arithmetic() -> Outcome {
    let g = slant_speed_gain(7.0, 0.050, 8.0).map_err(|e| e.to_string())?;
    // Binary 7.0 × 0.05 lands one ulp above the double nearest 0.35.
    let ulp = 0.35f64.next_up() - 0.35;
    ensure((g.delta_v - 0.35).abs() <= ulp, || format!("Δv {}", g.delta_v))?;
    ensure((g.percent - 4.375).abs() <= 1e-12, || format!("percent {}", g.percent))?;
    ensure((g.percent - 4.3).abs() <= GAIN_PERCENT_ABS, || format!("percent {} vs about 4.3", g.percent))?;

    // Pure elbow rotation at constant ω.
    let model = kengoro_forearm();
    let omega = 7.0;
    let dt = 1e-5;
    let elbow = model.joint_by_role(JointRole::Elbow).unwrap();
    let times: Vec<f64> = (0..5).map(|k| k as f64 * dt).collect();
    let angles = times.iter().map(|t| vec![-1.0 + omega * t]).collect();
    let traj = Trajectory::new(vec![elbow.name.clone()], times, angles).map_err(|e| e.to_string())?;
    let offset = Vector3::from(DEFAULT_HEAD_OFFSET);
    let speed = head_speed(&model, &traj, &offset).map_err(|e| e.to_string())?;

    let mut zero = vec![0.0; model.dof()];
    let ei = model.joint_index(&elbow.name).unwrap();
    zero[ei] = -1.0;
    let hand = &model.metadata().palm_marker.as_ref().unwrap().link;
    let p = oracle_point(&model, hand, &[offset.x, offset.y, offset.z], &zero);
    let (_, origin) = oracle_link_pose(&model, &elbow.child_link, &zero);
    let axis = elbow.axis.normalize();
    let d = Vector3::new(p[0] - origin[0], p[1] - origin[1], p[2] - origin[2]);
    let r = (d - axis * axis.dot(&d)).norm();
    let expected = omega * r;
    let worst = speed
        .speeds
        .iter()
        .map(|s| (s - expected).abs() / expected)
        .fold(0.0, f64::max);
    ensure(worst <= SINGLE_AXIS_REL, || format!("single-axis speed rel err {worst:e}"))?;
    Ok(format!(
        "Δv {:.17} m/s, {:.3} %, single-axis rel err {worst:.1e}",
        g.delta_v, g.percent
    ))
}

fn c8_swing_ordering() -> Outcome {
    let model = kengoro_forearm();
    let traj = Trajectory::from_csv(include_str!("../data/swing_trajectory.csv").as_bytes()).map_err(|e| e.to_string())?;
    let v = joint_velocities(&traj).map_err(|e| e.to_string())?;
    let (fastest, peak_w) = v.fastest_joint().ok_or("empty trajectory")?;
    let radioulnar = &model.joint_by_role(JointRole::Radioulnar).unwrap().name;
    ensure(&fastest == radioulnar, || format!("fastest joint is {fastest}"))?;
    let (t, peak) = head_speed(&model, &traj, &Vector3::from(DEFAULT_HEAD_OFFSET))
        .map_err(|e| e.to_string())?
        .peak();
    ensure((peak - HEAD_SPEED_TARGET).abs() <= HEAD_SPEED_BAND, || format!("peak head speed {peak} m/s"))?;
    Ok(format!("fastest {fastest} at {peak_w:.3} rad/s, peak head speed {peak:.3} m/s at {t:.3} s"))
}

fn c9_thermal() -> Outcome {
    let params = ThermalParams::module_default();
    let model = kengoro_forearm();
    let spec = model.actuators()[0].spec;
    let hold = |kgf: f64, sheet: bool| simulate_hold(&params, &spec, kgf_to_newtons(kgf), 600.0, sheet);
    let mut traces = Vec::new();
    for kgf in [20.0, 40.0] {
        let with = hold(kgf, true).map_err(|e| e.to_string())?;
        let without = hold(kgf, false).map_err(|e| e.to_string())?;
        for (a, b) in with.iter().zip(&without).skip(1) {
            ensure(a.t_motor <= b.t_motor, || format!("{kgf} kgf: sheet hotter at t = {}", a.time))?;
        }
        traces.push((with, without));
    }
    for k in 0..2 {
        let (lo, hi) = if k == 0 { (&traces[0].0, &traces[1].0) } else { (&traces[0].1, &traces[1].1) };
        for (a, b) in lo.iter().zip(hi) {
            ensure(a.t_motor <= b.t_motor, || format!("20 kgf above 40 kgf at t = {}", a.time))?;
        }
    }

    // Closed-form network solution, written out here.
    let p = 1.5;
    let mut worst_ss: f64 = 0.0;
    for sheet in [true, false] {
        let r_ms = if sheet { params.r_motor_structure_sheet } else { params.r_motor_structure_air };
        let series = r_ms + params.r_structure_ambient;
        let r_eff = params.r_motor_ambient * series / (params.r_motor_ambient + series);
        let tm = params.t_ambient + p * r_eff;
        let ts = params.t_ambient + p * r_eff * params.r_structure_ambient / series;
        let (_, slow) = params.time_constants(sheet);
        let run = run_constant_power(&params, ThermalState::ambient(&params), p, 10.0 * slow, thermal::HOLD_DT, sheet)
            .map_err(|e| e.to_string())?;
        let last = run.states.last().unwrap();
        worst_ss = worst_ss
            .max((last.t_motor - tm).abs() / (tm - params.t_ambient))
            .max((last.t_structure - ts).abs() / (ts - params.t_ambient));
    }
    ensure(worst_ss <= STEADY_STATE_REL, || format!("steady-state rel err {worst_ss:e}"))?;

    // Energy balance with losses integrated by the trapezoid rule from the trace.
    let mut worst_eb: f64 = 0.0;
    for sheet in [true, false] {
        let run = run_constant_power(&params, ThermalState::ambient(&params), p, 600.0, 0.1, sheet)
            .map_err(|e| e.to_string())?;
        let loss_rate = |s: &ThermalState| {
            (s.t_motor - params.t_ambient) / params.r_motor_ambient
                + (s.t_structure - params.t_ambient) / params.r_structure_ambient
        };
        let loss: f64 = run
            .states
            .windows(2)
            .map(|w| 0.5 * (loss_rate(&w[0]) + loss_rate(&w[1])) * (w[1].time - w[0].time))
            .sum();
        let last = run.states.last().unwrap();
        let stored = params.c_motor * (last.t_motor - params.t_ambient)
            + params.c_structure * (last.t_structure - params.t_ambient);
        let input = p * 600.0;
        worst_eb = worst_eb.max((input - stored - loss).abs() / input);
    }
    ensure(worst_eb <= ENERGY_BALANCE_REL, || format!("energy balance rel err {worst_eb:e}"))?;
    Ok(format!("orderings hold, steady-state rel {worst_ss:.1e}, energy balance rel {worst_eb:.1e}"))
}

fn c10_limits() -> Outcome {
    let model = kengoro_forearm();
    let table = [
        (JointRole::Elbow, -145.0, 0.0),
        (JointRole::Radioulnar, -85.0, 85.0),
        (JointRole::WristRoll, -75.0, 85.0),
        (JointRole::WristPitch, -15.0, 45.0),
    ];
    for (role, lo, hi) in table {
        let name = &model.joint_by_role(role).unwrap().name;
        for (deg, outward) in [(lo, -LIMIT_STEP), (hi, LIMIT_STEP)] {
            let at = Posture::zeros(&model).with(name, f64::to_radians(deg));
            ensure(check_limits(&model, &at).all_pass(), || format!("{name} rejects {deg} deg"))?;
            let beyond = Posture::zeros(&model).with(name, f64::to_radians(deg) + outward);
            let rep = check_limits(&model, &beyond);
            ensure(!rep.get(name).unwrap().pass, || format!("{name} accepts {deg} deg + {outward} rad"))?;
        }
    }
    Ok("8 boundaries accepted, 8 outside rejected".into())
}

fn c11_antagonism() -> Outcome {
    let model = kengoro_forearm();
    let jac = muscle_jacobian(&model, &Posture::zeros(&model)).map_err(|e| e.to_string())?;
    let f424 = vec![424.0; model.muscles().len()];
    let b1 = torque_bounds_all(&jac, &f424).map_err(|e| e.to_string())?;
    let b2 = torque_bounds_all(&jac, &f424.iter().map(|f| 2.5 * f).collect::<Vec<_>>()).map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    for role in [JointRole::Elbow, JointRole::Radioulnar, JointRole::WristRoll, JointRole::WristPitch] {
        let name = &model.joint_by_role(role).unwrap().name;
        let j = jac.joint_index(name).unwrap();
        let b = &b1[j];
        ensure(b.tau_min < 0.0 && b.tau_max > 0.0, || {
            format!("{name}: [{}, {}] Nm does not span zero", b.tau_min, b.tau_max)
        })?;
        for (x1, x2) in [(b.tau_min, b2[j].tau_min), (b.tau_max, b2[j].tau_max)] {
            let rel = (x2 - 2.5 * x1).abs() / x1.abs();
            ensure(rel <= LINEARITY_REL, || format!("{name}: scaling rel err {rel:e}"))?;
        }
        detail.push(format!("{name} [{:.2}, {:.2}]", b.tau_min, b.tau_max));
    }
    Ok(format!("{} Nm", detail.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 11] = [
        ("unit tension from load cell", Duration::from_millis(1), c1_unit_tension),
        ("calibration recovery", Duration::from_secs(1), c2_calibration),
        ("jacobian correctness", Duration::from_secs(10), c3_jacobian),
        ("torque bounds vs vertex enumeration", Duration::from_secs(10), c4_bounds_vs_vertices),
        ("tension distribution vs grid oracle", Duration::from_secs(60), c5_distribution_oracle),
        ("slanted axis enlarges reachable hull", Duration::from_secs(60), c6_reachability),
        ("swing arithmetic", Duration::from_secs(1), c7_swing_arithmetic),
        ("swing ordering and peak speed", Duration::from_secs(1), c8_swing_ordering),
        ("thermal properties", Duration::from_secs(5), c9_thermal),
        ("joint limits", Duration::from_millis(1), c10_limits),
        ("antagonistic torque bounds", Duration::from_secs(1), c11_antagonism),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > *budget => Err(format!("{d}; took {elapsed:?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({elapsed:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({elapsed:.2?})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
