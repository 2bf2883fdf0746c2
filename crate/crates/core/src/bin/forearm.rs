use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use forearm_core::actuation::{
    calibrate_sensor, read_calibration_csv, synthetic_calibration_samples, ActuatorSpec, SensorGeometry,
};
use forearm_core::analysis::{
    distribute_tension, head_speed, joint_velocities, reachable_set, torque_bounds_all, AnalysisError, Trajectory,
    DEFAULT_HEAD_OFFSET,
};
use forearm_core::csv_io::{self, sci};
use forearm_core::kinematics::{check_limits, Posture};
use forearm_core::model::{load_model_file, straight_axis_variant, JointRole, RobotModel};
use forearm_core::muscle::muscle_jacobian;
use forearm_core::thermal::{simulate_hold, ThermalParams};
use forearm_core::units::kgf_to_newtons;
use forearm_core::{report, Error};
use nalgebra::Vector3;

#[derive(Parser)]
#[command(name = "forearm", version, about = "Tendon-driven forearm analysis tools")]
struct Cli {
    /// Model description (JSON). Defaults to the shipped forearm.
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for generated test data.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PostureArgs {
    /// CSV of `joint,angle_rad` lines.
    #[arg(long)]
    posture: Option<PathBuf>,
    /// Inline joint angle, `name=radians`. Repeatable.
    #[arg(long = "angle", value_name = "NAME=RAD")]
    angles: Vec<String>,
    /// Inline joint angle, `name=degrees`. Repeatable.
    #[arg(long = "angle-deg", value_name = "NAME=DEG")]
    angles_deg: Vec<String>,
}

#[derive(Args)]
struct TensionLimitArgs {
    /// Per-muscle tension limit in newtons (default: each actuator's continuous maximum).
    #[arg(long = "f-max-n", conflicts_with = "f_max_kgf")]
    f_max_n: Option<f64>,
    /// Per-muscle tension limit in kilogram-force.
    #[arg(long = "f-max-kgf")]
    f_max_kgf: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Link poses and palm point for a posture.
    Fk {
        #[command(flatten)]
        posture: PostureArgs,
        /// Fail with status 2 if any joint is outside its limits.
        #[arg(long)]
        check_limits: bool,
    },
    /// Palm points over a joint grid, with hull volume and extents.
    Workspace {
        /// Comma-separated joints to sweep (default: radioulnar, wrist roll, wrist pitch).
        #[arg(long, value_delimiter = ',')]
        joints: Vec<String>,
        #[arg(long, default_value_t = 10)]
        resolution: usize,
        /// Use the straight-axis variant of the model.
        #[arg(long)]
        straight_axis: bool,
    },
    /// Feasible torque range per joint.
    TorqueBounds {
        #[command(flatten)]
        posture: PostureArgs,
        /// Report only this joint.
        #[arg(long)]
        joint: Option<String>,
        #[command(flatten)]
        limits: TensionLimitArgs,
    },
    /// Minimum-norm tensions for target joint torques.
    Distribute {
        #[command(flatten)]
        posture: PostureArgs,
        /// Target torque, `joint=Nm`. Repeatable; unlisted joints get zero.
        #[arg(long = "tau", value_name = "JOINT=NM")]
        tau: Vec<String>,
        #[command(flatten)]
        limits: TensionLimitArgs,
    },
    /// Motor temperature while holding a constant tension.
    Thermal {
        #[arg(long = "tension-n", conflicts_with = "tension_kgf", required_unless_present = "tension_kgf")]
        tension_n: Option<f64>,
        #[arg(long = "tension-kgf")]
        tension_kgf: Option<f64>,
        /// Seconds.
        #[arg(long, default_value_t = 600.0)]
        duration: f64,
        /// Heat-transfer sheet fitted.
        #[arg(long)]
        sheet: bool,
        /// Actuator name from the model (default: the first one).
        #[arg(long)]
        actuator: Option<String>,
    },
    /// Joint velocities and racket-head speed along a trajectory.
    Swing {
        /// CSV `time_s,<joint names...>`, radians.
        #[arg(long)]
        traj: PathBuf,
        /// Head position on the hand link, `x,y,z` in meters.
        #[arg(long, value_delimiter = ',', num_args = 3, allow_negative_numbers = true)]
        head_offset: Option<Vec<f64>>,
    },
    /// Fit the tension-unit gain and offset.
    Calibrate {
        /// CSV of `raw,tension_newtons` samples.
        #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
        samples: Option<PathBuf>,
        /// Generate this many samples from the lever ratio instead (written to --out).
        #[arg(long)]
        synthetic: Option<usize>,
        /// Relative noise amplitude for generated samples.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Load and validate the model.
    Validate,
}

enum Failure {
    Infeasible(String),
    Input(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Infeasible(_) => 1,
            Failure::Input(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Infeasible(m) | Failure::Input(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Analysis(
                a @ (AnalysisError::InfeasibleJoint { .. }
                | AnalysisError::InfeasibleCoupled
                | AnalysisError::NoConvergence(_)),
            ) => Failure::Infeasible(a.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

macro_rules! impl_from_error {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Error::from(e).into()
            }
        }
    )*};
}

impl_from_error!(
    forearm_core::model::ModelError,
    forearm_core::kinematics::KinematicsError,
    forearm_core::muscle::MuscleError,
    forearm_core::actuation::ActuationError,
    forearm_core::thermal::ThermalError,
    AnalysisError,
    forearm_core::csv_io::CsvError,
    io::Error
);

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let model = match &cli.model {
        Some(path) => load_model_file(path)?,
        None => forearm_core::kengoro_forearm(),
    };
    let mut out = output(cli.out.as_deref())?;
    match &cli.command {
        Command::Fk { posture, check_limits: check } => {
            let posture = read_posture(&model, posture)?;
            if *check {
                let rep = check_limits(&model, &posture);
                if let Some(bad) = rep.failures().next() {
                    return Err(input(format!(
                        "joint `{}` angle {} rad is outside [{}, {}] rad",
                        bad.joint,
                        bad.angle.map_or("missing".to_string(), |a| a.to_string()),
                        bad.angle_min,
                        bad.angle_max
                    )));
                }
                drop(rep);
            }
            out.write_all(report::fk_report(&model, &posture)?.as_bytes())?;
        }
        Command::Workspace {
            joints,
            resolution,
            straight_axis,
        } => {
            let model = if *straight_axis {
                straight_axis_variant(&model)?
            } else {
                model
            };
            let joints = if joints.is_empty() {
                default_sweep(&model)?
            } else {
                joints.clone()
            };
            let names: Vec<&str> = joints.iter().map(String::as_str).collect();
            let result = reachable_set(&model, &names, *resolution)?;
            csv_io::write_points(&mut out, &result.points)?;
            eprint!("{}", report::workspace_summary(&result));
        }
        Command::TorqueBounds {
            posture,
            joint,
            limits,
        } => {
            let posture = read_posture(&model, posture)?;
            let jac = muscle_jacobian(&model, &posture)?;
            let bounds = torque_bounds_all(&jac, &tension_limits(&model, limits)?)?;
            if let Some(j) = joint {
                if !bounds.iter().any(|b| &b.joint == j) {
                    return Err(AnalysisError::UnknownJoint(j.clone()).into());
                }
            }
            writeln!(out, "joint,tau_min_nm,tau_max_nm")?;
            for b in bounds.iter().filter(|b| joint.as_ref().is_none_or(|j| &b.joint == j)) {
                writeln!(out, "{},{},{}", b.joint, sci(b.tau_min), sci(b.tau_max))?;
            }
        }
        Command::Distribute { posture, tau, limits } => {
            let posture = read_posture(&model, posture)?;
            let jac = muscle_jacobian(&model, &posture)?;
            let mut tau_des = vec![0.0; jac.num_joints()];
            for (name, value) in tau.iter().map(|s| parse_assignment(s)).collect::<Result<Vec<_>, _>>()? {
                let j = jac
                    .joint_index(&name)
                    .ok_or_else(|| AnalysisError::UnknownJoint(name.clone()))?;
                tau_des[j] = value;
            }
            let f = distribute_tension(&jac, &tau_des, &tension_limits(&model, limits)?)?;
            csv_io::write_tensions(&mut out, &jac.muscle_order, f.values())?;
            eprintln!("sum of squares: {} N^2", sci(f.values().iter().map(|x| x * x).sum()));
        }
        Command::Thermal {
            tension_n,
            tension_kgf,
            duration,
            sheet,
            actuator,
        } => {
            let tension = tension_n.or(tension_kgf.map(kgf_to_newtons)).expect("clap requires one");
            let spec = pick_actuator(&model, actuator.as_deref())?;
            let params = ThermalParams::module_default();
            let trace = simulate_hold(&params, &spec, tension, *duration, *sheet)?;
            csv_io::write_thermal_trace(&mut out, &trace)?;
            let last = trace.last().expect("trace is never empty");
            eprintln!(
                "final T_motor: {} K (rise {} K), sheet: {}",
                sci(last.t_motor),
                sci(last.t_motor - params.t_ambient),
                if *sheet { "yes" } else { "no" }
            );
        }
        Command::Swing { traj, head_offset } => {
            let traj = Trajectory::from_csv(BufReader::new(open(traj)?))?;
            let offset = match head_offset {
                Some(v) => Vector3::new(v[0], v[1], v[2]),
                None => Vector3::from(DEFAULT_HEAD_OFFSET),
            };
            let velocities = joint_velocities(&traj)?;
            let profile = head_speed(&model, &traj, &offset)?;
            csv_io::write_speed_profile(&mut out, &profile)?;
            for (name, peak) in velocities.peak_abs() {
                eprintln!("peak |velocity| {name}: {} rad/s", sci(peak));
            }
            if let Some((name, _)) = velocities.fastest_joint() {
                eprintln!("fastest joint: {name}");
            }
            let (t, v) = profile.peak();
            eprintln!("peak head speed: {} m/s at t = {} s", sci(v), sci(t));
        }
        Command::Calibrate {
            samples,
            synthetic,
            noise,
        } => {
            let data = match (samples, synthetic) {
                (Some(path), _) => read_calibration_csv(BufReader::new(open(path)?))?,
                (None, Some(n)) => {
                    let data = synthetic_calibration_samples(&SensorGeometry::tension_unit(), *n, *noise, cli.seed)?;
                    csv_io::write_calibration_samples(&mut out, &data)?;
                    data
                }
                (None, None) => unreachable!("clap requires one"),
            };
            let cal = calibrate_sensor(&data)?;
            let summary = format!(
                "gain,offset_n,rms_residual_n\n{},{},{}\n",
                sci(cal.gain),
                sci(cal.offset),
                sci(cal.rms_residual)
            );
            if synthetic.is_some() {
                eprint!("{summary}");
            } else {
                out.write_all(summary.as_bytes())?;
            }
        }
        Command::Validate => {
            writeln!(
                out,
                "model `{}`: {} links, {} joints, {} muscles, {} actuators",
                model.name(),
                model.links().len(),
                model.joints().len(),
                model.muscles().len(),
                model.actuators().len()
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open(path: &Path) -> Result<File, Failure> {
    File::open(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn parse_assignment(s: &str) -> Result<(String, f64), Failure> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| input(format!("expected NAME=VALUE, got `{s}`")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| input(format!("`{value}` is not a number")))?;
    Ok((name.trim().to_string(), value))
}

/// Zero posture, overlaid with the file and then inline angles.
fn read_posture(model: &RobotModel, args: &PostureArgs) -> Result<Posture, Failure> {
    let mut posture = Posture::zeros(model);
    let mut set = |name: &str, angle: f64| -> Result<(), Failure> {
        if model.joint(name).is_none() {
            return Err(input(format!("unknown joint `{name}`")));
        }
        posture.set(name, angle);
        Ok(())
    };
    if let Some(path) = &args.posture {
        let from_file = csv_io::read_posture(BufReader::new(open(path)?))?;
        for (name, angle) in from_file.iter() {
            set(name, angle)?;
        }
    }
    for s in &args.angles {
        let (name, a) = parse_assignment(s)?;
        set(&name, a)?;
    }
    for s in &args.angles_deg {
        let (name, a) = parse_assignment(s)?;
        set(&name, a.to_radians())?;
    }
    Ok(posture)
}

fn tension_limits(model: &RobotModel, args: &TensionLimitArgs) -> Result<Vec<f64>, Failure> {
    let n = model.muscles().len();
    let uniform = args.f_max_n.or(args.f_max_kgf.map(kgf_to_newtons));
    Ok(match uniform {
        Some(f) if !(f >= 0.0 && f.is_finite()) => return Err(input(format!("tension limit {f} N is invalid"))),
        Some(f) => vec![f; n],
        None => (0..n).map(|i| model.muscle_actuator(i).continuous_max_tension).collect(),
    })
}

fn pick_actuator(model: &RobotModel, name: Option<&str>) -> Result<ActuatorSpec, Failure> {
    match name {
        Some(n) => model
            .actuator(n)
            .copied()
            .ok_or_else(|| input(format!("unknown actuator `{n}`"))),
        None => model
            .actuators()
            .first()
            .map(|a| a.spec)
            .ok_or_else(|| input("model has no actuators")),
    }
}

fn default_sweep(model: &RobotModel) -> Result<Vec<String>, Failure> {
    [JointRole::Radioulnar, JointRole::WristRoll, JointRole::WristPitch]
        .into_iter()
        .map(|role| {
            model
                .joint_by_role(role)
                .map(|j| j.name.clone())
                .ok_or_else(|| input(format!("model has no {role:?} joint")))
        })
        .collect()
}
