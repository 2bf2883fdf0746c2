//! Workspace reachability, feasible torque bounds, tension distribution and
//! swing-speed analysis.

mod hull;
pub mod qp;
mod swing;
mod tension;
mod workspace;

use thiserror::Error;

use crate::kinematics::KinematicsError;
use crate::muscle::MuscleError;

pub use hull::convex_hull_volume;
pub use swing::{
    head_speed, joint_velocities, slant_speed_gain, DEFAULT_HEAD_OFFSET, SpeedGain, SpeedProfile, Trajectory, VelocityProfile,
};
pub use tension::{distribute_tension, torque_bounds, torque_bounds_all, TorqueBounds};
pub use workspace::{reachable_set, reachable_set_with_limits, Extent, ReachabilityResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("unknown joint `{0}`")]
    UnknownJoint(String),
    #[error("grid resolution must be at least 2, got {0}")]
    Resolution(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("maximum tension for muscle {index} is negative or non-finite ({value} N)")]
    BadTensionLimit { index: usize, value: f64 },
    #[error("torque target {tau} Nm on joint `{joint}` is outside the feasible range [{tau_min}, {tau_max}] Nm")]
    InfeasibleJoint {
        joint: String,
        tau: f64,
        tau_min: f64,
        tau_max: f64,
    },
    #[error("torque target is jointly infeasible although each joint is within its own bounds")]
    InfeasibleCoupled,
    #[error("quadratic program did not converge in {0} iterations")]
    NoConvergence(usize),
    #[error("trajectory needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("trajectory times must be strictly increasing (sample {0})")]
    NonMonotonicTime(usize),
    #[error("{0} must be nonnegative")]
    Negative(&'static str),
    #[error("total speed must be positive to express a percentage")]
    ZeroTotal,
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Muscle(#[from] MuscleError),
}
