//! Muscle path lengths, the moment-arm Jacobian and the tension-to-torque map.
//!
//! Muscles are routed as straight segments through their via points. Sign
//! convention used throughout the crate: `τ = −Jᵀ f`, where `J[i][j] =
//! ∂lᵢ/∂θⱼ`. A muscle that shortens as a joint angle grows therefore pulls that
//! joint in the positive direction.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::kinematics::{link_poses, point_on_link, KinematicsError, Posture};
use crate::model::RobotModel;

/// Finite-difference step for the Jacobian, radians.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MuscleError {
    #[error("unknown muscle `{0}`")]
    UnknownMuscle(String),
    #[error("unknown joint `{0}`")]
    UnknownJoint(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("tension for muscle {index} is negative or non-finite ({value} N)")]
    NegativeTension { index: usize, value: f64 },
    #[error("tension for muscle {index} ({value} N) exceeds continuous maximum {max} N")]
    AboveContinuousMax { index: usize, value: f64, max: f64 },
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

/// `∂(muscle length)/∂(joint angle)`, meters per radian; rows are muscles and
/// columns joints.
#[derive(Debug, Clone, PartialEq)]
pub struct MuscleJacobian {
    pub matrix: DMatrix<f64>,
    pub muscle_order: Vec<String>,
    pub joint_order: Vec<String>,
}

impl MuscleJacobian {
    pub fn new(matrix: DMatrix<f64>, muscle_order: Vec<String>, joint_order: Vec<String>) -> Result<Self, MuscleError> {
        if matrix.nrows() != muscle_order.len() {
            return Err(MuscleError::DimensionMismatch {
                expected: muscle_order.len(),
                got: matrix.nrows(),
            });
        }
        if matrix.ncols() != joint_order.len() {
            return Err(MuscleError::DimensionMismatch {
                expected: joint_order.len(),
                got: matrix.ncols(),
            });
        }
        Ok(Self {
            matrix,
            muscle_order,
            joint_order,
        })
    }

    /// Builds a Jacobian with generated names (`m0..`, `j0..`).
    pub fn from_matrix(matrix: DMatrix<f64>) -> Self {
        let muscle_order = (0..matrix.nrows()).map(|i| format!("m{i}")).collect();
        let joint_order = (0..matrix.ncols()).map(|j| format!("j{j}")).collect();
        Self {
            matrix,
            muscle_order,
            joint_order,
        }
    }

    pub fn num_muscles(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_joints(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn joint_index(&self, joint: &str) -> Option<usize> {
        self.joint_order.iter().position(|j| j == joint)
    }

    /// Torque per newton of muscle `i` on joint `j`: `(−Jᵀ)[j][i]`.
    pub fn torque_coefficient(&self, joint: usize, muscle: usize) -> f64 {
        -self.matrix[(muscle, joint)]
    }
}

/// Per-muscle tensions in newtons, all nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct TensionVector {
    values: Vec<f64>,
    /// When set, every entry is bounded by its actuator's continuous maximum.
    continuous: bool,
}

impl TensionVector {
    pub fn new(values: Vec<f64>) -> Result<Self, MuscleError> {
        for (index, &value) in values.iter().enumerate() {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(MuscleError::NegativeTension { index, value });
            }
        }
        Ok(Self {
            values,
            continuous: false,
        })
    }

    /// Tensions that must stay within the continuous ratings of `model`'s
    /// actuators.
    pub fn continuous(values: Vec<f64>, model: &RobotModel) -> Result<Self, MuscleError> {
        let mut t = Self::new(values)?;
        if t.values.len() != model.muscles().len() {
            return Err(MuscleError::DimensionMismatch {
                expected: model.muscles().len(),
                got: t.values.len(),
            });
        }
        for (index, &value) in t.values.iter().enumerate() {
            let max = model.muscle_actuator(index).continuous_max_tension;
            if value > max {
                return Err(MuscleError::AboveContinuousMax { index, value, max });
            }
        }
        t.continuous = true;
        Ok(t)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
            continuous: false,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }
}

fn path_length(model: &RobotModel, poses: &[nalgebra::Isometry3<f64>], muscle: usize) -> f64 {
    let m = &model.muscles()[muscle];
    let mut points = m.waypoints.iter().map(|w| {
        let li = model.link_index(&w.link).expect("validated waypoint link");
        point_on_link(poses, li, &w.offset)
    });
    let mut prev = points.next().expect("at least two waypoints");
    let mut total = 0.0;
    for p in points {
        total += (p - prev).norm();
        prev = p;
    }
    total
}

fn all_lengths(model: &RobotModel, angles: &[f64]) -> Vec<f64> {
    let poses = link_poses(model, angles);
    (0..model.muscles().len()).map(|i| path_length(model, &poses, i)).collect()
}

/// Polyline length of `muscle` through its via points, meters.
pub fn muscle_length(model: &RobotModel, posture: &Posture, muscle: &str) -> Result<f64, MuscleError> {
    let mi = model
        .muscle_index(muscle)
        .ok_or_else(|| MuscleError::UnknownMuscle(muscle.to_owned()))?;
    let poses = link_poses(model, &posture.ordered(model)?);
    Ok(path_length(model, &poses, mi))
}

/// Lengths of every muscle in model order.
pub fn muscle_lengths(model: &RobotModel, posture: &Posture) -> Result<Vec<f64>, MuscleError> {
    Ok(all_lengths(model, &posture.ordered(model)?))
}

/// Central-difference Jacobian with step [`DEFAULT_FD_STEP`].
pub fn muscle_jacobian(model: &RobotModel, posture: &Posture) -> Result<MuscleJacobian, MuscleError> {
    muscle_jacobian_with_step(model, posture, DEFAULT_FD_STEP)
}

pub fn muscle_jacobian_with_step(model: &RobotModel, posture: &Posture, step: f64) -> Result<MuscleJacobian, MuscleError> {
    let base = posture.ordered(model)?;
    let (nm, nj) = (model.muscles().len(), model.dof());
    let mut matrix = DMatrix::zeros(nm, nj);
    let mut angles = base.clone();
    for j in 0..nj {
        angles[j] = base[j] + step;
        let plus = all_lengths(model, &angles);
        angles[j] = base[j] - step;
        let minus = all_lengths(model, &angles);
        angles[j] = base[j];
        for i in 0..nm {
            matrix[(i, j)] = (plus[i] - minus[i]) / (2.0 * step);
        }
    }
    Ok(MuscleJacobian {
        matrix,
        muscle_order: model.muscles().iter().map(|m| m.name.clone()).collect(),
        joint_order: model.joints().iter().map(|j| j.name.clone()).collect(),
    })
}

/// `τ = −Jᵀ f`, summed in muscle order.
pub fn torque_from_tensions(jac: &MuscleJacobian, tensions: &TensionVector) -> Result<DVector<f64>, MuscleError> {
    let f = tensions.values();
    if f.len() != jac.num_muscles() {
        return Err(MuscleError::DimensionMismatch {
            expected: jac.num_muscles(),
            got: f.len(),
        });
    }
    let mut tau = DVector::zeros(jac.num_joints());
    for j in 0..jac.num_joints() {
        let mut acc = 0.0;
        for (i, fi) in f.iter().enumerate() {
            acc += jac.torque_coefficient(j, i) * fi;
        }
        tau[j] = acc;
    }
    Ok(tau)
}

/// Moment arm `−∂l/∂θ` of one muscle about one joint, meters.
pub fn moment_arm(model: &RobotModel, posture: &Posture, muscle: &str, joint: &str) -> Result<f64, MuscleError> {
    let mi = model
        .muscle_index(muscle)
        .ok_or_else(|| MuscleError::UnknownMuscle(muscle.to_owned()))?;
    let ji = model
        .joint_index(joint)
        .ok_or_else(|| MuscleError::UnknownJoint(joint.to_owned()))?;
    let mut angles = posture.ordered(model)?;
    let theta = angles[ji];
    let h = DEFAULT_FD_STEP;
    angles[ji] = theta + h;
    let plus = path_length(model, &link_poses(model, &angles), mi);
    angles[ji] = theta - h;
    let minus = path_length(model, &link_poses(model, &angles), mi);
    Ok(-(plus - minus) / (2.0 * h))
}
