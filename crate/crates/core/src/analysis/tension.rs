use nalgebra::DVector;

use super::qp::{solve_least_distance, QpError};
use super::AnalysisError;
use crate::muscle::{MuscleJacobian, TensionVector};

/// Extreme torques one joint can receive with every muscle in `[0, f_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorqueBounds {
    pub joint: String,
    pub tau_min: f64,
    pub tau_max: f64,
}

impl TorqueBounds {
    pub fn contains(&self, tau: f64) -> bool {
        self.tau_min <= tau && tau <= self.tau_max
    }

    /// Both signs reachable.
    pub fn spans_zero_strictly(&self) -> bool {
        self.tau_min < 0.0 && self.tau_max > 0.0
    }
}

fn check_f_max(jac: &MuscleJacobian, f_max: &[f64]) -> Result<(), AnalysisError> {
    if f_max.len() != jac.num_muscles() {
        return Err(AnalysisError::DimensionMismatch {
            expected: jac.num_muscles(),
            got: f_max.len(),
        });
    }
    for (index, &value) in f_max.iter().enumerate() {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(AnalysisError::BadTensionLimit { index, value });
        }
    }
    Ok(())
}

fn bounds_for_index(jac: &MuscleJacobian, f_max: &[f64], j: usize) -> TorqueBounds {
    // Linear objective over a box: each muscle sits at whichever end helps.
    let (mut lo, mut hi) = (0.0, 0.0);
    for (i, &fm) in f_max.iter().enumerate() {
        let c = jac.torque_coefficient(j, i);
        if c > 0.0 {
            hi += c * fm;
        } else if c < 0.0 {
            lo += c * fm;
        }
    }
    TorqueBounds {
        joint: jac.joint_order[j].clone(),
        tau_min: lo,
        tau_max: hi,
    }
}

/// Closed-form min/max of `τ_joint = Σᵢ (−Jᵀ)[joint][i] fᵢ` over `0 ≤ f ≤ f_max`.
pub fn torque_bounds(jac: &MuscleJacobian, f_max: &[f64], joint: &str) -> Result<TorqueBounds, AnalysisError> {
    check_f_max(jac, f_max)?;
    let j = jac
        .joint_index(joint)
        .ok_or_else(|| AnalysisError::UnknownJoint(joint.to_owned()))?;
    Ok(bounds_for_index(jac, f_max, j))
}

pub fn torque_bounds_all(jac: &MuscleJacobian, f_max: &[f64]) -> Result<Vec<TorqueBounds>, AnalysisError> {
    check_f_max(jac, f_max)?;
    Ok((0..jac.num_joints()).map(|j| bounds_for_index(jac, f_max, j)).collect())
}

/// Minimum-norm tensions realising `tau_des`:
///
/// ```text
/// minimize ‖f‖²  subject to  −Jᵀf = τ_des,  0 ≤ f ≤ f_max
/// ```
pub fn distribute_tension(jac: &MuscleJacobian, tau_des: &[f64], f_max: &[f64]) -> Result<TensionVector, AnalysisError> {
    check_f_max(jac, f_max)?;
    let (nm, nj) = (jac.num_muscles(), jac.num_joints());
    if tau_des.len() != nj {
        return Err(AnalysisError::DimensionMismatch {
            expected: nj,
            got: tau_des.len(),
        });
    }
    for (j, &tau) in tau_des.iter().enumerate() {
        let b = bounds_for_index(jac, f_max, j);
        if !b.contains(tau) {
            return Err(AnalysisError::InfeasibleJoint {
                joint: b.joint,
                tau,
                tau_min: b.tau_min,
                tau_max: b.tau_max,
            });
        }
    }

    let eq: Vec<(DVector<f64>, f64)> = (0..nj)
        .map(|j| {
            let row = DVector::from_iterator(nm, (0..nm).map(|i| jac.torque_coefficient(j, i)));
            (row, tau_des[j])
        })
        .collect();
    let mut ineq = Vec::with_capacity(2 * nm);
    for (i, &fm) in f_max.iter().enumerate() {
        let mut lower = DVector::zeros(nm);
        lower[i] = 1.0;
        ineq.push((lower, 0.0));
        let mut upper = DVector::zeros(nm);
        upper[i] = -1.0;
        ineq.push((upper, -fm));
    }
    let sol = solve_least_distance(nm, &eq, &ineq).map_err(|e| match e {
        QpError::Infeasible => AnalysisError::InfeasibleCoupled,
        QpError::IterationLimit(n) => AnalysisError::NoConvergence(n),
    })?;
    let f: Vec<f64> = sol
        .x
        .iter()
        .zip(f_max)
        .map(|(&v, &fm)| v.clamp(0.0, fm))
        .collect();
    Ok(TensionVector::new(f)?)
}
