use std::io::Read;

use nalgebra::Vector3;

use super::AnalysisError;
use crate::csv_io::CsvError;
use crate::kinematics::{link_poses, point_on_link, KinematicsError};
use crate::model::RobotModel;

/// Racket-head position in the palm-marker link frame, meters, used with the
/// shipped swing trajectory.
pub const DEFAULT_HEAD_OFFSET: [f64; 3] = [0.335, 0.335, 0.01];

/// Time-stamped joint angles. Columns name a subset of the model's joints;
/// joints without a column are held at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    joint_names: Vec<String>,
    times: Vec<f64>,
    /// One row per sample, in `joint_names` order.
    angles: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(joint_names: Vec<String>, times: Vec<f64>, angles: Vec<Vec<f64>>) -> Result<Self, AnalysisError> {
        if times.len() != angles.len() {
            return Err(AnalysisError::DimensionMismatch {
                expected: times.len(),
                got: angles.len(),
            });
        }
        for row in &angles {
            if row.len() != joint_names.len() {
                return Err(AnalysisError::DimensionMismatch {
                    expected: joint_names.len(),
                    got: row.len(),
                });
            }
        }
        for (i, w) in times.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(AnalysisError::NonMonotonicTime(i + 1));
            }
        }
        Ok(Self {
            joint_names,
            times,
            angles,
        })
    }

    /// Parses `time_s,<joint names...>` with angles in radians.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, crate::Error> {
        let table = crate::csv_io::read_table(reader)?;
        let mut columns = table.header.into_iter();
        match columns.next() {
            Some(first) if first == "time_s" => {}
            other => {
                return Err(CsvError::Header(format!("first column must be `time_s`, found {other:?}")).into());
            }
        }
        let joint_names: Vec<String> = columns.collect();
        let mut times = Vec::with_capacity(table.rows.len());
        let mut angles = Vec::with_capacity(table.rows.len());
        for row in table.rows {
            times.push(row[0]);
            angles.push(row[1..].to_vec());
        }
        Ok(Self::new(joint_names, times, angles)?)
    }

    pub fn joint_names(&self) -> &[String] {
        &self.joint_names
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn angles(&self) -> &[Vec<f64>] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Central differences inside, one-sided at the ends. Exact for data linear
/// in time, including on uneven sampling.
fn differentiate<T, F>(times: &[f64], values: &[T], diff: F) -> Vec<T>
where
    F: Fn(&T, &T, f64) -> T,
{
    let n = times.len();
    (0..n)
        .map(|k| {
            let (a, b) = match k {
                0 => (0, 1),
                k if k == n - 1 => (n - 2, n - 1),
                k => (k - 1, k + 1),
            };
            diff(&values[b], &values[a], times[b] - times[a])
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityProfile {
    pub joint_names: Vec<String>,
    pub times: Vec<f64>,
    /// One row per sample, rad/s.
    pub velocities: Vec<Vec<f64>>,
}

impl VelocityProfile {
    /// Largest |velocity| seen by each joint.
    pub fn peak_abs(&self) -> Vec<(String, f64)> {
        self.joint_names
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let peak = self.velocities.iter().map(|row| row[j].abs()).fold(0.0, f64::max);
                (name.clone(), peak)
            })
            .collect()
    }

    /// Joint with the largest peak |velocity|; first one wins ties.
    pub fn fastest_joint(&self) -> Option<(String, f64)> {
        self.peak_abs()
            .into_iter()
            .fold(None, |best: Option<(String, f64)>, (name, v)| match best {
                Some((_, bv)) if bv >= v => best,
                _ => Some((name, v)),
            })
    }
}

pub fn joint_velocities(traj: &Trajectory) -> Result<VelocityProfile, AnalysisError> {
    if traj.len() < 2 {
        return Err(AnalysisError::TooFewSamples(traj.len()));
    }
    let velocities = differentiate(&traj.times, &traj.angles, |b, a, dt| {
        b.iter().zip(a).map(|(x1, x0)| (x1 - x0) / dt).collect()
    });
    Ok(VelocityProfile {
        joint_names: traj.joint_names.clone(),
        times: traj.times.clone(),
        velocities,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedProfile {
    pub times: Vec<f64>,
    /// m/s.
    pub speeds: Vec<f64>,
}

impl SpeedProfile {
    /// `(time, speed)` of the fastest sample.
    pub fn peak(&self) -> (f64, f64) {
        self.times
            .iter()
            .zip(&self.speeds)
            .fold((0.0, f64::NEG_INFINITY), |best, (&t, &s)| if s > best.1 { (t, s) } else { best })
    }
}

/// Speed of a point fixed on the hand (the palm-marker link), by finite
/// differences of its forward-kinematics positions.
pub fn head_speed(model: &RobotModel, traj: &Trajectory, head_offset: &Vector3<f64>) -> Result<SpeedProfile, AnalysisError> {
    if traj.len() < 2 {
        return Err(AnalysisError::TooFewSamples(traj.len()));
    }
    let marker = model
        .metadata()
        .palm_marker
        .as_ref()
        .ok_or(KinematicsError::NoPalmMarker)?;
    let hand = model.link_index(&marker.link).expect("validated marker link");
    let columns = traj
        .joint_names
        .iter()
        .map(|name| model.joint_index(name).ok_or_else(|| AnalysisError::UnknownJoint(name.clone())))
        .collect::<Result<Vec<_>, _>>()?;

    let mut angles = vec![0.0; model.dof()];
    let positions: Vec<Vector3<f64>> = traj
        .angles
        .iter()
        .map(|row| {
            for (&ji, &a) in columns.iter().zip(row) {
                angles[ji] = a;
            }
            point_on_link(&link_poses(model, &angles), hand, head_offset)
        })
        .collect();
    let velocities = differentiate(&traj.times, &positions, |b, a, dt| (b - a) / dt);
    Ok(SpeedProfile {
        times: traj.times.clone(),
        speeds: velocities.iter().map(|v| v.norm()).collect(),
    })
}

/// Extra tip speed from a larger rotation radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedGain {
    /// `ω · Δr`, m/s.
    pub delta_v: f64,
    /// `100 · Δv / total`.
    pub percent: f64,
}

pub fn slant_speed_gain(omega: f64, delta_r: f64, total: f64) -> Result<SpeedGain, AnalysisError> {
    if !(omega >= 0.0) {
        return Err(AnalysisError::Negative("angular velocity"));
    }
    if !(delta_r >= 0.0) {
        return Err(AnalysisError::Negative("radius increase"));
    }
    if !(total > 0.0) {
        return Err(AnalysisError::ZeroTotal);
    }
    let delta_v = omega * delta_r;
    Ok(SpeedGain {
        delta_v,
        percent: 100.0 * delta_v / total,
    })
}
