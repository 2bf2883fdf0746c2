use nalgebra::Vector3;

use super::hull::convex_hull_volume;
use super::AnalysisError;
use crate::kinematics::{link_poses, point_on_link, KinematicsError};
use crate::model::RobotModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extent {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Extent {
    pub fn of(points: &[Vector3<f64>]) -> Option<Self> {
        let first = points.first()?;
        let mut e = Extent { min: *first, max: *first };
        for p in &points[1..] {
            e.min = e.min.inf(p);
            e.max = e.max.sup(p);
        }
        Some(e)
    }

    pub fn span(&self) -> Vector3<f64> {
        self.max - self.min
    }
}

/// Palm points reachable by a joint-space grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachabilityResult {
    pub points: Vec<Vector3<f64>>,
    /// Joint angles for each point, in the order of the swept joints.
    pub samples: Vec<Vec<f64>>,
    pub swept_joints: Vec<String>,
    /// Convex-hull volume of `points`, m³.
    pub hull_volume: f64,
    pub extent: Extent,
}

/// `resolution` evenly spaced values covering `[lo, hi]`, endpoints exact.
fn grid(lo: f64, hi: f64, resolution: usize) -> Vec<f64> {
    let last = resolution - 1;
    (0..resolution)
        .map(|k| {
            if k == last {
                hi
            } else {
                (lo + (hi - lo) * k as f64 / last as f64).clamp(lo, hi)
            }
        })
        .collect()
}

/// Sweeps `joints` over their limit ranges on a `resolution`ᵏ grid (all other
/// joints at zero) and collects palm points. The first listed joint varies
/// slowest.
pub fn reachable_set(model: &RobotModel, joints: &[&str], resolution: usize) -> Result<ReachabilityResult, AnalysisError> {
    let ranges = joints
        .iter()
        .map(|name| {
            model
                .joint(name)
                .map(|j| (j.angle_min, j.angle_max))
                .ok_or_else(|| AnalysisError::UnknownJoint((*name).to_owned()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    reachable_set_with_limits(model, joints, &ranges, resolution)
}

/// As [`reachable_set`] with explicit per-joint ranges.
pub fn reachable_set_with_limits(
    model: &RobotModel,
    joints: &[&str],
    ranges: &[(f64, f64)],
    resolution: usize,
) -> Result<ReachabilityResult, AnalysisError> {
    if resolution < 2 {
        return Err(AnalysisError::Resolution(resolution));
    }
    if ranges.len() != joints.len() {
        return Err(AnalysisError::DimensionMismatch {
            expected: joints.len(),
            got: ranges.len(),
        });
    }
    let indices = joints
        .iter()
        .map(|name| model.joint_index(name).ok_or_else(|| AnalysisError::UnknownJoint((*name).to_owned())))
        .collect::<Result<Vec<_>, _>>()?;
    let marker = model
        .metadata()
        .palm_marker
        .as_ref()
        .ok_or(KinematicsError::NoPalmMarker)?;
    let marker_link = model.link_index(&marker.link).expect("validated marker link");

    let axes: Vec<Vec<f64>> = ranges.iter().map(|&(lo, hi)| grid(lo, hi, resolution)).collect();
    let k = joints.len();
    let total = resolution.pow(k as u32);
    let mut points = Vec::with_capacity(total);
    let mut samples = Vec::with_capacity(total);
    let mut angles = vec![0.0; model.dof()];
    let mut counter = vec![0usize; k];
    for _ in 0..total {
        let sample: Vec<f64> = counter.iter().zip(&axes).map(|(&c, axis)| axis[c]).collect();
        for (&ji, &a) in indices.iter().zip(&sample) {
            angles[ji] = a;
        }
        let poses = link_poses(model, &angles);
        points.push(point_on_link(&poses, marker_link, &marker.offset));
        samples.push(sample);
        // Odometer increment, last joint fastest.
        for d in (0..k).rev() {
            counter[d] += 1;
            if counter[d] < resolution {
                break;
            }
            counter[d] = 0;
        }
    }
    let hull_volume = convex_hull_volume(&points);
    let extent = Extent::of(&points).unwrap_or(Extent {
        min: Vector3::zeros(),
        max: Vector3::zeros(),
    });
    Ok(ReachabilityResult {
        points,
        samples,
        swept_joints: joints.iter().map(|s| (*s).to_owned()).collect(),
        hull_volume,
        extent,
    })
}
