//! Forward kinematics over the link tree, joint-limit checks and the palm
//! marker.
//!
//! A child link's pose is `parent · Trans(t) · Rot(axis, θ) · R_fixed`: the
//! joint axis is expressed in the parent frame and passes through the child
//! link's origin.

use std::collections::BTreeMap;

use nalgebra::{Isometry3, Point3, Translation3, Unit, UnitQuaternion, Vector3};
use thiserror::Error;

use crate::model::RobotModel;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    #[error("posture has no angle for joint `{0}`")]
    MissingJointAngle(String),
    #[error("unknown joint `{0}`")]
    UnknownJoint(String),
    #[error("unknown link `{0}`")]
    UnknownLink(String),
    #[error("model has no palm marker")]
    NoPalmMarker,
}

/// Joint angles in radians, keyed by joint name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Posture {
    angles: BTreeMap<String, f64>,
}

impl Posture {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every joint of `model` at zero.
    pub fn zeros(model: &RobotModel) -> Self {
        Self {
            angles: model.joints().iter().map(|j| (j.name.clone(), 0.0)).collect(),
        }
    }

    /// Builds a posture from angles listed in the model's joint order.
    pub fn from_ordered(model: &RobotModel, angles: &[f64]) -> Self {
        Self {
            angles: model
                .joints()
                .iter()
                .zip(angles)
                .map(|(j, &a)| (j.name.clone(), a))
                .collect(),
        }
    }

    pub fn with(mut self, joint: &str, angle: f64) -> Self {
        self.set(joint, angle);
        self
    }

    pub fn set(&mut self, joint: &str, angle: f64) {
        self.angles.insert(joint.to_owned(), angle);
    }

    pub fn get(&self, joint: &str) -> Option<f64> {
        self.angles.get(joint).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.angles.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Angles in the model's joint order.
    pub fn ordered(&self, model: &RobotModel) -> Result<Vec<f64>, KinematicsError> {
        model
            .joints()
            .iter()
            .map(|j| {
                self.get(&j.name)
                    .ok_or_else(|| KinematicsError::MissingJointAngle(j.name.clone()))
            })
            .collect()
    }
}

impl FromIterator<(String, f64)> for Posture {
    fn from_iter<T: IntoIterator<Item = (String, f64)>>(iter: T) -> Self {
        Self {
            angles: iter.into_iter().collect(),
        }
    }
}

/// Base-frame pose of every link, in the model's link order.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSet {
    names: Vec<String>,
    poses: Vec<Isometry3<f64>>,
}

impl FrameSet {
    pub fn pose(&self, link: &str) -> Option<&Isometry3<f64>> {
        self.names.iter().position(|n| n == link).map(|i| &self.poses[i])
    }

    pub fn pose_by_index(&self, link: usize) -> &Isometry3<f64> {
        &self.poses[link]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Isometry3<f64>)> {
        self.names.iter().map(String::as_str).zip(&self.poses)
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

pub fn forward_kinematics(model: &RobotModel, posture: &Posture) -> Result<FrameSet, KinematicsError> {
    let angles = posture.ordered(model)?;
    Ok(FrameSet {
        names: model.links().iter().map(|l| l.name.clone()).collect(),
        poses: link_poses(model, &angles),
    })
}

/// Forward kinematics with angles in joint order. `angles.len()` must equal
/// the model's DOF.
pub(crate) fn link_poses(model: &RobotModel, angles: &[f64]) -> Vec<Isometry3<f64>> {
    debug_assert_eq!(angles.len(), model.dof());
    let links = model.links();
    let mut poses = vec![Isometry3::identity(); links.len()];
    for &li in model.topo_order() {
        let Some(parent) = model.parent_index(li) else {
            continue;
        };
        let link = &links[li];
        let rotation = match model.link_joint(li) {
            Some(ji) => {
                let axis = Unit::new_unchecked(model.joints()[ji].axis);
                UnitQuaternion::from_axis_angle(&axis, angles[ji]) * link.fixed_rotation()
            }
            None => link.fixed_rotation(),
        };
        let local = Isometry3::from_parts(Translation3::from(link.translation), rotation);
        poses[li] = poses[parent] * local;
    }
    poses
}

pub(crate) fn point_on_link(poses: &[Isometry3<f64>], link: usize, offset: &Vector3<f64>) -> Vector3<f64> {
    (poses[link] * Point3::from(*offset)).coords
}

/// Base-frame origin and unit axis of joint `joint` under `frames`.
pub fn joint_frame_in_base(
    model: &RobotModel,
    frames: &FrameSet,
    joint: &str,
) -> Result<(Vector3<f64>, Vector3<f64>), KinematicsError> {
    let ji = model
        .joint_index(joint)
        .ok_or_else(|| KinematicsError::UnknownJoint(joint.to_owned()))?;
    let child = model.joint_child(ji);
    let parent = model.parent_index(child).expect("joint child has a parent");
    let parent_pose = frames.pose_by_index(parent);
    let origin = (parent_pose * Point3::from(model.links()[child].translation)).coords;
    let axis = parent_pose.rotation * model.joints()[ji].axis;
    Ok((origin, axis))
}

/// A point given in `link`'s frame, expressed in the base frame.
pub fn point_in_base(
    model: &RobotModel,
    posture: &Posture,
    link: &str,
    offset: &Vector3<f64>,
) -> Result<Vector3<f64>, KinematicsError> {
    let li = model
        .link_index(link)
        .ok_or_else(|| KinematicsError::UnknownLink(link.to_owned()))?;
    let poses = link_poses(model, &posture.ordered(model)?);
    Ok(point_on_link(&poses, li, offset))
}

/// Base-frame position of the model's palm-center marker.
pub fn palm_point(model: &RobotModel, posture: &Posture) -> Result<Vector3<f64>, KinematicsError> {
    let marker = model
        .metadata()
        .palm_marker
        .as_ref()
        .ok_or(KinematicsError::NoPalmMarker)?;
    point_in_base(model, posture, &marker.link, &marker.offset)
}

/// Per-joint limit verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitCheck {
    pub joint: String,
    /// `None` when the posture has no entry for this joint.
    pub angle: Option<f64>,
    pub angle_min: f64,
    pub angle_max: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub checks: Vec<LimitCheck>,
}

impl LimitReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LimitCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, joint: &str) -> Option<&LimitCheck> {
        self.checks.iter().find(|c| c.joint == joint)
    }
}

/// Inclusive range check `angle_min ≤ θ ≤ angle_max`, no tolerance. A joint
/// missing from the posture fails.
pub fn check_limits(model: &RobotModel, posture: &Posture) -> LimitReport {
    LimitReport {
        checks: model
            .joints()
            .iter()
            .map(|j| {
                let angle = posture.get(&j.name);
                LimitCheck {
                    joint: j.name.clone(),
                    angle,
                    angle_min: j.angle_min,
                    angle_max: j.angle_max,
                    pass: angle.is_some_and(|a| j.angle_min <= a && a <= j.angle_max),
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::load_model;

    const CHAIN: &str = r#"{
        "metadata": {"name": "chain", "palm_marker": {"link": "c", "offset_mm": [50, 0, 0]}},
        "links": [
            {"name": "a"},
            {"name": "b", "parent": "a", "origin_mm": [100, 0, 0]},
            {"name": "c", "parent": "b", "origin_mm": [100, 0, 0], "rpy_deg": [0, 0, 90]}
        ],
        "joints": [
            {"name": "j1", "child": "b", "axis": [0, 0, 1], "limits_deg": [-90, 90]},
            {"name": "j2", "child": "c", "axis": [0, 1, 0], "limits_deg": [0, 45]}
        ],
        "actuators": [],
        "muscles": []
    }"#;

    #[test]
    fn zero_posture_composes_fixed_transforms() {
        let m = load_model(CHAIN).unwrap();
        let f = forward_kinematics(&m, &Posture::zeros(&m)).unwrap();
        assert_eq!(*f.pose("a").unwrap(), Isometry3::identity());
        let c = f.pose("c").unwrap();
        let expected = m.links()[1].fixed_transform() * m.links()[2].fixed_transform();
        assert!((c.to_homogeneous() - expected.to_homogeneous()).abs().max() < 1e-15);
        let palm = palm_point(&m, &Posture::zeros(&m)).unwrap();
        assert!((palm - Vector3::new(0.2, 0.05, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn quarter_turn() {
        let m = load_model(CHAIN).unwrap();
        let p = Posture::zeros(&m).with("j1", std::f64::consts::FRAC_PI_2);
        let f = forward_kinematics(&m, &p).unwrap();
        let c = f.pose("c").unwrap().translation.vector;
        assert!((c - Vector3::new(0.1, 0.1, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn missing_angle_is_an_error() {
        let m = load_model(CHAIN).unwrap();
        let p = Posture::new().with("j1", 0.0);
        assert_eq!(
            forward_kinematics(&m, &p).unwrap_err(),
            KinematicsError::MissingJointAngle("j2".into())
        );
    }

    #[test]
    fn limits_are_inclusive_and_exact() {
        let m = load_model(CHAIN).unwrap();
        let j2 = m.joint("j2").unwrap().clone();
        let p = Posture::zeros(&m).with("j2", j2.angle_max);
        assert!(check_limits(&m, &p).all_pass());
        let p = p.with("j2", j2.angle_max.next_up());
        let report = check_limits(&m, &p);
        assert!(!report.all_pass());
        assert_eq!(report.failures().next().unwrap().joint, "j2");
        // Lower bound 0 passes at exactly zero.
        assert!(check_limits(&m, &Posture::zeros(&m)).get("j2").unwrap().pass);
        assert!(!check_limits(&m, &Posture::new()).all_pass());
    }

    #[test]
    fn beyond_limit_posture_still_evaluates() {
        let m = load_model(CHAIN).unwrap();
        let p = Posture::zeros(&m).with("j2", 3.0);
        assert!(palm_point(&m, &p).is_ok());
    }

    #[test]
    fn no_palm_marker() {
        let m = load_model(&CHAIN.replace(r#", "palm_marker": {"link": "c", "offset_mm": [50, 0, 0]}"#, "")).unwrap();
        assert_eq!(palm_point(&m, &Posture::zeros(&m)).unwrap_err(), KinematicsError::NoPalmMarker);
    }
}
