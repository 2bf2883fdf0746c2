//! Robot description: links, joints, muscles and actuators.
//!
//! A model is loaded from a JSON document (see `docs/model_format.md`) whose
//! angles are in degrees and lengths in millimeters. Everything is converted to
//! radians and meters on load, validated, and then frozen: a [`RobotModel`]
//! has no mutating methods, so it can be shared freely between threads.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actuation::ActuatorSpec;
use crate::units::{exact_inverse, m_to_mm, mm_to_m};

/// Axes whose norm is this close to one are stored untouched.
const AXIS_NORM_SLACK: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error: {0}")]
    Validation(#[from] ValidationError),
    #[error("model has no joint with role `{0}`")]
    MissingRole(JointRole),
    #[error("degenerate forearm: elbow and wrist joint origins coincide")]
    DegenerateForearm,
}

/// A violated model invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("duplicate {category} name `{name}`")]
    DuplicateName { category: &'static str, name: String },
    #[error("model must contain at least one link")]
    NoLinks,
    #[error("link tree must have exactly one root, found {0:?}")]
    RootCount(Vec<String>),
    #[error("link `{link}` references unknown parent `{parent}`")]
    UnknownParent { link: String, parent: String },
    #[error("link graph contains a cycle through `{0}`")]
    Cycle(String),
    #[error("{owner} references unknown link `{link}`")]
    UnknownLink { owner: String, link: String },
    #[error("joint `{joint}` drives the root link `{link}`")]
    JointOnRoot { joint: String, link: String },
    #[error("link `{link}` is driven by more than one joint")]
    MultipleJoints { link: String },
    #[error("joint `{joint}` has a zero or non-finite axis")]
    BadAxis { joint: String },
    #[error("joint `{joint}` limits must satisfy angle_min < angle_max, got [{min}, {max}]")]
    BadLimits { joint: String, min: f64, max: f64 },
    #[error("role `{role}` is assigned to more than one joint")]
    DuplicateRole { role: JointRole },
    #[error("muscle `{muscle}` needs at least two waypoints")]
    TooFewWaypoints { muscle: String },
    #[error("muscle `{muscle}` starts and ends on the same link `{link}`")]
    SameEndLinks { muscle: String, link: String },
    #[error("muscle `{muscle}` waypoints {index}..{next} hop between unconnected links `{from}` and `{to}`")]
    DisconnectedWaypoints {
        muscle: String,
        index: usize,
        next: usize,
        from: String,
        to: String,
    },
    #[error("muscle `{muscle}` references unknown actuator `{actuator}`")]
    UnknownActuator { muscle: String, actuator: String },
    #[error("actuator `{name}`: {message}")]
    BadActuator { name: String, message: String },
    #[error("non-finite value in {0}")]
    NonFinite(String),
}

/// Anatomical role of a joint. Used to locate the joints that analyses and
/// the straight-axis comparison refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointRole {
    Elbow,
    Radioulnar,
    WristRoll,
    WristPitch,
    Finger,
}

impl fmt::Display for JointRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            JointRole::Elbow => "elbow",
            JointRole::Radioulnar => "radioulnar",
            JointRole::WristRoll => "wrist_roll",
            JointRole::WristPitch => "wrist_pitch",
            JointRole::Finger => "finger",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub name: String,
    pub parent: Option<String>,
    /// Translation from the parent frame, meters.
    pub translation: Vector3<f64>,
    /// Fixed roll/pitch/yaw relative to the parent frame, radians.
    pub rpy: Vector3<f64>,
}

impl Link {
    /// Rigid transform from this link's frame to its parent's frame at zero
    /// joint angle.
    pub fn fixed_transform(&self) -> Isometry3<f64> {
        Isometry3::from_parts(Translation3::from(self.translation), self.fixed_rotation())
    }

    pub fn fixed_rotation(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_euler_angles(self.rpy.x, self.rpy.y, self.rpy.z)
    }
}

/// A revolute joint driving `child_link` relative to its parent.
///
/// The axis is expressed in the parent frame and passes through the child
/// link's origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub child_link: String,
    pub axis: Vector3<f64>,
    pub angle_min: f64,
    pub angle_max: f64,
    pub role: Option<JointRole>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waypoint {
    pub link: String,
    /// Offset in the link frame, meters.
    pub offset: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Muscle {
    pub name: String,
    pub waypoints: Vec<Waypoint>,
    pub actuator: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Actuator {
    pub name: String,
    pub spec: ActuatorSpec,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelMetadata {
    pub name: String,
    pub palm_marker: Option<Waypoint>,
    pub link_mass_kgf: BTreeMap<String, f64>,
    pub notes: Option<String>,
}

/// Parts of a model before validation.
#[derive(Debug, Clone, Default)]
pub struct ModelParts {
    pub links: Vec<Link>,
    pub joints: Vec<Joint>,
    pub muscles: Vec<Muscle>,
    pub actuators: Vec<Actuator>,
    pub metadata: ModelMetadata,
}

/// A validated, immutable robot description.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    links: Vec<Link>,
    joints: Vec<Joint>,
    muscles: Vec<Muscle>,
    actuators: Vec<Actuator>,
    metadata: ModelMetadata,
    index: ModelIndex,
}

/// Precomputed lookups derived from the parts; rebuilt on every validation.
#[derive(Debug, Clone, PartialEq, Default)]
struct ModelIndex {
    link_by_name: BTreeMap<String, usize>,
    parent: Vec<Option<usize>>,
    /// Joint driving each link, if any.
    link_joint: Vec<Option<usize>>,
    /// Links ordered so that parents precede children.
    topo_order: Vec<usize>,
    joint_child: Vec<usize>,
    actuator_of_muscle: Vec<usize>,
}

impl RobotModel {
    /// Validates `parts` and builds the model.
    pub fn new(parts: ModelParts) -> Result<Self, ValidationError> {
        let ModelParts {
            links,
            joints,
            mut muscles,
            actuators,
            metadata,
        } = parts;
        let mut joints = joints;
        let index = validate(&links, &mut joints, &mut muscles, &actuators, &metadata)?;
        Ok(Self {
            links,
            joints,
            muscles,
            actuators,
            metadata,
            index,
        })
    }

    pub fn into_parts(self) -> ModelParts {
        ModelParts {
            links: self.links,
            joints: self.joints,
            muscles: self.muscles,
            actuators: self.actuators,
            metadata: self.metadata,
        }
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn muscles(&self) -> &[Muscle] {
        &self.muscles
    }

    pub fn actuators(&self) -> &[Actuator] {
        &self.actuators
    }

    pub fn metadata(&self) -> &ModelMetadata {
        &self.metadata
    }

    pub fn name(&self) -> &str {
        &self.metadata.name
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn link_index(&self, name: &str) -> Option<usize> {
        self.index.link_by_name.get(name).copied()
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }

    pub fn muscle_index(&self, name: &str) -> Option<usize> {
        self.muscles.iter().position(|m| m.name == name)
    }

    pub fn joint(&self, name: &str) -> Option<&Joint> {
        self.joints.iter().find(|j| j.name == name)
    }

    pub fn joint_by_role(&self, role: JointRole) -> Option<&Joint> {
        self.joints.iter().find(|j| j.role == Some(role))
    }

    pub fn joint_names(&self) -> Vec<&str> {
        self.joints.iter().map(|j| j.name.as_str()).collect()
    }

    pub fn muscle_names(&self) -> Vec<&str> {
        self.muscles.iter().map(|m| m.name.as_str()).collect()
    }

    /// Actuator spec driving muscle `muscle_idx`.
    pub fn muscle_actuator(&self, muscle_idx: usize) -> &ActuatorSpec {
        &self.actuators[self.index.actuator_of_muscle[muscle_idx]].spec
    }

    pub fn actuator(&self, name: &str) -> Option<&ActuatorSpec> {
        self.actuators.iter().find(|a| a.name == name).map(|a| &a.spec)
    }

    pub(crate) fn parent_index(&self, link: usize) -> Option<usize> {
        self.index.parent[link]
    }

    pub(crate) fn link_joint(&self, link: usize) -> Option<usize> {
        self.index.link_joint[link]
    }

    pub(crate) fn joint_child(&self, joint: usize) -> usize {
        self.index.joint_child[joint]
    }

    pub(crate) fn topo_order(&self) -> &[usize] {
        &self.index.topo_order
    }

    /// True when `ancestor` lies on the path from `link` to the root
    /// (a link counts as its own ancestor).
    pub fn is_ancestor(&self, ancestor: usize, mut link: usize) -> bool {
        loop {
            if link == ancestor {
                return true;
            }
            match self.index.parent[link] {
                Some(p) => link = p,
                None => return false,
            }
        }
    }

    /// Returns a copy with joint `joint_idx`'s axis replaced.
    pub(crate) fn with_joint_axis(&self, joint_idx: usize, axis: Vector3<f64>) -> Self {
        let mut out = self.clone();
        out.joints[joint_idx].axis = axis;
        out
    }

    /// Serializes back to the document format (degrees, millimeters).
    pub fn to_document(&self) -> ModelDocument {
        ModelDocument::from_model(self)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("model document serializes")
    }
}

fn validate(
    links: &[Link],
    joints: &mut [Joint],
    muscles: &mut [Muscle],
    actuators: &[Actuator],
    metadata: &ModelMetadata,
) -> Result<ModelIndex, ValidationError> {
    if links.is_empty() {
        return Err(ValidationError::NoLinks);
    }

    let mut link_by_name = BTreeMap::new();
    for (i, l) in links.iter().enumerate() {
        if link_by_name.insert(l.name.clone(), i).is_some() {
            return Err(ValidationError::DuplicateName {
                category: "link",
                name: l.name.clone(),
            });
        }
        if !(l.translation.iter().all(|v| v.is_finite()) && l.rpy.iter().all(|v| v.is_finite())) {
            return Err(ValidationError::NonFinite(format!("link `{}`", l.name)));
        }
    }

    let mut parent = Vec::with_capacity(links.len());
    let mut roots = Vec::new();
    for l in links {
        match &l.parent {
            None => {
                roots.push(l.name.clone());
                parent.push(None);
            }
            Some(p) => {
                let pi = *link_by_name.get(p).ok_or_else(|| ValidationError::UnknownParent {
                    link: l.name.clone(),
                    parent: p.clone(),
                })?;
                parent.push(Some(pi));
            }
        }
    }
    if roots.len() != 1 {
        return Err(ValidationError::RootCount(roots));
    }

    // Depth-first from the root; anything unreached sits on a cycle.
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); links.len()];
    let mut root = 0;
    for (i, p) in parent.iter().enumerate() {
        match p {
            Some(p) => children[*p].push(i),
            None => root = i,
        }
    }
    let mut topo_order = Vec::with_capacity(links.len());
    let mut stack = vec![root];
    while let Some(i) = stack.pop() {
        topo_order.push(i);
        for &c in children[i].iter().rev() {
            stack.push(c);
        }
    }
    if topo_order.len() != links.len() {
        let seen: HashSet<usize> = topo_order.iter().copied().collect();
        let first = (0..links.len()).find(|i| !seen.contains(i)).unwrap_or(0);
        return Err(ValidationError::Cycle(links[first].name.clone()));
    }

    let mut joint_names = HashSet::new();
    let mut roles = HashSet::new();
    let mut link_joint = vec![None; links.len()];
    let mut joint_child = Vec::with_capacity(joints.len());
    for (ji, j) in joints.iter_mut().enumerate() {
        if !joint_names.insert(j.name.clone()) {
            return Err(ValidationError::DuplicateName {
                category: "joint",
                name: j.name.clone(),
            });
        }
        let ci = *link_by_name
            .get(&j.child_link)
            .ok_or_else(|| ValidationError::UnknownLink {
                owner: format!("joint `{}`", j.name),
                link: j.child_link.clone(),
            })?;
        if parent[ci].is_none() {
            return Err(ValidationError::JointOnRoot {
                joint: j.name.clone(),
                link: j.child_link.clone(),
            });
        }
        if link_joint[ci].replace(ji).is_some() {
            return Err(ValidationError::MultipleJoints {
                link: j.child_link.clone(),
            });
        }
        joint_child.push(ci);

        let norm = j.axis.norm();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(ValidationError::BadAxis { joint: j.name.clone() });
        }
        if (norm - 1.0).abs() > AXIS_NORM_SLACK {
            j.axis /= norm;
        }
        if !(j.angle_min.is_finite() && j.angle_max.is_finite()) || j.angle_min >= j.angle_max {
            return Err(ValidationError::BadLimits {
                joint: j.name.clone(),
                min: j.angle_min,
                max: j.angle_max,
            });
        }
        if let Some(role) = j.role {
            if role != JointRole::Finger && !roles.insert(role) {
                return Err(ValidationError::DuplicateRole { role });
            }
        }
    }

    let mut actuator_by_name = HashMap::new();
    for (i, a) in actuators.iter().enumerate() {
        if actuator_by_name.insert(a.name.clone(), i).is_some() {
            return Err(ValidationError::DuplicateName {
                category: "actuator",
                name: a.name.clone(),
            });
        }
        a.spec.validate().map_err(|e| ValidationError::BadActuator {
            name: a.name.clone(),
            message: e.to_string(),
        })?;
    }

    let is_ancestor = |anc: usize, mut l: usize| loop {
        if l == anc {
            return true;
        }
        match parent[l] {
            Some(p) => l = p,
            None => return false,
        }
    };

    let mut muscle_names = HashSet::new();
    let mut actuator_of_muscle = Vec::with_capacity(muscles.len());
    for m in muscles.iter() {
        if !muscle_names.insert(m.name.clone()) {
            return Err(ValidationError::DuplicateName {
                category: "muscle",
                name: m.name.clone(),
            });
        }
        if m.waypoints.len() < 2 {
            return Err(ValidationError::TooFewWaypoints { muscle: m.name.clone() });
        }
        let mut idx = Vec::with_capacity(m.waypoints.len());
        for w in &m.waypoints {
            let li = *link_by_name.get(&w.link).ok_or_else(|| ValidationError::UnknownLink {
                owner: format!("muscle `{}`", m.name),
                link: w.link.clone(),
            })?;
            if !w.offset.iter().all(|v| v.is_finite()) {
                return Err(ValidationError::NonFinite(format!("muscle `{}`", m.name)));
            }
            idx.push(li);
        }
        let (first, last) = (idx[0], idx[idx.len() - 1]);
        if first == last {
            return Err(ValidationError::SameEndLinks {
                muscle: m.name.clone(),
                link: links[first].name.clone(),
            });
        }
        for (k, pair) in idx.windows(2).enumerate() {
            let (a, b) = (pair[0], pair[1]);
            let siblings = parent[a].is_some() && parent[a] == parent[b];
            if !(a == b || is_ancestor(a, b) || is_ancestor(b, a) || siblings) {
                return Err(ValidationError::DisconnectedWaypoints {
                    muscle: m.name.clone(),
                    index: k,
                    next: k + 1,
                    from: links[a].name.clone(),
                    to: links[b].name.clone(),
                });
            }
        }
        let ai = *actuator_by_name
            .get(&m.actuator)
            .ok_or_else(|| ValidationError::UnknownActuator {
                muscle: m.name.clone(),
                actuator: m.actuator.clone(),
            })?;
        actuator_of_muscle.push(ai);
    }

    if let Some(marker) = &metadata.palm_marker {
        if !link_by_name.contains_key(&marker.link) {
            return Err(ValidationError::UnknownLink {
                owner: "palm marker".into(),
                link: marker.link.clone(),
            });
        }
    }
    for name in metadata.link_mass_kgf.keys() {
        if !link_by_name.contains_key(name) {
            return Err(ValidationError::UnknownLink {
                owner: "link mass table".into(),
                link: name.clone(),
            });
        }
    }

    Ok(ModelIndex {
        link_by_name,
        parent,
        link_joint,
        topo_order,
        joint_child,
        actuator_of_muscle,
    })
}

/// Parses and validates a model document.
pub fn load_model(text: &str) -> Result<RobotModel, ModelError> {
    let doc: ModelDocument = serde_json::from_str(text).map_err(|e| ModelError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(RobotModel::new(doc.into_parts())?)
}

pub fn load_model_file(path: impl AsRef<std::path::Path>) -> Result<RobotModel, crate::Error> {
    let text = std::fs::read_to_string(path)?;
    Ok(load_model(&text)?)
}

/// Returns a copy whose radioulnar axis is replaced by the forearm long axis:
/// the unit vector from the elbow joint origin to the wrist joint origin in the
/// zero posture. The new axis keeps the sense (sign) of the old one.
pub fn straight_axis_variant(model: &RobotModel) -> Result<RobotModel, ModelError> {
    use crate::kinematics::{forward_kinematics, joint_frame_in_base, Posture};

    let ru = model
        .joints()
        .iter()
        .position(|j| j.role == Some(JointRole::Radioulnar))
        .ok_or(ModelError::MissingRole(JointRole::Radioulnar))?;
    let elbow = model
        .joint_by_role(JointRole::Elbow)
        .ok_or(ModelError::MissingRole(JointRole::Elbow))?;
    let wrist = model
        .joint_by_role(JointRole::WristRoll)
        .or_else(|| model.joint_by_role(JointRole::WristPitch))
        .ok_or(ModelError::MissingRole(JointRole::WristRoll))?;

    let frames = forward_kinematics(model, &Posture::zeros(model)).expect("zero posture covers all joints");
    let (elbow_origin, _) = joint_frame_in_base(model, &frames, &elbow.name).expect("elbow joint exists");
    let (wrist_origin, _) = joint_frame_in_base(model, &frames, &wrist.name).expect("wrist joint exists");
    let long_axis = wrist_origin - elbow_origin;
    let len = long_axis.norm();
    if !(len > 1e-12) {
        return Err(ModelError::DegenerateForearm);
    }
    let long_axis = long_axis / len;

    let joint = &model.joints()[ru];
    let child = model.joint_child(ru);
    let parent = model.parent_index(child).expect("joint child has a parent");
    let parent_rot = frames.pose_by_index(parent).rotation;
    let mut axis = parent_rot.inverse() * long_axis;
    if axis.dot(&joint.axis) < 0.0 {
        axis = -axis;
    }
    // Already aligned: keep the stored axis so the variant is a fixed point.
    if (axis - joint.axis).norm() <= 1e-12 {
        return Ok(model.clone());
    }
    Ok(model.with_joint_axis(ru, axis))
}

// ---------------------------------------------------------------------------
// Document format
// ---------------------------------------------------------------------------

/// On-disk representation (JSON). Angles in degrees, lengths in millimeters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub metadata: MetadataDoc,
    pub links: Vec<LinkDoc>,
    pub joints: Vec<JointDoc>,
    pub actuators: Vec<ActuatorDoc>,
    pub muscles: Vec<MuscleDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetadataDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub palm_marker: Option<WaypointDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub link_mass_kgf: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDoc {
    pub name: String,
    #[serde(default)]
    pub parent: Option<String>,
    #[serde(default)]
    pub origin_mm: [f64; 3],
    #[serde(default)]
    pub rpy_deg: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDoc {
    pub name: String,
    pub child: String,
    pub axis: [f64; 3],
    pub limits_deg: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<JointRole>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorDoc {
    pub name: String,
    pub gear_ratio: f64,
    pub pulley_radius_mm: f64,
    pub efficiency: f64,
    pub continuous_max_tension_n: f64,
    pub no_load_winding_rate_mm_s: f64,
    pub winding_resistance_ohm: f64,
    pub torque_constant_nm_per_a: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointDoc {
    pub link: String,
    pub offset_mm: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuscleDoc {
    pub name: String,
    pub actuator: String,
    pub waypoints: Vec<WaypointDoc>,
}

fn mm3(v: [f64; 3]) -> Vector3<f64> {
    Vector3::new(mm_to_m(v[0]), mm_to_m(v[1]), mm_to_m(v[2]))
}

fn back_mm(x: f64) -> f64 {
    exact_inverse(x, mm_to_m, m_to_mm)
}

fn back_deg(x: f64) -> f64 {
    exact_inverse(x, f64::to_radians, f64::to_degrees)
}

fn mm3_back(v: &Vector3<f64>) -> [f64; 3] {
    [back_mm(v.x), back_mm(v.y), back_mm(v.z)]
}

impl WaypointDoc {
    fn into_waypoint(self) -> Waypoint {
        Waypoint {
            link: self.link,
            offset: mm3(self.offset_mm),
        }
    }

    fn from_waypoint(w: &Waypoint) -> Self {
        Self {
            link: w.link.clone(),
            offset_mm: mm3_back(&w.offset),
        }
    }
}

impl ModelDocument {
    pub fn into_parts(self) -> ModelParts {
        let links = self
            .links
            .into_iter()
            .map(|l| Link {
                name: l.name,
                parent: l.parent,
                translation: mm3(l.origin_mm),
                rpy: Vector3::from(l.rpy_deg.map(f64::to_radians)),
            })
            .collect();
        let joints = self
            .joints
            .into_iter()
            .map(|j| Joint {
                name: j.name,
                child_link: j.child,
                axis: Vector3::from(j.axis),
                angle_min: j.limits_deg[0].to_radians(),
                angle_max: j.limits_deg[1].to_radians(),
                role: j.role,
            })
            .collect();
        let actuators = self
            .actuators
            .into_iter()
            .map(|a| Actuator {
                name: a.name,
                spec: ActuatorSpec {
                    gear_ratio: a.gear_ratio,
                    pulley_radius: mm_to_m(a.pulley_radius_mm),
                    efficiency: a.efficiency,
                    continuous_max_tension: a.continuous_max_tension_n,
                    no_load_winding_rate: mm_to_m(a.no_load_winding_rate_mm_s),
                    winding_resistance: a.winding_resistance_ohm,
                    torque_constant: a.torque_constant_nm_per_a,
                },
            })
            .collect();
        let muscles = self
            .muscles
            .into_iter()
            .map(|m| Muscle {
                name: m.name,
                actuator: m.actuator,
                waypoints: m.waypoints.into_iter().map(WaypointDoc::into_waypoint).collect(),
            })
            .collect();
        let metadata = ModelMetadata {
            name: self.metadata.name,
            palm_marker: self.metadata.palm_marker.map(WaypointDoc::into_waypoint),
            link_mass_kgf: self.metadata.link_mass_kgf,
            notes: self.metadata.notes,
        };
        ModelParts {
            links,
            joints,
            muscles,
            actuators,
            metadata,
        }
    }

    pub fn from_model(model: &RobotModel) -> Self {
        let md = model.metadata();
        Self {
            metadata: MetadataDoc {
                name: md.name.clone(),
                palm_marker: md.palm_marker.as_ref().map(WaypointDoc::from_waypoint),
                link_mass_kgf: md.link_mass_kgf.clone(),
                notes: md.notes.clone(),
            },
            links: model
                .links()
                .iter()
                .map(|l| LinkDoc {
                    name: l.name.clone(),
                    parent: l.parent.clone(),
                    origin_mm: mm3_back(&l.translation),
                    rpy_deg: [back_deg(l.rpy.x), back_deg(l.rpy.y), back_deg(l.rpy.z)],
                })
                .collect(),
            joints: model
                .joints()
                .iter()
                .map(|j| JointDoc {
                    name: j.name.clone(),
                    child: j.child_link.clone(),
                    axis: [j.axis.x, j.axis.y, j.axis.z],
                    limits_deg: [back_deg(j.angle_min), back_deg(j.angle_max)],
                    role: j.role,
                })
                .collect(),
            actuators: model
                .actuators()
                .iter()
                .map(|a| ActuatorDoc {
                    name: a.name.clone(),
                    gear_ratio: a.spec.gear_ratio,
                    pulley_radius_mm: back_mm(a.spec.pulley_radius),
                    efficiency: a.spec.efficiency,
                    continuous_max_tension_n: a.spec.continuous_max_tension,
                    no_load_winding_rate_mm_s: back_mm(a.spec.no_load_winding_rate),
                    winding_resistance_ohm: a.spec.winding_resistance,
                    torque_constant_nm_per_a: a.spec.torque_constant,
                })
                .collect(),
            muscles: model
                .muscles()
                .iter()
                .map(|m| MuscleDoc {
                    name: m.name.clone(),
                    actuator: m.actuator.clone(),
                    waypoints: m.waypoints.iter().map(WaypointDoc::from_waypoint).collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"{
        "metadata": {"name": "minimal"},
        "links": [
            {"name": "base"},
            {"name": "arm", "parent": "base", "origin_mm": [100, 0, 0]}
        ],
        "joints": [
            {"name": "hinge", "child": "arm", "axis": [0, 0, 1], "limits_deg": [-90, 90]}
        ],
        "actuators": [
            {"name": "a", "gear_ratio": 157, "pulley_radius_mm": 4, "efficiency": 1.0,
             "continuous_max_tension_n": 424, "no_load_winding_rate_mm_s": 116,
             "winding_resistance_ohm": 1.0, "torque_constant_nm_per_a": 0.01}
        ],
        "muscles": [
            {"name": "m", "actuator": "a", "waypoints": [
                {"link": "base", "offset_mm": [50, 20, 0]},
                {"link": "arm", "offset_mm": [50, 20, 0]}
            ]}
        ]
    }"#;

    #[test]
    fn minimal_model_loads() {
        let m = load_model(MINIMAL).unwrap();
        assert_eq!(m.dof(), 1);
        assert_eq!(m.muscles().len(), 1);
        assert_eq!(m.links()[1].translation, Vector3::new(0.1, 0.0, 0.0));
        assert_eq!(m.joints()[0].angle_max, 90f64.to_radians());
    }

    #[test]
    fn missing_link_names_the_muscle() {
        let bad = MINIMAL.replace(r#"{"link": "arm", "offset_mm""#, r#"{"link": "forearm", "offset_mm""#);
        let err = load_model(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("muscle `m`"), "{msg}");
        assert!(msg.contains("forearm"), "{msg}");
    }

    #[test]
    fn parse_error_has_locus() {
        let bad = MINIMAL.replace("\"gear_ratio\": 157", "\"gear_ratio\": \"x\"");
        match load_model(&bad).unwrap_err() {
            ModelError::Parse { line, message, .. } => {
                assert!(line > 1);
                assert!(message.contains("invalid type"), "{message}");
            }
            e => panic!("unexpected {e:?}"),
        }
        let unknown_field = MINIMAL.replace("\"efficiency\"", "\"efficency\"");
        let msg = load_model(&unknown_field).unwrap_err().to_string();
        assert!(msg.contains("efficency"), "{msg}");
    }

    #[test]
    fn structural_violations() {
        let dup = MINIMAL.replace(r#"{"name": "arm", "parent""#, r#"{"name": "base", "parent""#);
        assert!(matches!(
            load_model(&dup).unwrap_err(),
            ModelError::Validation(ValidationError::DuplicateName { category: "link", .. })
        ));

        let limits = MINIMAL.replace("[-90, 90]", "[90, -90]");
        assert!(matches!(
            load_model(&limits).unwrap_err(),
            ModelError::Validation(ValidationError::BadLimits { .. })
        ));

        let axis = MINIMAL.replace("[0, 0, 1]", "[0, 0, 0]");
        assert!(matches!(
            load_model(&axis).unwrap_err(),
            ModelError::Validation(ValidationError::BadAxis { .. })
        ));

        let same_link = MINIMAL.replace(r#"{"link": "arm", "offset_mm""#, r#"{"link": "base", "offset_mm""#);
        assert!(matches!(
            load_model(&same_link).unwrap_err(),
            ModelError::Validation(ValidationError::SameEndLinks { .. })
        ));

        let actuator = MINIMAL.replace(r#""actuator": "a""#, r#""actuator": "zz""#);
        assert!(matches!(
            load_model(&actuator).unwrap_err(),
            ModelError::Validation(ValidationError::UnknownActuator { .. })
        ));

        let two_roots = MINIMAL.replace(r#""parent": "base""#, r#""parent": null"#);
        assert!(matches!(
            load_model(&two_roots).unwrap_err(),
            ModelError::Validation(ValidationError::RootCount(_))
        ));
    }

    #[test]
    fn cycle_is_rejected() {
        let parts = ModelParts {
            links: vec![
                Link {
                    name: "root".into(),
                    parent: None,
                    translation: Vector3::zeros(),
                    rpy: Vector3::zeros(),
                },
                Link {
                    name: "a".into(),
                    parent: Some("b".into()),
                    translation: Vector3::zeros(),
                    rpy: Vector3::zeros(),
                },
                Link {
                    name: "b".into(),
                    parent: Some("a".into()),
                    translation: Vector3::zeros(),
                    rpy: Vector3::zeros(),
                },
            ],
            ..Default::default()
        };
        assert!(matches!(RobotModel::new(parts), Err(ValidationError::Cycle(_))));
    }

    #[test]
    fn non_unit_axis_is_normalized() {
        let m = load_model(&MINIMAL.replace("[0, 0, 1]", "[0, 0, 2]")).unwrap();
        assert_eq!(m.joints()[0].axis, Vector3::z());
    }

    #[test]
    fn straight_variant_requires_radioulnar() {
        let m = load_model(MINIMAL).unwrap();
        assert!(matches!(
            straight_axis_variant(&m),
            Err(ModelError::MissingRole(JointRole::Radioulnar))
        ));
    }
}
