//! Plain-text reports printed by the command-line tool.

use std::fmt::Write;

use crate::analysis::ReachabilityResult;
use crate::csv_io::sci;
use crate::kinematics::{forward_kinematics, palm_point, FrameSet, KinematicsError, Posture};
use crate::model::RobotModel;

/// Link poses (position + quaternion `w,x,y,z`) followed by the palm point,
/// as CSV-like lines.
pub fn fk_report(model: &RobotModel, posture: &Posture) -> Result<String, KinematicsError> {
    let frames = forward_kinematics(model, posture)?;
    let mut out = String::new();
    write_frames(&mut out, &frames);
    if model.metadata().palm_marker.is_some() {
        let p = palm_point(model, posture)?;
        writeln!(out, "palm,{},{},{}", sci(p.x), sci(p.y), sci(p.z)).unwrap();
    }
    Ok(out)
}

fn write_frames(out: &mut String, frames: &FrameSet) {
    writeln!(out, "link,x,y,z,qw,qx,qy,qz").unwrap();
    for (name, pose) in frames.iter() {
        let t = pose.translation.vector;
        let q = pose.rotation.quaternion();
        writeln!(
            out,
            "{name},{},{},{},{},{},{},{}",
            sci(t.x),
            sci(t.y),
            sci(t.z),
            sci(q.w),
            sci(q.i),
            sci(q.j),
            sci(q.k)
        )
        .unwrap();
    }
}

pub fn workspace_summary(result: &ReachabilityResult) -> String {
    let e = &result.extent;
    let mut out = String::new();
    writeln!(out, "points: {}", result.points.len()).unwrap();
    writeln!(out, "swept_joints: {}", result.swept_joints.join(",")).unwrap();
    writeln!(out, "hull_volume_m3: {}", sci(result.hull_volume)).unwrap();
    for (axis, i) in [("x", 0), ("y", 1), ("z", 2)] {
        writeln!(out, "extent_{axis}_m: {} {}", sci(e.min[i]), sci(e.max[i])).unwrap();
    }
    out
}
