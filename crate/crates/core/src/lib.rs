//! Simulation and analysis toolkit for a human-mimetic tendon-driven forearm
//! with a slanted radioulnar joint.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] loads and validates the robot description (links, joints,
//!   muscles, actuators).
//! * [`kinematics`] evaluates forward kinematics, palm position and joint
//!   limits.
//! * [`muscle`] computes muscle path lengths, the moment-arm Jacobian and the
//!   tension-to-torque map.
//! * [`actuation`] covers the gear/pulley winding model and the load-cell
//!   lever calibration.
//! * [`thermal`] is a two-node lumped model of motor heating.
//! * [`analysis`] holds workspace reachability, torque bounds, tension
//!   distribution and swing-speed analysis.
//!
//! All quantities are SI internally (radians, meters, newtons, seconds,
//! kelvin). Kilogram-force is accepted only at the command-line boundary via
//! [`units`].

pub mod actuation;
pub mod analysis;
pub mod csv_io;
pub mod kinematics;
pub mod model;
pub mod muscle;
pub mod report;
pub mod thermal;
pub mod units;

mod error;

pub use error::Error;

/// Shipped model description, as text.
pub const KENGORO_FOREARM_JSON: &str = include_str!("../data/kengoro_forearm.json");

/// Loads the shipped forearm model.
pub fn kengoro_forearm() -> model::RobotModel {
    model::load_model(KENGORO_FOREARM_JSON).expect("shipped model is valid")
}
