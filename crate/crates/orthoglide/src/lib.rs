//! Kinematics and inverse dynamics of the Orthoglide 3-DOF translational
//! parallel robot.
//!
//! The robot moves a platform in pure translation through three identical
//! PRPaR legs whose prismatic actuators point along the fixed x, y and z
//! axes. This crate provides:
//!
//! * closed-form inverse geometry with loop-closure residuals and the
//!   inverse/forward Jacobian pair ([`kinematics`]);
//! * recursive propagation of per-body orientations, velocities and
//!   accelerations along each leg ([`kinematics::link_states`]);
//! * inverse dynamics by the principle of virtual work: per-body inertia
//!   and gravity wrenches, leaf-to-root accumulation over the cut-open
//!   chains, and actuator forces and powers ([`dynamics`]);
//! * independent numerical oracles (finite-difference kinematics check,
//!   potential-gradient statics, a nested-difference Lagrangian route and
//!   a power balance) that validate the analytic paths ([`verify`]);
//! * trajectory sweeps with CSV emission and SVG charts ([`sim`],
//!   [`plot`]).

pub mod dynamics;
pub mod error;
pub mod kinematics;
pub mod math;
pub mod model;
pub mod plot;
pub mod sim;
pub mod trajectory;
pub mod verify;

pub use error::{Error, Result};
pub use kinematics::{JointStates, LegJointState, PlatformState};
pub use math::{Mat3, Vec3};
pub use model::{Leg, RobotModel};
pub use sim::{simulate, SimulationRow};
pub use trajectory::CosineTrajectory;
