//! Kinematics and transmission-aware dynamics for a 4-DoF serial spherical
//! mechanism: three revolute joints whose axes meet at a remote center of
//! motion (RCM), plus a translation along the tool axis.
//!
//! The crate is organised bottom-up:
//!
//! - [`screws`]: rotations, unit twists and their exponentials.
//! - [`subproblems`]: closed-form geometric subproblems used by the inverse
//!   kinematics, including translation to a given distance.
//! - [`kinematics`]: mechanism geometry, product-of-exponentials forward
//!   kinematics and the three-step closed-form inverse kinematics.
//! - [`workspace`]: analytical tilt-range characterization and a sampling
//!   oracle for it.
//! - [`dynamics`]: actuator-reflected inverse dynamics for self-locking
//!   transmissions, payload curves and the NRMSD metric.
//! - [`identification`]: telemetry ingest, steady-state torque-velocity maps
//!   and friction parameter fitting.
//! - [`synth`]: synthetic telemetry generation for tests and demos.

pub mod dynamics;
mod error;
pub mod format;
pub mod identification;
pub mod kinematics;
pub mod presets;
pub mod screws;
pub mod subproblems;
pub mod synth;
pub mod workspace;

pub use dynamics::{
    FrictionParams, JointTrajectory, TorqueTrace, TransmissionKind, TransmissionSpec,
};
pub use error::{Error, Result};
pub use identification::{FitOptions, FitReport, TelemetryLog, TorqueVelocityMap};
pub use kinematics::{IkSolutionSet, JointState, MechanismGeometry};
pub use screws::{Pose, Rot3, Twist, Vec3};
pub use subproblems::SubproblemSolutions;
pub use workspace::{TiltExtremes, WorkspaceSample};
