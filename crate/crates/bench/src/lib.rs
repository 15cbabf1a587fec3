//! Fixtures shared by the benchmarks.

use ssmkit_core::identification::MapPoint;
use ssmkit_core::kinematics::{build_geometry, forward_kinematics};
use ssmkit_core::{
    presets, FrictionParams, JointState, MechanismGeometry, Pose, Rot3, TorqueVelocityMap,
    TransmissionSpec,
};

/// α = 30°, β = 110°, R0 = I.
pub fn prototype() -> MechanismGeometry {
    build_geometry(30f64.to_radians(), 110f64.to_radians(), Rot3::identity())
        .expect("prototype geometry is valid")
}

/// Deterministic spread of joint states with |θ4| in [5, 50] mm.
pub fn joint_states(n: usize) -> Vec<JointState> {
    (0..n)
        .map(|i| {
            let x = i as f64 + 0.5;
            JointState::new(
                (x * 0.7).sin() * 3.0,
                (x * 1.3).cos() * 3.0,
                (x * 0.37).sin() * 3.0,
                (0.005 + 0.045 * (x * 0.11).sin().abs()) * if i % 2 == 0 { 1.0 } else { -1.0 },
            )
        })
        .collect()
}

pub fn targets(geom: &MechanismGeometry, n: usize) -> Vec<Pose> {
    joint_states(n)
        .iter()
        .map(|q| forward_kinematics(geom, q))
        .collect()
}

/// Noiseless joint 1 map over twelve motor velocities under a 2 N·m load.
pub fn joint1_map() -> (TransmissionSpec, FrictionParams, TorqueVelocityMap) {
    let spec = presets::worm_gear();
    let params = presets::friction(1).expect("joint 1 preset");
    let model = ssmkit_core::dynamics::TorqueModel::new(spec, params).expect("valid preset");
    let map = TorqueVelocityMap::from_points(
        [3.0, 6.0, 12.0, 150.0, 300.0, 450.0]
            .iter()
            .flat_map(|&w| [w, -w])
            .map(|w| MapPoint {
                velocity: w,
                torque: model.steady_state_torque(2.0, w),
                torque_std: 0.0,
                count: 1,
            }),
    );
    (spec, params, map)
}
