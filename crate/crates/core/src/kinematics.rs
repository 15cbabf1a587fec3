//! Mechanism geometry, forward kinematics and closed-form inverse kinematics.
//!
//! Axes are placed canonically: ω1 = ẑ, ω2 in the xz-plane at angle α from
//! ω1, and ω3 obtained by rotating ω2 by β about the normal of the ω1-ω2
//! plane. The translation direction v4 coincides with ω3.

use crate::screws::{is_rotation, normalize_angle, Pose, Rot3, Twist, Vec3};
use crate::subproblems::{subproblem1, subproblem2, subproblem3prime};
use crate::{Error, Result};

/// Branches whose forward kinematics miss the target by more than this
/// (position in meters, scaled by max(1, |θ4|); rotation Frobenius) are
/// discarded.
pub const IK_TOLERANCE: f64 = 1e-9;

/// Targets whose tool axis lies within this angle of ±ω1 are flagged as
/// singular (θ1 indeterminate).
pub const SINGULARITY_ANGLE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct MechanismGeometry {
    alpha: f64,
    beta: f64,
    omega1: Vec3,
    omega2: Vec3,
    omega3: Vec3,
    v4: Vec3,
    r0: Rot3,
}

impl MechanismGeometry {
    pub fn new(alpha: f64, beta: f64, r0: Rot3) -> Result<Self> {
        build_geometry(alpha, beta, r0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn omega1(&self) -> &Vec3 {
        &self.omega1
    }

    pub fn omega2(&self) -> &Vec3 {
        &self.omega2
    }

    pub fn omega3(&self) -> &Vec3 {
        &self.omega3
    }

    pub fn v4(&self) -> &Vec3 {
        &self.v4
    }

    pub fn r0(&self) -> &Rot3 {
        &self.r0
    }

    /// Reference configuration g0 = (R0, 0).
    pub fn home_pose(&self) -> Pose {
        Pose::from_rotation(self.r0)
    }

    /// Unit twists ξ1..ξ4.
    pub fn twists(&self) -> [Twist; 4] {
        // axes are unit by construction
        [
            Twist::revolute(self.omega1).expect("unit axis"),
            Twist::revolute(self.omega2).expect("unit axis"),
            Twist::revolute(self.omega3).expect("unit axis"),
            Twist::prismatic(self.v4).expect("unit axis"),
        ]
    }
}

pub fn build_geometry(alpha: f64, beta: f64, r0: Rot3) -> Result<MechanismGeometry> {
    for (name, value) in [("alpha", alpha), ("beta", beta)] {
        if !(value > 0.0 && value < std::f64::consts::PI) {
            return Err(Error::Domain(format!(
                "{name} must lie in (0, π), got {value}"
            )));
        }
    }
    if !is_rotation(&r0, 1e-9) {
        return Err(Error::Domain("r0 is not a rotation matrix".into()));
    }
    let omega1 = Vec3::z();
    let omega2 = Vec3::new(alpha.sin(), 0.0, alpha.cos());
    let omega3 = Vec3::new((alpha + beta).sin(), 0.0, (alpha + beta).cos());
    Ok(MechanismGeometry {
        alpha,
        beta,
        omega1,
        omega2,
        omega3,
        v4: omega3,
        r0,
    })
}

/// Joint coordinates: three angles (rad) and the tool translation (m).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointState {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
}

impl JointState {
    pub fn new(theta1: f64, theta2: f64, theta3: f64, theta4: f64) -> Self {
        Self {
            theta1,
            theta2,
            theta3,
            theta4,
        }
    }

    /// Angular components mapped to (-π, π].
    pub fn normalized(&self) -> Self {
        Self {
            theta1: normalize_angle(self.theta1),
            theta2: normalize_angle(self.theta2),
            theta3: normalize_angle(self.theta3),
            theta4: self.theta4,
        }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.theta1, self.theta2, self.theta3, self.theta4]
    }

    /// Largest component-wise distance, wrapping the angles.
    pub fn distance(&self, other: &JointState) -> f64 {
        use crate::screws::angle_difference;
        angle_difference(self.theta1, other.theta1)
            .abs()
            .max(angle_difference(self.theta2, other.theta2).abs())
            .max(angle_difference(self.theta3, other.theta3).abs())
            .max((self.theta4 - other.theta4).abs())
    }
}

/// g_st(θ) = e^(ξ̂1θ1) e^(ξ̂2θ2) e^(ξ̂3θ3) e^(ξ̂4θ4) g0.
pub fn forward_kinematics(geom: &MechanismGeometry, theta: &JointState) -> Pose {
    let [xi1, xi2, xi3, xi4] = geom.twists();
    xi1.exp(theta.theta1)
        .compose(&xi2.exp(theta.theta2))
        .compose(&xi3.exp(theta.theta3))
        .compose(&xi4.exp(theta.theta4))
        .compose(&geom.home_pose())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkBranch {
    pub joints: JointState,
    pub position_error: f64,
    pub rotation_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IkSolutionSet {
    pub branches: Vec<IkBranch>,
    /// Tool axis aligned with ω1: θ1 is indeterminate and reported as 0.
    pub singular: bool,
}

impl IkSolutionSet {
    /// First branch with θ4 ≥ 0, falling back to the first branch.
    pub fn preferred(&self) -> &IkBranch {
        self.branches
            .iter()
            .find(|b| b.joints.theta4 >= 0.0)
            .unwrap_or(&self.branches[0])
    }
}

/// Probe points (p1, p2, p3) for the three reduction steps: p1 and p2 on
/// the tool axis, p3 on the normal of the ω1-ω2 plane (perpendicular to ω3).
pub fn probe_point_defaults(geom: &MechanismGeometry) -> Result<(Vec3, Vec3, Vec3)> {
    let p2 = geom.v4;
    if geom.omega2.cross(&p2).norm() < 1e-9 {
        return Err(Error::DegenerateGeometry(
            "tool axis is parallel to the second joint axis".into(),
        ));
    }
    let normal = geom.omega1.cross(&geom.omega2).normalize();
    Ok((geom.v4, p2, normal))
}

/// Closed-form inverse kinematics.
///
/// 1. Distance from the RCM to the image of a tool-axis point fixes θ4
///    (subproblem 3′).
/// 2. A tool-axis point pulled back through θ4 fixes (θ1, θ2) (subproblem 2).
/// 3. A point off the tool axis fixes θ3 (subproblem 1).
pub fn inverse_kinematics(geom: &MechanismGeometry, target: &Pose) -> Result<IkSolutionSet> {
    if !is_rotation(&target.rotation, 1e-9) {
        return Err(Error::Domain("target rotation is not orthonormal".into()));
    }
    let (mut p1, p2, p3) = probe_point_defaults(geom)?;
    let [xi1, xi2, xi3, xi4] = geom.twists();
    let g1 = target.compose(&geom.home_pose().inverse());
    let rcm = Vec3::zeros();

    let mut delta = (g1.apply(&p1) - rcm).norm();
    if delta < 1e-6 {
        // p1 mapped onto the RCM; the opposite tool-axis point is far from it
        p1 = -p1;
        delta = (g1.apply(&p1) - rcm).norm();
    }
    let translations = subproblem3prime(xi4.linear(), &p1, &rcm, delta).map_err(|_| {
        Error::Unreachable("no tool translation matches the target distance".into())
    })?;

    let scale = target.position.norm().max(1.0);
    let mut singular = false;
    let mut branches: Vec<IkBranch> = Vec::new();
    for theta4 in translations {
        let q2 = g1.apply(&xi4.exp(-theta4).apply(&p2));
        let axial = q2.dot(&geom.omega1).abs() / q2.norm();
        if q2.norm() > 0.0 && q2.cross(&geom.omega1).norm().atan2(axial) < SINGULARITY_ANGLE {
            singular = true;
        }
        let pairs = match subproblem2(&xi1, &xi2, &p2, &q2) {
            Ok(s) => s,
            Err(Error::NoSolution) => continue,
            Err(e) => return Err(e),
        };
        for (theta1, theta2) in pairs {
            let q3 = xi2
                .exp(-theta2)
                .compose(&xi1.exp(-theta1))
                .compose(&g1)
                .compose(&xi4.exp(-theta4))
                .apply(&p3);
            let theta3 = match subproblem1(&xi3, &p3, &q3) {
                Ok(s) => s.as_slice()[0],
                Err(Error::NoSolution) => continue,
                Err(e) => return Err(e),
            };
            let joints = JointState::new(theta1, theta2, theta3, theta4).normalized();
            let (position_error, rotation_error) =
                forward_kinematics(geom, &joints).error_to(target);
            if position_error > IK_TOLERANCE * scale || rotation_error > IK_TOLERANCE {
                continue;
            }
            if branches.iter().any(|b| b.joints.distance(&joints) < 1e-12) {
                continue;
            }
            branches.push(IkBranch {
                joints,
                position_error,
                rotation_error,
            });
        }
    }
    if branches.is_empty() {
        return Err(Error::Unreachable(
            "target orientation or position is outside the workspace".into(),
        ));
    }
    branches.sort_by(|a, b| {
        (b.joints.theta4 >= 0.0)
            .cmp(&(a.joints.theta4 >= 0.0))
            .then(
                a.joints
                    .to_array()
                    .partial_cmp(&b.joints.to_array())
                    .expect("finite"),
            )
    });
    Ok(IkSolutionSet { branches, singular })
}
