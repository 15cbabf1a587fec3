//! Minimal rigid-body and screw algebra.
//!
//! Rotations are explicit 3x3 matrices. Twists are restricted to the two
//! kinds the mechanism needs: zero-pitch revolute twists whose axis passes
//! through the origin (the RCM) and infinite-pitch prismatic twists.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};

use crate::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Rot3 = Matrix3<f64>;

/// Accepted deviation from unit norm for axes handed to constructors.
pub const UNIT_TOLERANCE: f64 = 1e-9;

fn check_unit(axis: &Vec3) -> Result<Vec3> {
    let norm = axis.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NonUnitAxis { norm });
    }
    Ok(axis / norm)
}

/// Rotation by `angle` about the unit `axis`, e^(ŵθ).
pub fn rodrigues(axis: &Vec3, angle: f64) -> Result<Rot3> {
    let axis = check_unit(axis)?;
    Ok(rodrigues_unchecked(&axis, angle))
}

pub(crate) fn rodrigues_unchecked(axis: &Vec3, angle: f64) -> Rot3 {
    let k = axis.cross_matrix();
    let (s, c) = angle.sin_cos();
    Rot3::identity() + k * s + k * k * (1.0 - c)
}

/// Maps an angle to the representative in (-π, π].
pub fn normalize_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Smallest signed difference `a - b` on the circle.
pub fn angle_difference(a: f64, b: f64) -> f64 {
    normalize_angle(a - b)
}

/// Checks RᵀR = I and det R = +1 within `tol`.
pub fn is_rotation(r: &Rot3, tol: f64) -> bool {
    let ortho = (r.transpose() * r - Rot3::identity()).amax();
    ortho <= tol && (r.determinant() - 1.0).abs() <= tol
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointKind {
    Revolute,
    Prismatic,
}

/// Unit twist coordinates (v, ω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist {
    linear: Vec3,
    angular: Vec3,
    kind: JointKind,
}

impl Twist {
    /// Zero-pitch twist about an axis through the origin.
    pub fn revolute(axis: Vec3) -> Result<Self> {
        Ok(Self {
            linear: Vec3::zeros(),
            angular: check_unit(&axis)?,
            kind: JointKind::Revolute,
        })
    }

    /// Pure translation along `direction`.
    pub fn prismatic(direction: Vec3) -> Result<Self> {
        Ok(Self {
            linear: check_unit(&direction)?,
            angular: Vec3::zeros(),
            kind: JointKind::Prismatic,
        })
    }

    pub fn linear(&self) -> &Vec3 {
        &self.linear
    }

    pub fn angular(&self) -> &Vec3 {
        &self.angular
    }

    pub fn kind(&self) -> JointKind {
        self.kind
    }

    /// Direction of the joint axis: ω for revolute, v for prismatic.
    pub fn axis(&self) -> &Vec3 {
        match self.kind {
            JointKind::Revolute => &self.angular,
            JointKind::Prismatic => &self.linear,
        }
    }

    /// e^(ξ̂θ). Revolute: (e^(ŵθ), 0). Prismatic: (I, vθ).
    pub fn exp(&self, theta: f64) -> Pose {
        match self.kind {
            JointKind::Revolute => Pose {
                rotation: rodrigues_unchecked(&self.angular, theta),
                position: Vec3::zeros(),
            },
            JointKind::Prismatic => Pose {
                rotation: Rot3::identity(),
                position: self.linear * theta,
            },
        }
    }
}

pub fn twist_exp(xi: &Twist, theta: f64) -> Pose {
    xi.exp(theta)
}

/// Rigid transform (R, p) in SE(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Rot3,
    pub position: Vec3,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn new(rotation: Rot3, position: Vec3) -> Self {
        Self { rotation, position }
    }

    pub fn identity() -> Self {
        Self {
            rotation: Rot3::identity(),
            position: Vec3::zeros(),
        }
    }

    pub fn from_rotation(rotation: Rot3) -> Self {
        Self::new(rotation, Vec3::zeros())
    }

    /// R·p + t
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.position
    }

    /// self ∘ other
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * other.rotation,
            position: self.rotation * other.position + self.position,
        }
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose {
            rotation: rt,
            position: -(rt * self.position),
        }
    }

    /// Position error (Euclidean) and rotation error (Frobenius norm of the
    /// matrix difference).
    pub fn error_to(&self, other: &Pose) -> (f64, f64) {
        (
            (self.position - other.position).norm(),
            (self.rotation - other.rotation).norm(),
        )
    }
}

pub fn pose_apply(g: &Pose, p: &Vec3) -> Vec3 {
    g.apply(p)
}

pub fn pose_compose(a: &Pose, b: &Pose) -> Pose {
    a.compose(b)
}

pub fn pose_inverse(g: &Pose) -> Pose {
    g.inverse()
}
