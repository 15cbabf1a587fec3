//! Closed-form geometric subproblems.
//!
//! Subproblems 1 and 2 are the classical Paden-Kahan rotations of a point,
//! restricted to axes through the origin. Subproblem 3′ translates a point
//! along a line until it sits at a prescribed distance from a second point.
//! Returned solutions are always sorted ascending.

use crate::screws::{normalize_angle, JointKind, Twist, Vec3, UNIT_TOLERANCE};
use crate::{Error, Result};

/// Relative tolerance for the consistency checks of subproblems 1 and 2.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-9;

/// Discriminants inside `[-TANGENCY_BAND, TANGENCY_BAND]` are treated as a
/// single tangent solution.
pub const TANGENCY_BAND: f64 = 1e-12;

/// Distances below this (relative) count as lying on a rotation axis.
const ON_AXIS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolutions<T> {
    solutions: Vec<T>,
}

impl<T> SubproblemSolutions<T> {
    fn new(solutions: Vec<T>) -> Self {
        Self { solutions }
    }

    pub fn multiplicity(&self) -> usize {
        self.solutions.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.solutions
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.solutions.iter()
    }

    pub fn into_vec(self) -> Vec<T> {
        self.solutions
    }
}

impl<T> IntoIterator for SubproblemSolutions<T> {
    type Item = T;
    type IntoIter = std::vec::IntoIter<T>;

    fn into_iter(self) -> Self::IntoIter {
        self.solutions.into_iter()
    }
}

fn revolute_axis(xi: &Twist) -> Result<Vec3> {
    match xi.kind() {
        JointKind::Revolute => Ok(*xi.angular()),
        JointKind::Prismatic => Err(Error::Domain("expected a revolute twist".into())),
    }
}

fn scale_of(p: &Vec3, q: &Vec3) -> f64 {
    p.norm().max(q.norm()).max(1.0)
}

/// Angle θ with e^(ξ̂θ)·p = q for a revolute twist through the origin.
pub fn subproblem1(xi: &Twist, p: &Vec3, q: &Vec3) -> Result<SubproblemSolutions<f64>> {
    let w = revolute_axis(xi)?;
    let scale = scale_of(p, q);
    let u = p - w * w.dot(p);
    let v = q - w * w.dot(q);
    if u.norm() < ON_AXIS * scale {
        return Err(Error::DegenerateInput(
            "point lies on the rotation axis".into(),
        ));
    }
    if (w.dot(p) - w.dot(q)).abs() > CONSISTENCY_TOLERANCE * scale
        || (u.norm() - v.norm()).abs() > CONSISTENCY_TOLERANCE * scale
    {
        return Err(Error::NoSolution);
    }
    let theta = w.dot(&u.cross(&v)).atan2(u.dot(&v));
    Ok(SubproblemSolutions::new(vec![normalize_angle(theta)]))
}

/// Pairs (θ1, θ2) with e^(ξ̂1θ1)·e^(ξ̂2θ2)·p = q for two revolute twists
/// whose axes intersect at the origin.
///
/// The intermediate point c = e^(ξ̂2θ2)·p = e^(-ξ̂1θ1)·q is written as a
/// linear combination of ω1, ω2 and ω1×ω2. When c falls on the ω1 axis θ1
/// is indeterminate and reported as 0.
pub fn subproblem2(
    xi1: &Twist,
    xi2: &Twist,
    p: &Vec3,
    q: &Vec3,
) -> Result<SubproblemSolutions<(f64, f64)>> {
    let w1 = revolute_axis(xi1)?;
    let w2 = revolute_axis(xi2)?;
    let cross = w1.cross(&w2);
    if cross.norm() < UNIT_TOLERANCE {
        return Err(Error::DegenerateAxes);
    }
    let scale = scale_of(p, q);
    if (p.norm() - q.norm()).abs() > CONSISTENCY_TOLERANCE * scale {
        return Err(Error::NoSolution);
    }
    if (p - w2 * w2.dot(p)).norm() < ON_AXIS * scale {
        return Err(Error::DegenerateInput(
            "point lies on the second axis".into(),
        ));
    }

    let d = w1.dot(&w2);
    let denom = d * d - 1.0;
    let a = (d * w2.dot(p) - w1.dot(q)) / denom;
    let b = (d * w1.dot(q) - w2.dot(p)) / denom;
    let gamma_sq = (p.norm_squared() - a * a - b * b - 2.0 * a * b * d) / cross.norm_squared();
    if gamma_sq < -TANGENCY_BAND * scale * scale {
        return Err(Error::NoSolution);
    }
    let gamma = gamma_sq.max(0.0).sqrt();
    let gammas: &[f64] = if gamma * cross.norm() < ON_AXIS * scale {
        &[0.0]
    } else {
        &[-gamma, gamma]
    };

    let base = w1 * a + w2 * b;
    let mut out = Vec::with_capacity(2);
    for &g in gammas {
        let c = base + cross * g;
        let theta2 = subproblem1(xi2, p, &c)?.as_slice()[0];
        let theta1 = if (c - w1 * w1.dot(&c)).norm() < ON_AXIS * scale {
            0.0
        } else {
            subproblem1(xi1, &c, q)?.as_slice()[0]
        };
        out.push((theta1, theta2));
    }
    out.sort_by(|x, y| x.partial_cmp(y).expect("finite angles"));
    Ok(SubproblemSolutions::new(out))
}

/// All θ with ‖q − (p + vθ)‖ = δ.
///
/// With u = q − p the roots are θ = uᵀv ± √((uᵀv)² + δ² − ‖u‖²).
pub fn subproblem3prime(
    v: &Vec3,
    p: &Vec3,
    q: &Vec3,
    delta: f64,
) -> Result<SubproblemSolutions<f64>> {
    let norm = v.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NonUnitAxis { norm });
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!(
            "distance must be positive, got {delta}"
        )));
    }
    let v = v / norm;
    let u = q - p;
    let along = u.dot(&v);
    let disc = along * along + delta * delta - u.norm_squared();
    if disc < -TANGENCY_BAND {
        return Err(Error::NoSolution);
    }
    if disc <= TANGENCY_BAND {
        return Ok(SubproblemSolutions::new(vec![along]));
    }
    let root = disc.sqrt();
    Ok(SubproblemSolutions::new(vec![along - root, along + root]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::screws::rodrigues;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn rz() -> Twist {
        Twist::revolute(Vec3::z()).unwrap()
    }

    #[test]
    fn sp1_basic_cases() {
        let s = subproblem1(&rz(), &Vec3::x(), &Vec3::x()).unwrap();
        assert_eq!(s.as_slice(), &[0.0]);
        let s = subproblem1(&rz(), &Vec3::x(), &Vec3::y()).unwrap();
        assert_abs_diff_eq!(s.as_slice()[0], FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn sp1_round_trip_oblique_axis() {
        let w = Vec3::new(1.0, 1.0, 1.0) / 3f64.sqrt();
        let xi = Twist::revolute(w).unwrap();
        let p = Vec3::new(0.3, -0.7, 0.2);
        let q = rodrigues(&w, 1.234).unwrap() * p;
        let s = subproblem1(&xi, &p, &q).unwrap();
        assert_abs_diff_eq!(s.as_slice()[0], 1.234, epsilon = 1e-12);
    }

    #[test]
    fn sp1_errors() {
        assert!(matches!(
            subproblem1(&rz(), &Vec3::z(), &Vec3::z()),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            subproblem1(&rz(), &Vec3::x(), &(Vec3::y() * 2.0)),
            Err(Error::NoSolution)
        ));
        assert!(matches!(
            subproblem1(&rz(), &Vec3::x(), &Vec3::new(0.0, 1.0, 0.1)),
            Err(Error::NoSolution)
        ));
        let prismatic = Twist::prismatic(Vec3::x()).unwrap();
        assert!(subproblem1(&prismatic, &Vec3::x(), &Vec3::x()).is_err());
    }

    #[test]
    fn sp2_identity_pair_present() {
        let xi1 = rz();
        let xi2 = Twist::revolute(Vec3::x()).unwrap();
        let p = Vec3::new(0.2, 0.5, 0.7);
        let s = subproblem2(&xi1, &xi2, &p, &p).unwrap();
        assert!(s.iter().any(|&(a, b)| a.abs() < 1e-12 && b.abs() < 1e-12));
    }

    #[test]
    fn sp2_round_trip() {
        let xi1 = rz();
        let xi2 = Twist::revolute(Vec3::x()).unwrap();
        let p = Vec3::y();
        let q = rodrigues(&Vec3::z(), 0.7).unwrap() * rodrigues(&Vec3::x(), 0.4).unwrap() * p;
        let s = subproblem2(&xi1, &xi2, &p, &q).unwrap();
        assert_eq!(s.multiplicity(), 2);
        assert!(s
            .iter()
            .any(|&(a, b)| (a - 0.7).abs() < 1e-12 && (b - 0.4).abs() < 1e-12));
        for &(a, b) in s.iter() {
            let r = xi1.exp(a).rotation * xi2.exp(b).rotation * p;
            assert!((r - q).norm() < 1e-10);
        }
    }

    #[test]
    fn sp2_errors() {
        let xi1 = rz();
        let xi2 = Twist::revolute(Vec3::x()).unwrap();
        assert!(matches!(
            subproblem2(&xi1, &xi2, &Vec3::y(), &(Vec3::y() * 2.0)),
            Err(Error::NoSolution)
        ));
        assert!(matches!(
            subproblem2(&xi1, &rz(), &Vec3::y(), &Vec3::y()),
            Err(Error::DegenerateAxes)
        ));
        // circles about z through x-rotations of y never reach this point
        let far = Twist::revolute(Vec3::new(0.0, 0.5f64.sqrt(), 0.5f64.sqrt())).unwrap();
        let p = Vec3::new(0.0, 0.5f64.sqrt(), 0.5f64.sqrt());
        let p_off = Vec3::new(1.0, 0.0, 0.0);
        assert!(subproblem2(&xi1, &far, &p_off, &Vec3::z()).is_err());
        assert!(matches!(
            subproblem2(&xi1, &far, &p, &p),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn sp2_point_on_first_axis_reports_zero() {
        let xi1 = rz();
        let xi2 = Twist::revolute(Vec3::x()).unwrap();
        let p = Vec3::y();
        let s = subproblem2(&xi1, &xi2, &p, &Vec3::z()).unwrap();
        assert_eq!(s.multiplicity(), 1);
        let (a, b) = s.as_slice()[0];
        assert_eq!(a, 0.0);
        assert_abs_diff_eq!(b, FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn sp3prime_cases() {
        let v = Vec3::new(0.0, 0.6, 0.8);
        let p = Vec3::new(0.1, 0.2, 0.3);
        let s = subproblem3prime(&v, &p, &p, 1.0).unwrap();
        assert_eq!(s.as_slice(), &[-1.0, 1.0]);

        let s =
            subproblem3prime(&Vec3::x(), &Vec3::zeros(), &Vec3::new(2.0, 0.0, 0.0), 1.0).unwrap();
        assert_eq!(s.as_slice(), &[1.0, 3.0]);
        for &t in s.iter() {
            assert!(((Vec3::new(2.0, 0.0, 0.0) - Vec3::x() * t).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sp3prime_line_misses_sphere() {
        let q = Vec3::new(0.0, 2.0, 0.0);
        // scan oracle: closest approach of the line to q is 2 > 1
        let min = (-4000..=4000)
            .map(|k| (q - Vec3::x() * (k as f64 * 1e-3)).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(min >= 2.0 - 1e-12);
        assert!(matches!(
            subproblem3prime(&Vec3::x(), &Vec3::zeros(), &q, 1.0),
            Err(Error::NoSolution)
        ));
    }

    #[test]
    fn sp3prime_tangent_and_domain() {
        let q = Vec3::new(0.0, 1.0, 0.0);
        let s = subproblem3prime(&Vec3::x(), &Vec3::zeros(), &q, 1.0).unwrap();
        assert_eq!(s.multiplicity(), 1);
        assert!(subproblem3prime(&Vec3::x(), &Vec3::zeros(), &q, 0.0).is_err());
        assert!(subproblem3prime(&(Vec3::x() * 2.0), &Vec3::zeros(), &q, 1.0).is_err());
    }
}
