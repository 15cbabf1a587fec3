//! Analytical tilt-range characterization of the orientation workspace.
//!
//! With θ4 = 1 the tool tip sweeps the unit sphere. Roll about ω1 is
//! unrestricted, so the workspace is fully described by the band of polar
//! angles (measured from ω1) reachable by the tool axis. That band is
//! bounded by the critical points of f(θ2) = ω1ᵀ e^(ŵ2θ2) v4, which occur
//! where e^(ŵ2θ2) v4 lies in the ω1-ω2 plane.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use crate::format::format_sig;
use crate::kinematics::MechanismGeometry;
use crate::screws::{rodrigues_unchecked, Vec3};
use crate::{Error, Result};

/// Default θ2 resolution for the sampling oracle.
pub const DEFAULT_GRID: usize = 2048;

/// Header of the workspace sample CSV.
pub const SAMPLE_CSV_HEADER: &str = "theta1_rad,theta2_rad,x,y,z,polar_deg";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltExtremes {
    /// The four candidates ±(α+β), ±(α−β), folded to polar angles in [0, π].
    pub phi_values: [f64; 4],
    pub tilt_min: f64,
    pub tilt_max: f64,
    pub span: f64,
}

impl TiltExtremes {
    /// The band in the negative section-angle convention, (−tilt_max,
    /// −tilt_min). Only the magnitudes are geometric; the sign is a label.
    pub fn signed_range(&self) -> (f64, f64) {
        (-self.tilt_max, -self.tilt_min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkspaceSample {
    pub theta1: f64,
    pub theta2: f64,
    pub point: Vec3,
    pub polar_angle: f64,
}

/// Folds an angle in [−2π, 2π] to the polar angle in [0, π] with the same
/// cosine.
pub fn fold_polar(angle: f64) -> f64 {
    let a = angle.abs() % TAU;
    if a > PI {
        TAU - a
    } else {
        a
    }
}

/// Angle between ω1 and `p`.
pub fn polar_angle(geom: &MechanismGeometry, p: &Vec3) -> f64 {
    geom.omega1().cross(p).norm().atan2(geom.omega1().dot(p))
}

fn rotated_tool_axis(geom: &MechanismGeometry, theta2: f64) -> Vec3 {
    rodrigues_unchecked(geom.omega2(), theta2) * geom.v4()
}

/// f(θ2) = ω1ᵀ e^(ŵ2θ2) v4 = cos φ. Independent of θ1.
pub fn dot_profile(geom: &MechanismGeometry, theta2: f64) -> f64 {
    geom.omega1().dot(&rotated_tool_axis(geom, theta2))
}

/// (f′, f″) with f′ = (ω1×ω2)ᵀ e^(ŵ2θ2) v4 and f″ = ω1ᵀ ŵ2² e^(ŵ2θ2) v4.
pub fn dot_profile_derivatives(geom: &MechanismGeometry, theta2: f64) -> (f64, f64) {
    let w1 = geom.omega1();
    let w2 = geom.omega2();
    let r = rotated_tool_axis(geom, theta2);
    let first = w1.cross(w2).dot(&r);
    let second = w1.dot(&w2.cross(&w2.cross(&r)));
    (first, second)
}

/// The two in-plane directions e^(ŵ2θr) v4 = ±(sin β / sin α) ω1 +
/// (sin(α ∓ β) / sin α) ω2, ordered (upper sign, lower sign). Their polar
/// angles are |α − β| and α + β (folded) respectively.
pub fn critical_directions(geom: &MechanismGeometry) -> Result<[Vec3; 2]> {
    let (a, b) = (geom.alpha(), geom.beta());
    let sa = a.sin();
    if sa.abs() < 1e-9 {
        return Err(Error::DegenerateGeometry("sin α vanishes".into()));
    }
    let w1 = geom.omega1();
    let w2 = geom.omega2();
    Ok([
        w1 * (b.sin() / sa) + w2 * ((a - b).sin() / sa),
        -w1 * (b.sin() / sa) + w2 * ((a + b).sin() / sa),
    ])
}

/// Extreme tilt angles relative to ω1 from α and β alone.
pub fn tilt_extremes(alpha: f64, beta: f64) -> Result<TiltExtremes> {
    for (name, value) in [("alpha", alpha), ("beta", beta)] {
        if !(value > 0.0 && value < PI) {
            return Err(Error::Domain(format!(
                "{name} must lie in (0, π), got {value}"
            )));
        }
    }
    let sum = alpha + beta;
    let diff = alpha - beta;
    let phi_values = [
        fold_polar(sum),
        fold_polar(diff),
        fold_polar(-sum),
        fold_polar(-diff),
    ];
    let tilt_min = diff.abs();
    let tilt_max = fold_polar(sum);
    Ok(TiltExtremes {
        phi_values,
        tilt_min,
        tilt_max,
        span: tilt_max - tilt_min,
    })
}

fn check_grid(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "grid needs at least 2 points, got {n}"
        )));
    }
    Ok(())
}

fn grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| TAU * k as f64 / n as f64)
}

/// Unit-sphere tool positions over an n1 × n2 grid of (θ1, θ2), θ1 outer.
pub fn sample_workspace(
    geom: &MechanismGeometry,
    n1: usize,
    n2: usize,
) -> Result<Vec<WorkspaceSample>> {
    check_grid(n1)?;
    check_grid(n2)?;
    let inner: Vec<(f64, Vec3, f64)> = grid(n2)
        .map(|t2| {
            let p = rotated_tool_axis(geom, t2);
            (t2, p, polar_angle(geom, &p))
        })
        .collect();
    let mut out = Vec::with_capacity(n1 * n2);
    for t1 in grid(n1) {
        let r1 = rodrigues_unchecked(geom.omega1(), t1);
        for &(t2, p, polar) in &inner {
            out.push(WorkspaceSample {
                theta1: t1,
                theta2: t2,
                point: r1 * p,
                polar_angle: polar,
            });
        }
    }
    Ok(out)
}

/// Min and max polar angle over an n-point θ2 grid.
pub fn sampled_polar_band(geom: &MechanismGeometry, n: usize) -> Result<(f64, f64)> {
    check_grid(n)?;
    Ok(grid(n)
        .map(|t2| polar_angle(geom, &rotated_tool_axis(geom, t2)))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        }))
}

pub fn write_samples_csv<W: Write>(
    mut out: W,
    samples: &[WorkspaceSample],
    digits: usize,
) -> std::io::Result<()> {
    writeln!(out, "{SAMPLE_CSV_HEADER}")?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            format_sig(s.theta1, digits),
            format_sig(s.theta2, digits),
            format_sig(s.point.x, digits),
            format_sig(s.point.y, digits),
            format_sig(s.point.z, digits),
            format_sig(s.polar_angle.to_degrees(), digits),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::build_geometry;
    use crate::screws::{rodrigues, Rot3, Twist};
    use crate::subproblems::subproblem1;
    use approx::assert_abs_diff_eq;

    fn geom(a: f64, b: f64) -> MechanismGeometry {
        build_geometry(a.to_radians(), b.to_radians(), Rot3::identity()).unwrap()
    }

    #[test]
    fn dot_profile_at_zero() {
        let g = geom(30.0, 110.0);
        assert_abs_diff_eq!(
            dot_profile(&g, 0.0),
            g.omega1().dot(g.v4()),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            dot_profile(&g, 0.0),
            140f64.to_radians().cos(),
            epsilon = 1e-15
        );
        let g = geom(90.0, 90.0);
        assert_abs_diff_eq!(dot_profile(&g, 0.0), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn dot_profile_matches_full_product() {
        let g = geom(30.0, 110.0);
        for k in 0..50 {
            let t2 = -3.0 + 0.12 * k as f64;
            let full = g.omega1().dot(
                &(rodrigues(g.omega1(), 0.77).unwrap()
                    * rodrigues(g.omega2(), t2).unwrap()
                    * g.v4()),
            );
            assert_abs_diff_eq!(dot_profile(&g, t2), full, epsilon = 1e-14);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let g = geom(30.0, 110.0);
        let h = 1e-6;
        for k in 0..40 {
            let t = -3.1 + 0.155 * k as f64;
            let (d1, d2) = dot_profile_derivatives(&g, t);
            let fd1 = (dot_profile(&g, t + h) - dot_profile(&g, t - h)) / (2.0 * h);
            assert!((d1 - fd1).abs() < 1e-6);
            let h2 = 1e-4;
            let fd2 = (dot_profile(&g, t + h2) - 2.0 * dot_profile(&g, t)
                + dot_profile(&g, t - h2))
                / (h2 * h2);
            assert!((d2 - fd2).abs() < 1e-5);
        }
    }

    #[test]
    fn critical_points_are_extrema() {
        let g = geom(30.0, 110.0);
        let xi2 = Twist::revolute(*g.omega2()).unwrap();
        for c in critical_directions(&g).unwrap() {
            assert_abs_diff_eq!(c.norm(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.dot(&g.omega1().cross(g.omega2())), 0.0, epsilon = 1e-12);
            let theta_r = subproblem1(&xi2, g.v4(), &c).unwrap().as_slice()[0];
            let (d1, d2) = dot_profile_derivatives(&g, theta_r);
            assert!(d1.abs() < 1e-10);
            assert!(d2.abs() > 1e-3);
        }
        let [upper, lower] = critical_directions(&g).unwrap();
        assert_abs_diff_eq!(
            g.omega1().dot(&upper),
            (-80f64).to_radians().cos(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            g.omega1().dot(&lower),
            140f64.to_radians().cos(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn tilt_extremes_design_point() {
        let t = tilt_extremes(30f64.to_radians(), 110f64.to_radians()).unwrap();
        assert_abs_diff_eq!(t.tilt_min, 80f64.to_radians(), epsilon = 1e-12);
        assert_abs_diff_eq!(t.tilt_max, 140f64.to_radians(), epsilon = 1e-12);
        assert_abs_diff_eq!(t.span, 60f64.to_radians(), epsilon = 1e-12);
        let (lo, hi) = t.signed_range();
        assert_abs_diff_eq!(lo.to_degrees(), -140.0, epsilon = 1e-9);
        assert_abs_diff_eq!(hi.to_degrees(), -80.0, epsilon = 1e-9);
    }

    #[test]
    fn tilt_extremes_equal_angles_reach_pole() {
        let a = 0.4;
        let t = tilt_extremes(a, a).unwrap();
        assert_eq!(t.tilt_min, 0.0);
        assert_abs_diff_eq!(t.tilt_max, 2.0 * a, epsilon = 1e-15);
    }

    #[test]
    fn tilt_extremes_folds_past_pi() {
        let t = tilt_extremes(120f64.to_radians(), 100f64.to_radians()).unwrap();
        assert_abs_diff_eq!(t.tilt_max, 140f64.to_radians(), epsilon = 1e-12);
        assert!(t.phi_values.iter().all(|p| (0.0..=PI).contains(p)));
    }

    #[test]
    fn tilt_extremes_against_dense_scan() {
        // 10^6-point θ2 scan oracle for (45°, 90°)
        let g = geom(45.0, 90.0);
        let (lo, hi) = (0..1_000_000)
            .map(|k| {
                dot_profile(&g, TAU * (k as f64 + 0.5) / 1e6)
                    .clamp(-1.0, 1.0)
                    .acos()
            })
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| {
                (l.min(x), h.max(x))
            });
        let t = tilt_extremes(45f64.to_radians(), 90f64.to_radians()).unwrap();
        assert!((lo - t.tilt_min).to_degrees().abs() < 0.01);
        assert!((hi - t.tilt_max).to_degrees().abs() < 0.01);
        assert_abs_diff_eq!(t.span, 90f64.to_radians(), epsilon = 1e-12);
    }

    #[test]
    fn tilt_extremes_domain() {
        assert!(tilt_extremes(0.0, 1.0).is_err());
        assert!(tilt_extremes(1.0, PI).is_err());
    }

    #[test]
    fn samples_on_unit_sphere_and_circles() {
        let g = geom(30.0, 110.0);
        let s = sample_workspace(&g, 16, 12).unwrap();
        assert_eq!(s.len(), 16 * 12);
        assert!(s.iter().all(|x| (x.point.norm() - 1.0).abs() < 1e-12));
        for j in 0..12 {
            let polar: Vec<f64> = (0..16)
                .map(|i| polar_angle(&g, &s[i * 12 + j].point))
                .collect();
            assert!(polar.iter().all(|p| (p - polar[0]).abs() < 1e-12));
        }
        assert!(sample_workspace(&g, 1, 12).is_err());
    }

    #[test]
    fn samples_agree_with_forward_kinematics() {
        use crate::kinematics::{forward_kinematics, JointState};
        let g = geom(30.0, 110.0);
        for s in sample_workspace(&g, 5, 7).unwrap() {
            let p = forward_kinematics(&g, &JointState::new(s.theta1, s.theta2, 0.0, 1.0)).position;
            assert_abs_diff_eq!(p, s.point, epsilon = 1e-14);
        }
    }

    #[test]
    fn csv_layout() {
        let g = geom(30.0, 110.0);
        let s = sample_workspace(&g, 2, 3).unwrap();
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &s, 9).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SAMPLE_CSV_HEADER);
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[1].split(',').count(), 6);
    }
}
