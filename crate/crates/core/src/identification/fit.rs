use nalgebra::{DMatrix, DVector};

use super::map::{BreakawaySample, MapPoint, TorqueVelocityMap};
use crate::dynamics::{
    inverse_dynamics, nrmsd, FrictionParams, JointTrajectory, TorqueModel, TorqueTrace,
    TransmissionSpec,
};
use crate::{Error, Result};

const MAX_ITERATIONS: usize = 200;
/// μc assumed when neither the data nor a prior determines it, typical of
/// a bronze worm wheel on a steel worm.
pub const FALLBACK_MU_C: f64 = 0.1;
const CONDITION_LIMIT: f64 = 1e-12;
/// Two-sided 95 % normal quantile.
const Z95: f64 = 1.96;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitOptions {
    /// Constant joint-side load held during the sweep, N·m (or N). Needed
    /// to identify μc.
    pub test_load: f64,
    pub breakaway: Vec<BreakawaySample>,
    /// μc used when the data cannot identify it.
    pub mu_c_prior: Option<f64>,
}

/// 95 % confidence half-widths.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HalfWidths {
    pub b_c: f64,
    pub b_v: f64,
    pub mu_c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub params: FrictionParams,
    /// NRMSD of the fitted model over all map points.
    pub residual: f64,
    pub residual_positive: Option<f64>,
    pub residual_negative: Option<f64>,
    pub half_widths: HalfWidths,
    pub mu_c_identified: bool,
    pub mu_s_from_breakaway: bool,
    /// Only one rotation direction was present in the map.
    pub one_direction: bool,
    pub warnings: Vec<String>,
}

fn sgn(w: f64) -> f64 {
    if w > 0.0 {
        1.0
    } else if w < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// μc from the fitted driving coefficient κ = 1/η_d.
fn mu_from_kappa(kappa: f64, lead: f64) -> f64 {
    ((kappa * lead.tan()).atan() - lead).tan()
}

struct Solve {
    x: DVector<f64>,
    cov: DMatrix<f64>,
}

/// Weighted linear least squares through column-scaled normal equations.
fn solve_weighted(a: &DMatrix<f64>, y: &DVector<f64>, weights: &[f64]) -> Result<Solve> {
    let (n, p) = a.shape();
    let mut aw = a.clone();
    let mut yw = y.clone();
    for i in 0..n {
        aw.row_mut(i).scale_mut(weights[i]);
        yw[i] *= weights[i];
    }
    let scale: Vec<f64> = (0..p).map(|j| aw.column(j).amax()).collect();
    if scale.iter().any(|&s| s == 0.0 || !s.is_finite()) {
        return Err(Error::RankDeficient(
            "a regressor column is identically zero".into(),
        ));
    }
    for (j, &s) in scale.iter().enumerate() {
        aw.column_mut(j).unscale_mut(s);
    }
    let normal = aw.transpose() * &aw;
    let eig = normal.clone().symmetric_eigen().eigenvalues;
    let (lo, hi) = (eig.min(), eig.max());
    if lo.is_nan() || lo <= CONDITION_LIMIT * hi {
        return Err(Error::RankDeficient(
            "velocities do not separate the friction terms".into(),
        ));
    }
    let inv = normal
        .cholesky()
        .ok_or_else(|| Error::RankDeficient("normal matrix is not positive definite".into()))?
        .inverse();
    let xs = &inv * (aw.transpose() * &yw);
    let resid = &yw - &aw * &xs;
    let dof = n.saturating_sub(p);
    let s2 = if dof > 0 {
        resid.norm_squared() / dof as f64
    } else {
        0.0
    };
    let d = DMatrix::from_diagonal(&DVector::from_iterator(p, scale.iter().map(|s| 1.0 / s)));
    Ok(Solve {
        x: DVector::from_iterator(p, xs.iter().zip(&scale).map(|(v, s)| v / s)),
        cov: &d * inv * &d * s2,
    })
}

/// Static friction from breakaway samples in the driving direction.
fn mu_s_from_breakaways(
    samples: &[BreakawaySample],
    spec: &TransmissionSpec,
    load: f64,
    b_c: f64,
) -> Option<f64> {
    let lead = spec.lead_angle;
    let estimates: Vec<f64> = samples
        .iter()
        .filter(|b| load != 0.0 && load * b.direction > 0.0)
        .filter_map(|b| {
            let excess = b.torque - b_c * sgn(b.direction);
            if excess * load <= 0.0 {
                return None;
            }
            let kappa = excess * spec.ratio / load;
            Some(mu_from_kappa(kappa, lead))
        })
        .collect();
    if estimates.is_empty() {
        None
    } else {
        Some(estimates.iter().sum::<f64>() / estimates.len() as f64)
    }
}

fn map_nrmsd(points: &[&MapPoint], model: &TorqueModel, load: f64) -> Result<f64> {
    let time: Vec<f64> = (0..points.len()).map(|i| i as f64).collect();
    let sim = points
        .iter()
        .map(|p| model.steady_state_torque(load, p.velocity))
        .collect();
    let meas = points.iter().map(|p| p.torque).collect();
    nrmsd(
        &TorqueTrace::new(time.clone(), sim)?,
        &TorqueTrace::new(time, meas)?,
    )
}

/// Fits b_c, b_v and μc jointly over both directions:
///
/// ```text
/// τ = b_c·sgn(w) + b_v·w + load term
/// ```
///
/// Driving points carry `κ·L/ratio` with κ = 1/η_d(μc) as a free
/// coefficient; overhauling points carry the known `L·η_o/ratio` of the
/// current estimate, iterated to a fixed point by secant steps on μc (a single pass for
/// self-locking transmissions, where η_o = 0). Rows are weighted by
/// 1/|τ| to match multiplicative measurement noise.
pub fn fit_friction(
    map: &TorqueVelocityMap,
    spec: &TransmissionSpec,
    opts: &FitOptions,
) -> Result<FitReport> {
    let points: Vec<&MapPoint> = map.points().collect();
    let n = points.len();
    if n < 3 {
        return Err(Error::RankDeficient(format!(
            "{n} map points cannot separate three friction terms"
        )));
    }
    if points
        .iter()
        .any(|p| !p.velocity.is_finite() || !p.torque.is_finite())
    {
        return Err(Error::InvalidData("non-finite map point".into()));
    }
    let load = opts.test_load;
    let both = !map.positive.is_empty() && !map.negative.is_empty();
    let one_direction = !both;
    let load_column = load != 0.0 && both;
    if load != 0.0 && !both && opts.mu_c_prior.is_none() {
        return Err(Error::RankDeficient(
            "a test load with one direction cannot separate μc from b_c".into(),
        ));
    }
    let lead = spec.lead_angle;
    let mut warnings = Vec::new();

    let p = if load_column { 3 } else { 2 };
    let mut a = DMatrix::zeros(n, p);
    for (i, pt) in points.iter().enumerate() {
        a[(i, 0)] = sgn(pt.velocity);
        a[(i, 1)] = pt.velocity;
        if load_column && load * pt.velocity > 0.0 {
            a[(i, 2)] = load / spec.ratio;
        }
    }

    let mut mu_c = opts.mu_c_prior.unwrap_or(FALLBACK_MU_C).max(0.0);
    let mut mu_s = mu_c;
    let mut weights: Vec<f64> = points
        .iter()
        .map(|p| 1.0 / p.torque.abs().max(1e-300))
        .collect();
    let mut solve = None;
    let mut mu_s_measured = None;
    let mut last: Option<(f64, f64)> = None;
    for _ in 0..MAX_ITERATIONS {
        let current = FrictionParams {
            mu_s: mu_s.max(mu_c),
            mu_c,
            b_c: 0.0,
            b_v: 0.0,
        };
        let model = TorqueModel::new(*spec, current)?;
        // load contribution not represented by a column
        let known: Vec<f64> = points
            .iter()
            .map(|pt| {
                if load_column && load * pt.velocity > 0.0 {
                    0.0
                } else {
                    model.reflected_load(load, pt.velocity)
                }
            })
            .collect();
        let y = DVector::from_iterator(n, points.iter().zip(&known).map(|(pt, k)| pt.torque - k));
        let s = solve_weighted(&a, &y, &weights)?;

        let (prev_c, prev_s) = (mu_c, mu_s);
        if load_column {
            // Near the locking boundary η_o is steep in μc and plain
            // substitution crawls; take a secant step on μ_fit(μ) − μ.
            let raw = mu_from_kappa(s.x[2], lead).max(0.0);
            let g = raw - mu_c;
            mu_c = match last {
                Some((m0, g0)) if g != g0 => {
                    let step = mu_c - g * (mu_c - m0) / (g - g0);
                    if step.is_finite() && step >= 0.0 {
                        step
                    } else {
                        raw
                    }
                }
                _ => raw,
            };
            last = Some((prev_c, g));
        }
        mu_s_measured = mu_s_from_breakaways(&opts.breakaway, spec, load, s.x[0]);
        mu_s = mu_s_measured.unwrap_or(mu_c).max(mu_c);

        let fitted = &a * &s.x;
        weights = fitted
            .iter()
            .zip(&known)
            .zip(&points)
            .map(|((f, k), pt)| {
                let pred = (f + k).abs();
                1.0 / if pred > 0.0 {
                    pred
                } else {
                    pt.torque.abs().max(1e-300)
                }
            })
            .collect();
        let converged = solve.as_ref().is_some_and(|old: &Solve| {
            (&old.x - &s.x).amax() <= 1e-15 * s.x.amax()
                && (mu_c - prev_c).abs() <= 1e-15
                && (mu_s - prev_s).abs() <= 1e-15
        });
        solve = Some(s);
        if converged {
            break;
        }
    }
    let s = solve.expect("at least one iteration");

    let mut b_c = s.x[0];
    let mut b_v = s.x[1];
    let mut half_widths = HalfWidths {
        b_c: Z95 * s.cov[(0, 0)].max(0.0).sqrt(),
        b_v: Z95 * s.cov[(1, 1)].max(0.0).sqrt(),
        mu_c: None,
    };
    if load_column {
        let kappa = s.x[2];
        let raw = mu_from_kappa(kappa, lead);
        if raw < 0.0 {
            warnings.push(format!(
                "NonPhysical: fitted mu_c = {raw:.3e} < 0, clamped to 0"
            ));
        }
        let t = lead.tan();
        let dmu = (1.0 + raw * raw) * t / (1.0 + (kappa * t).powi(2));
        half_widths.mu_c = Some(Z95 * dmu.abs() * s.cov[(2, 2)].max(0.0).sqrt());
    } else {
        warnings.push(format!(
            "mu_c not identifiable without a test load in both directions; using {}",
            mu_c
        ));
    }
    if b_c < 0.0 {
        warnings.push(format!(
            "NonPhysical: fitted b_c = {b_c:.3e} < 0, clamped to 0"
        ));
        b_c = 0.0;
    }
    if b_v < 0.0 {
        warnings.push(format!(
            "NonPhysical: fitted b_v = {b_v:.3e} < 0, clamped to 0"
        ));
        b_v = 0.0;
    }
    match mu_s_measured {
        Some(m) if m < mu_c => warnings.push(format!(
            "breakaway mu_s = {m:.4} below mu_c, clamped to mu_c"
        )),
        Some(_) => {}
        None => warnings.push("no usable breakaway samples; mu_s defaults to mu_c".into()),
    }
    if one_direction {
        warnings.push("one-direction fit: only one rotation direction in the map".into());
    }

    let params = FrictionParams::new(mu_s, mu_c, b_c, b_v)?;
    let model = TorqueModel::new(*spec, params)?;
    let residual = map_nrmsd(&points, &model, load)?;
    let direction_residual = |pts: &[MapPoint]| {
        let refs: Vec<&MapPoint> = pts.iter().collect();
        (refs.len() >= 2)
            .then(|| map_nrmsd(&refs, &model, load).ok())
            .flatten()
    };
    Ok(FitReport {
        params,
        residual,
        residual_positive: direction_residual(&map.positive),
        residual_negative: direction_residual(&map.negative),
        half_widths,
        mu_c_identified: load_column,
        mu_s_from_breakaway: mu_s_measured.is_some(),
        one_direction,
        warnings,
    })
}

/// NRMSD between `measured` and the inverse dynamics of `traj` under the
/// fitted parameters.
pub fn evaluate_model<F: Fn(f64) -> f64>(
    report: &FitReport,
    spec: &TransmissionSpec,
    load_torque: F,
    traj: &JointTrajectory,
    measured: &TorqueTrace,
) -> Result<f64> {
    let sim = inverse_dynamics(spec, &report.params, load_torque, traj)?;
    nrmsd(&sim, measured)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::TransmissionKind;

    fn worm() -> TransmissionSpec {
        TransmissionSpec::new(TransmissionKind::WormGear, 120.0, 3f64.to_radians(), 2e-6).unwrap()
    }

    fn synthetic_map(
        spec: &TransmissionSpec,
        params: FrictionParams,
        load: f64,
        v: &[f64],
    ) -> TorqueVelocityMap {
        let model = TorqueModel::new(*spec, params).unwrap();
        TorqueVelocityMap::from_points(v.iter().map(|&w| MapPoint {
            velocity: w,
            torque: model.steady_state_torque(load, w),
            torque_std: 0.0,
            count: 100,
        }))
    }

    const VELOCITIES: [f64; 8] = [-200.0, -100.0, -40.0, -15.0, 15.0, 40.0, 100.0, 200.0];

    #[test]
    fn noiseless_recovery() {
        let truth = FrictionParams::new(0.15, 0.13, 3.82e-3, 7.18e-5).unwrap();
        let map = synthetic_map(&worm(), truth, 0.5, &VELOCITIES);
        let opts = FitOptions {
            test_load: 0.5,
            ..Default::default()
        };
        let r = fit_friction(&map, &worm(), &opts).unwrap();
        assert!((r.params.mu_c - 0.13).abs() < 1e-9);
        assert!((r.params.b_c - 3.82e-3).abs() < 1e-12);
        assert!((r.params.b_v - 7.18e-5).abs() < 1e-14);
        assert!(r.residual < 1e-9);
        assert!(r.mu_c_identified);
        assert!(!r.mu_s_from_breakaway);
        assert_eq!(r.params.mu_s, r.params.mu_c);
    }

    #[test]
    fn non_locking_transmission_converges() {
        let spec = TransmissionSpec::new(TransmissionKind::LeadScrew, 3000.0, 0.4, 1e-6).unwrap();
        let truth = FrictionParams::new(0.12, 0.12, 2e-3, 3e-5).unwrap();
        assert!(!spec.is_self_locking(&truth));
        let map = synthetic_map(&spec, truth, 20.0, &VELOCITIES);
        let r = fit_friction(
            &map,
            &spec,
            &FitOptions {
                test_load: 20.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((r.params.mu_c - 0.12).abs() < 1e-9, "{}", r.params.mu_c);
        assert!((r.params.b_c - 2e-3).abs() < 1e-12);
    }

    #[test]
    fn just_past_the_locking_edge_converges() {
        // atan(0.05) is a little under the 3° lead, so the worm back-drives
        let truth = FrictionParams::new(0.05, 0.05, 1e-4, 1e-6).unwrap();
        assert!(!worm().is_self_locking(&truth));
        let map = synthetic_map(&worm(), truth, 0.2, &VELOCITIES);
        let opts = FitOptions {
            test_load: 0.2,
            ..Default::default()
        };
        let r = fit_friction(&map, &worm(), &opts).unwrap();
        assert!((r.params.mu_c - 0.05).abs() < 1e-9, "{}", r.params.mu_c);
        assert!((r.params.b_c - 1e-4).abs() < 1e-12);
    }

    #[test]
    fn breakaway_sets_mu_s() {
        let spec = worm();
        let truth = FrictionParams::new(0.15, 0.13, 3.82e-3, 7.18e-5).unwrap();
        let model = TorqueModel::new(spec, truth).unwrap();
        let map = synthetic_map(&spec, truth, 0.5, &VELOCITIES);
        let opts = FitOptions {
            test_load: 0.5,
            breakaway: vec![
                BreakawaySample {
                    direction: 1.0,
                    torque: model.breakaway_torque(0.5, 1.0),
                },
                BreakawaySample {
                    direction: -1.0,
                    torque: model.breakaway_torque(0.5, -1.0),
                },
            ],
            mu_c_prior: None,
        };
        let r = fit_friction(&map, &spec, &opts).unwrap();
        assert!(r.mu_s_from_breakaway);
        assert!((r.params.mu_s - 0.15).abs() < 1e-9);
    }

    #[test]
    fn two_same_direction_points_are_rank_deficient() {
        let truth = FrictionParams::new(0.15, 0.13, 3.82e-3, 7.18e-5).unwrap();
        let map = synthetic_map(&worm(), truth, 0.0, &[10.0, 20.0]);
        assert!(matches!(
            fit_friction(&map, &worm(), &FitOptions::default()),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn one_direction_without_load_is_flagged() {
        let truth = FrictionParams::new(0.15, 0.13, 3.82e-3, 7.18e-5).unwrap();
        let map = synthetic_map(&worm(), truth, 0.0, &[10.0, 50.0, 150.0]);
        let opts = FitOptions {
            mu_c_prior: Some(0.13),
            ..Default::default()
        };
        let r = fit_friction(&map, &worm(), &opts).unwrap();
        assert!(r.one_direction);
        assert!(!r.mu_c_identified);
        assert!(r.residual_negative.is_none());
        assert!((r.params.b_v - 7.18e-5).abs() < 1e-14);
    }

    #[test]
    fn one_direction_with_load_needs_prior() {
        let truth = FrictionParams::new(0.15, 0.13, 3.82e-3, 7.18e-5).unwrap();
        let map = synthetic_map(&worm(), truth, 0.5, &[10.0, 50.0, 150.0]);
        let opts = FitOptions {
            test_load: 0.5,
            ..Default::default()
        };
        assert!(matches!(
            fit_friction(&map, &worm(), &opts),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn negative_viscous_term_is_clamped() {
        let map = TorqueVelocityMap::from_points(
            [(-100.0, -1e-3), (-50.0, -2e-3), (50.0, 2e-3), (100.0, 1e-3)].map(
                |(velocity, torque)| MapPoint {
                    velocity,
                    torque,
                    torque_std: 0.0,
                    count: 10,
                },
            ),
        );
        let r = fit_friction(&map, &worm(), &FitOptions::default()).unwrap();
        assert_eq!(r.params.b_v, 0.0);
        assert!(r.warnings.iter().any(|w| w.starts_with("NonPhysical")));
    }

    #[test]
    fn evaluate_model_on_own_output_is_zero() {
        let spec = worm();
        let truth = FrictionParams::new(0.15, 0.13, 3.82e-3, 7.18e-5).unwrap();
        let map = synthetic_map(&spec, truth, 0.5, &VELOCITIES);
        let r = fit_friction(
            &map,
            &spec,
            &FitOptions {
                test_load: 0.5,
                ..Default::default()
            },
        )
        .unwrap();
        let traj = JointTrajectory::trapezoidal(100.0, 2000.0, 0.5, 200.0).unwrap();
        let measured = inverse_dynamics(&spec, &r.params, |_| 0.5, &traj).unwrap();
        assert_eq!(
            evaluate_model(&r, &spec, |_| 0.5, &traj, &measured).unwrap(),
            0.0
        );
    }
}
