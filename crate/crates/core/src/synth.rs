//! Synthetic telemetry with known ground truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dynamics::{FrictionParams, TorqueModel, TransmissionSpec};
use crate::identification::{MapPoint, TelemetryLog, TelemetryRecord, TorqueVelocityMap};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub joint_id: u8,
    /// Plateau velocities, motor rad/s. Each is preceded by a rest period.
    pub levels: Vec<f64>,
    /// Constant joint-side load.
    pub load: f64,
    /// Motor acceleration of the ramps, rad/s².
    pub accel: f64,
    pub hold_s: f64,
    pub rest_s: f64,
    pub rate_hz: f64,
    /// Relative standard deviation of the torque noise.
    pub torque_noise: f64,
    /// Relative standard deviation of the velocity noise.
    pub velocity_noise: f64,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            joint_id: 1,
            levels: vec![-200.0, -100.0, -40.0, 40.0, 100.0, 200.0],
            load: 0.0,
            accel: 2000.0,
            hold_s: 1.5,
            rest_s: 0.3,
            rate_hz: 200.0,
            torque_noise: 0.0,
            velocity_noise: 0.0,
            seed: 0,
        }
    }
}

/// Rest → ramp → plateau → ramp down, for every level. The first moving
/// sample after each rest carries the breakaway torque; all others follow
/// the inverse-dynamics model.
pub fn sweep_log(
    spec: &TransmissionSpec,
    params: &FrictionParams,
    cfg: &SweepConfig,
) -> Result<TelemetryLog> {
    if !(cfg.accel > 0.0 && cfg.rate_hz > 0.0 && cfg.hold_s >= 0.0 && cfg.rest_s >= 0.0) {
        return Err(Error::Domain("sweep needs positive accel and rate".into()));
    }
    if cfg.levels.is_empty() {
        return Err(Error::InsufficientData("sweep has no levels".into()));
    }
    let model = TorqueModel::new(*spec, *params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n01 = Normal::new(0.0, 1.0).expect("unit normal");
    let dt = 1.0 / cfg.rate_hz;

    // (velocity, acceleration, first moving sample)
    let mut profile: Vec<(f64, f64, bool)> = Vec::new();
    for &level in &cfg.levels {
        let rest = (cfg.rest_s * cfg.rate_hz).round() as usize;
        profile.extend(std::iter::repeat_n((0.0, 0.0, false), rest));
        let a = cfg.accel * level.signum();
        let ramp = (level.abs() / cfg.accel * cfg.rate_hz).ceil() as usize;
        for k in 1..ramp {
            profile.push((a * k as f64 * dt, a, k == 1));
        }
        let hold = (cfg.hold_s * cfg.rate_hz).round() as usize;
        profile.extend(std::iter::repeat_n((level, 0.0, ramp <= 1), 1));
        profile.extend(std::iter::repeat_n(
            (level, 0.0, false),
            hold.saturating_sub(1),
        ));
        for k in (1..ramp).rev() {
            profile.push((a * k as f64 * dt, -a, false));
        }
    }
    let rest = (cfg.rest_s * cfg.rate_hz).round() as usize;
    profile.extend(std::iter::repeat_n((0.0, 0.0, false), rest.max(1)));

    let records = profile
        .into_iter()
        .enumerate()
        .map(|(i, (w, a, first))| {
            let torque = if first {
                model.breakaway_torque(cfg.load, w)
            } else {
                model.torque(cfg.load, w, a)
            };
            TelemetryRecord {
                time: i as f64 * dt,
                joint_id: cfg.joint_id,
                velocity: w * (1.0 + cfg.velocity_noise * n01.sample(&mut rng)),
                torque: torque * (1.0 + cfg.torque_noise * n01.sample(&mut rng)),
            }
        })
        .collect();
    TelemetryLog::new(records, cfg.rate_hz)
}

/// Steady-state map at the given motor velocities, each torque scaled by
/// (1 + noise·N(0, 1)).
pub fn noisy_map<R: Rng>(
    spec: &TransmissionSpec,
    params: &FrictionParams,
    load: f64,
    velocities: &[f64],
    noise: f64,
    rng: &mut R,
) -> Result<TorqueVelocityMap> {
    let model = TorqueModel::new(*spec, *params)?;
    let n01 = Normal::new(0.0, 1.0).expect("unit normal");
    Ok(TorqueVelocityMap::from_points(velocities.iter().map(
        |&w| {
            let scale = if noise > 0.0 {
                1.0 + noise * n01.sample(rng)
            } else {
                1.0
            };
            MapPoint {
                velocity: w,
                torque: model.steady_state_torque(load, w) * scale,
                torque_std: 0.0,
                count: 1,
            }
        },
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identification::{
        detect_breakaways, extract_steady_segments, fit_friction, FitOptions, SegmentOptions,
    };
    use crate::presets;

    #[test]
    fn noiseless_sweep_round_trips_through_fit() {
        let spec = presets::worm_gear();
        let params = presets::friction(1).unwrap();
        let cfg = SweepConfig {
            load: 0.5,
            ..Default::default()
        };
        let log = sweep_log(&spec, &params, &cfg).unwrap();
        let samples = log.joint(1);
        let opts = SegmentOptions::default();
        let map = extract_steady_segments(&samples, &opts).unwrap();
        assert_eq!(map.len(), 6);
        let breakaway = detect_breakaways(&samples, &opts);
        assert_eq!(breakaway.len(), 6);
        let fit = fit_friction(
            &map,
            &spec,
            &FitOptions {
                test_load: 0.5,
                breakaway,
                mu_c_prior: None,
            },
        )
        .unwrap();
        assert!((fit.params.mu_c - params.mu_c).abs() < 1e-9);
        assert!((fit.params.mu_s - params.mu_s).abs() < 1e-9);
        assert!((fit.params.b_c - params.b_c).abs() < 1e-12);
        assert!((fit.params.b_v - params.b_v).abs() < 1e-14);
    }

    #[test]
    fn seeded_output_is_deterministic() {
        let spec = presets::worm_gear();
        let params = presets::friction(2).unwrap();
        let cfg = SweepConfig {
            torque_noise: 0.05,
            seed: 7,
            ..Default::default()
        };
        let a = sweep_log(&spec, &params, &cfg).unwrap();
        let b = sweep_log(&spec, &params, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
