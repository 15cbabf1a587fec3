use super::telemetry::JointSamples;
use crate::{Error, Result};

/// Fraction of the commanded level that marks the end of a rest period.
pub const BREAKAWAY_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentOptions {
    /// Absolute velocity band around the running segment mean, rad/s.
    pub velocity_tolerance: f64,
    /// Minimum plateau duration, s.
    pub min_duration_s: f64,
    /// Leading window dropped from each plateau before averaging, s.
    pub discard_s: f64,
    /// Minimum number of samples left after the discard window.
    pub min_samples: usize,
    /// Minimum rest duration preceding a breakaway, s.
    pub rest_min_s: f64,
}

impl Default for SegmentOptions {
    fn default() -> Self {
        Self {
            velocity_tolerance: 1.0,
            min_duration_s: 0.5,
            discard_s: 0.25,
            min_samples: 10,
            rest_min_s: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapPoint {
    pub velocity: f64,
    pub torque: f64,
    pub torque_std: f64,
    pub count: usize,
}

/// Steady-state torque-velocity samples, split by direction and sorted by
/// velocity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TorqueVelocityMap {
    pub positive: Vec<MapPoint>,
    pub negative: Vec<MapPoint>,
}

impl TorqueVelocityMap {
    pub fn from_points(points: impl IntoIterator<Item = MapPoint>) -> Self {
        let mut map = Self::default();
        for p in points {
            if p.velocity > 0.0 {
                map.positive.push(p);
            } else if p.velocity < 0.0 {
                map.negative.push(p);
            }
        }
        map.positive
            .sort_by(|a, b| a.velocity.total_cmp(&b.velocity));
        map.negative
            .sort_by(|a, b| a.velocity.total_cmp(&b.velocity));
        map
    }

    pub fn points(&self) -> impl Iterator<Item = &MapPoint> {
        self.negative.iter().chain(&self.positive)
    }

    pub fn len(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A steady plateau with its sample range (after the discard window).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadySegment {
    /// Index of the first sample of the raw (untrimmed) plateau.
    pub first: usize,
    pub start_time: f64,
    pub end_time: f64,
    pub point: MapPoint,
}

/// Finds plateaus where each sample stays within the tolerance of the
/// running mean, trims the leading transient and averages the rest. Rest
/// plateaus (|mean| ≤ tolerance) are skipped.
pub fn steady_segments(samples: &JointSamples, opts: &SegmentOptions) -> Vec<SteadySegment> {
    let n = samples.len();
    let (t, w, tau) = (&samples.time, &samples.velocity, &samples.torque);
    let mut runs = Vec::new();
    let mut start = 0;
    let mut sum = 0.0;
    for (i, &wi) in w.iter().enumerate() {
        if i > start && (wi - sum / (i - start) as f64).abs() > opts.velocity_tolerance {
            runs.push(start..i);
            start = i;
            sum = 0.0;
        }
        sum += wi;
    }
    if n > 0 {
        runs.push(start..n);
    }

    let mut out = Vec::new();
    for run in runs {
        let duration = t[run.end - 1] - t[run.start];
        if duration < opts.min_duration_s {
            continue;
        }
        let cut = t[run.start] + opts.discard_s;
        let kept: Vec<usize> = run.clone().filter(|&i| t[i] >= cut - 1e-9).collect();
        if kept.len() < opts.min_samples.max(1) {
            continue;
        }
        let k = kept.len() as f64;
        let velocity = kept.iter().map(|&i| w[i]).sum::<f64>() / k;
        if velocity.abs() <= opts.velocity_tolerance {
            continue;
        }
        let torque = kept.iter().map(|&i| tau[i]).sum::<f64>() / k;
        let torque_std = if kept.len() > 1 {
            (kept.iter().map(|&i| (tau[i] - torque).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        out.push(SteadySegment {
            first: run.start,
            start_time: t[kept[0]],
            end_time: t[run.end - 1],
            point: MapPoint {
                velocity,
                torque,
                torque_std,
                count: kept.len(),
            },
        });
    }
    out
}

/// Builds the torque-velocity map of one joint. Plateaus revisiting the
/// same velocity (within tolerance) are pooled.
pub fn extract_steady_segments(
    samples: &JointSamples,
    opts: &SegmentOptions,
) -> Result<TorqueVelocityMap> {
    let segments = steady_segments(samples, opts);
    if segments.is_empty() {
        return Err(Error::InsufficientData(
            "no steady-velocity segment qualifies".into(),
        ));
    }
    let mut pooled: Vec<(MapPoint, f64)> = Vec::new(); // (point, sum of squares)
    for seg in segments {
        let p = seg.point;
        let ss = (p.count as f64 - 1.0) * p.torque_std.powi(2) + p.count as f64 * p.torque.powi(2);
        match pooled
            .iter_mut()
            .find(|(q, _)| (q.velocity - p.velocity).abs() <= opts.velocity_tolerance)
        {
            Some((q, q_ss)) => {
                let n = (q.count + p.count) as f64;
                q.velocity = (q.velocity * q.count as f64 + p.velocity * p.count as f64) / n;
                q.torque = (q.torque * q.count as f64 + p.torque * p.count as f64) / n;
                q.count += p.count;
                *q_ss += ss;
                q.torque_std = ((*q_ss - n * q.torque.powi(2)) / (n - 1.0)).max(0.0).sqrt();
            }
            None => pooled.push((p, ss)),
        }
    }
    Ok(TorqueVelocityMap::from_points(
        pooled.into_iter().map(|(p, _)| p),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakawaySample {
    /// Direction of the motion being started, ±1.
    pub direction: f64,
    pub torque: f64,
}

/// Torque at the first sample whose |w| exceeds 1e-3 of the commanded
/// plateau level after a rest period of at least `rest_min_s`.
pub fn detect_breakaways(samples: &JointSamples, opts: &SegmentOptions) -> Vec<BreakawaySample> {
    let (t, w, tau) = (&samples.time, &samples.velocity, &samples.torque);
    let mut out = Vec::new();
    for seg in steady_segments(samples, opts) {
        let threshold = BREAKAWAY_FRACTION * seg.point.velocity.abs();
        // walk back from the plateau to the last sample still at rest
        let Some(rest_end) = (0..seg.first).rev().find(|&i| w[i].abs() <= threshold) else {
            continue;
        };
        let rest_start = (0..=rest_end)
            .rev()
            .take_while(|&i| w[i].abs() <= threshold)
            .last()
            .unwrap_or(rest_end);
        if t[rest_end] - t[rest_start] < opts.rest_min_s - 1e-9 || rest_end + 1 >= w.len() {
            continue;
        }
        let b = rest_end + 1;
        if w[b].signum() != seg.point.velocity.signum() {
            continue;
        }
        out.push(BreakawaySample {
            direction: seg.point.velocity.signum(),
            torque: tau[b],
        });
    }
    out
}
