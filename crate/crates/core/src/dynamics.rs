//! Actuator-reflected inverse dynamics for self-locking transmissions.
//!
//! Every joint is modelled on its own, at the motor shaft:
//!
//! ```text
//! τ = 𝒥·ẇ + b_c·sgn(w) + b_v·w + τ_load
//! ```
//!
//! where `w` is the motor velocity and `τ_load` is the joint-side load
//! reflected through the reduction and the transmission efficiency. The
//! efficiency comes from the inclined-plane model of a worm or lead screw
//! with lead angle λ and friction angle ρ = atan(μ). Motor-side velocities
//! and torques are used throughout, including for `b_c` and `b_v`.

use std::f64::consts::FRAC_PI_2;

use crate::{Error, Result};

/// Motor velocities below this magnitude (rad/s) are treated as rest.
pub const REST_VELOCITY: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionParams {
    /// Static transmission friction coefficient.
    pub mu_s: f64,
    /// Coulomb transmission friction coefficient.
    pub mu_c: f64,
    /// Bearing Coulomb torque, N·m.
    pub b_c: f64,
    /// Bearing viscous coefficient, N·m·s/rad.
    pub b_v: f64,
}

impl FrictionParams {
    pub fn new(mu_s: f64, mu_c: f64, b_c: f64, b_v: f64) -> Result<Self> {
        let p = Self {
            mu_s,
            mu_c,
            b_c,
            b_v,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.mu_s, self.mu_c, self.b_c, self.b_v];
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Domain(format!(
                "friction parameters must be ≥ 0: {self:?}"
            )));
        }
        if self.mu_s < self.mu_c {
            return Err(Error::Domain(format!(
                "static friction {} below Coulomb friction {}",
                self.mu_s, self.mu_c
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransmissionKind {
    WormGear,
    LeadScrew,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionSpec {
    pub kind: TransmissionKind,
    /// Motor radians per joint radian (or per joint meter).
    pub ratio: f64,
    /// Lead angle λ, rad.
    pub lead_angle: f64,
    /// Reflected inertia at the motor shaft, kg·m².
    pub reflected_inertia: f64,
}

impl TransmissionSpec {
    pub fn new(
        kind: TransmissionKind,
        ratio: f64,
        lead_angle: f64,
        reflected_inertia: f64,
    ) -> Result<Self> {
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::Domain(format!(
                "ratio must be positive, got {ratio}"
            )));
        }
        if !(lead_angle > 0.0 && lead_angle < FRAC_PI_2) {
            return Err(Error::Domain(format!(
                "lead angle must lie in (0, π/2), got {lead_angle}"
            )));
        }
        if !(reflected_inertia >= 0.0 && reflected_inertia.is_finite()) {
            return Err(Error::Domain("reflected inertia must be ≥ 0".into()));
        }
        Ok(Self {
            kind,
            ratio,
            lead_angle,
            reflected_inertia,
        })
    }

    /// λ ≤ atan(μs): the load cannot start driving the motor.
    pub fn is_self_locking(&self, params: &FrictionParams) -> bool {
        self.lead_angle <= params.mu_s.atan()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerFlow {
    /// Motor drives the load.
    Driving,
    /// Load drives the motor.
    Overhauling,
}

fn driving_efficiency(lead: f64, mu: f64) -> Result<f64> {
    let rho = mu.atan();
    if lead + rho >= FRAC_PI_2 {
        return Err(Error::Domain(format!(
            "lead angle {lead} plus friction angle {rho} reaches π/2"
        )));
    }
    Ok(lead.tan() / (lead + rho).tan())
}

fn overhauling_efficiency(lead: f64, mu: f64, lock_mu: f64) -> f64 {
    if lead <= lock_mu.atan() || lead <= mu.atan() {
        0.0
    } else {
        (lead - mu.atan()).tan() / lead.tan()
    }
}

/// Sliding-contact efficiency. Driving: tan λ / tan(λ + ρ). Overhauling:
/// tan(λ − ρ) / tan λ, and 0 for a self-locking transmission.
pub fn transmission_efficiency(
    spec: &TransmissionSpec,
    params: &FrictionParams,
    flow: PowerFlow,
) -> Result<f64> {
    let driving = driving_efficiency(spec.lead_angle, params.mu_c)?;
    Ok(match flow {
        PowerFlow::Driving => driving,
        PowerFlow::Overhauling => overhauling_efficiency(spec.lead_angle, params.mu_c, params.mu_s),
    })
}

/// Efficiencies needed by the torque model, computed once per transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorqueModel {
    pub spec: TransmissionSpec,
    pub params: FrictionParams,
    driving: f64,
    overhauling: f64,
    static_driving: f64,
    static_overhauling: f64,
}

impl TorqueModel {
    pub fn new(spec: TransmissionSpec, params: FrictionParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            spec,
            params,
            driving: driving_efficiency(spec.lead_angle, params.mu_c)?,
            overhauling: overhauling_efficiency(spec.lead_angle, params.mu_c, params.mu_s),
            static_driving: driving_efficiency(spec.lead_angle, params.mu_s)?,
            static_overhauling: overhauling_efficiency(spec.lead_angle, params.mu_s, params.mu_s),
        })
    }

    pub fn driving_efficiency(&self) -> f64 {
        self.driving
    }

    pub fn overhauling_efficiency(&self) -> f64 {
        self.overhauling
    }

    /// Bearing friction b_c·sgn(w) + b_v·w, with sgn(w) = 0 at rest.
    pub fn bearing_friction(&self, w: f64) -> f64 {
        let coulomb = if w.abs() < REST_VELOCITY {
            0.0
        } else {
            self.params.b_c * w.signum()
        };
        coulomb + self.params.b_v * w
    }

    /// Joint-side load torque `load` seen at the motor while moving at `w`.
    /// At rest this is the torque needed to hold position.
    pub fn reflected_load(&self, load: f64, w: f64) -> f64 {
        if load == 0.0 {
            return 0.0;
        }
        let base = load / self.spec.ratio;
        if w.abs() < REST_VELOCITY {
            base * self.static_overhauling
        } else if load * w > 0.0 {
            base / self.driving
        } else {
            base * self.overhauling
        }
    }

    /// Steady-state motor torque (ẇ = 0).
    pub fn steady_state_torque(&self, load: f64, w: f64) -> f64 {
        self.bearing_friction(w) + self.reflected_load(load, w)
    }

    /// Torque at the first sample of motion from rest in direction
    /// `sgn(direction)`, governed by static transmission friction.
    pub fn breakaway_torque(&self, load: f64, direction: f64) -> f64 {
        let bearing = self.params.b_c * direction.signum();
        let base = load / self.spec.ratio;
        let transmission = if load == 0.0 {
            0.0
        } else if load * direction > 0.0 {
            base / self.static_driving
        } else {
            base * self.static_overhauling
        };
        bearing + transmission
    }

    pub fn torque(&self, load: f64, w: f64, w_dot: f64) -> f64 {
        self.spec.reflected_inertia * w_dot + self.steady_state_torque(load, w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointTrajectory {
    time: Vec<f64>,
    velocity: Vec<f64>,
    acceleration: Option<Vec<f64>>,
}

impl JointTrajectory {
    /// Motor velocity samples at strictly increasing times.
    pub fn new(time: Vec<f64>, velocity: Vec<f64>) -> Result<Self> {
        if time.len() != velocity.len() {
            return Err(Error::InvalidData(
                "time and velocity lengths differ".into(),
            ));
        }
        if time.is_empty() {
            return Err(Error::InsufficientData("empty trajectory".into()));
        }
        if time.iter().chain(&velocity).any(|x| !x.is_finite()) {
            return Err(Error::InvalidData("non-finite trajectory sample".into()));
        }
        if time.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidData("time must increase strictly".into()));
        }
        Ok(Self {
            time,
            velocity,
            acceleration: None,
        })
    }

    pub fn with_acceleration(mut self, acceleration: Vec<f64>) -> Result<Self> {
        if acceleration.len() != self.time.len() || acceleration.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidData(
                "acceleration does not match trajectory".into(),
            ));
        }
        self.acceleration = Some(acceleration);
        Ok(self)
    }

    /// Rest → cruise at `peak` → rest, with constant `accel` ramps, sampled
    /// at `rate_hz`. The analytic acceleration is attached.
    pub fn trapezoidal(peak: f64, accel: f64, cruise_s: f64, rate_hz: f64) -> Result<Self> {
        if !(accel > 0.0 && rate_hz > 0.0 && cruise_s >= 0.0) {
            return Err(Error::Domain(
                "trapezoid needs positive accel and rate".into(),
            ));
        }
        let ramp = peak.abs() / accel;
        let total = 2.0 * ramp + cruise_s;
        let n = (total * rate_hz).round() as usize + 1;
        let dir = peak.signum();
        let mut time = Vec::with_capacity(n);
        let mut velocity = Vec::with_capacity(n);
        let mut acceleration = Vec::with_capacity(n);
        for i in 0..n {
            let t = i as f64 / rate_hz;
            let (v, a) = if t < ramp {
                (accel * t, accel)
            } else if t <= ramp + cruise_s {
                (peak.abs(), 0.0)
            } else if t < total {
                (accel * (total - t), -accel)
            } else {
                (0.0, 0.0)
            };
            time.push(t);
            velocity.push(dir * v);
            acceleration.push(dir * a);
        }
        Self::new(time, velocity)?.with_acceleration(acceleration)
    }

    pub fn time(&self) -> &[f64] {
        &self.time
    }

    pub fn velocity(&self) -> &[f64] {
        &self.velocity
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Provided acceleration, else central differences with one-sided
    /// endpoints.
    pub fn acceleration(&self) -> Vec<f64> {
        if let Some(a) = &self.acceleration {
            return a.clone();
        }
        let (t, v) = (&self.time, &self.velocity);
        let n = t.len();
        if n < 2 {
            return vec![0.0; n];
        }
        (0..n)
            .map(|i| {
                let (lo, hi) = match i {
                    0 => (0, 1),
                    i if i == n - 1 => (n - 2, n - 1),
                    i => (i - 1, i + 1),
                };
                (v[hi] - v[lo]) / (t[hi] - t[lo])
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorqueTrace {
    pub time: Vec<f64>,
    pub torque: Vec<f64>,
}

impl TorqueTrace {
    pub fn new(time: Vec<f64>, torque: Vec<f64>) -> Result<Self> {
        if time.len() != torque.len() {
            return Err(Error::InvalidData("time and torque lengths differ".into()));
        }
        Ok(Self { time, torque })
    }
}

/// Motor torque for every trajectory sample. `load_torque` maps time to the
/// joint-side load.
pub fn inverse_dynamics<F: Fn(f64) -> f64>(
    spec: &TransmissionSpec,
    params: &FrictionParams,
    load_torque: F,
    traj: &JointTrajectory,
) -> Result<TorqueTrace> {
    let model = TorqueModel::new(*spec, *params)?;
    let accel = traj.acceleration();
    let torque = traj
        .time
        .iter()
        .zip(&traj.velocity)
        .zip(&accel)
        .map(|((&t, &w), &a)| model.torque(load_torque(t), w, a))
        .collect();
    Ok(TorqueTrace {
        time: traj.time.clone(),
        torque,
    })
}

/// Steady-state torque demand over a positive ascending velocity grid.
pub fn payload_curve(
    spec: &TransmissionSpec,
    params: &FrictionParams,
    load_torque: f64,
    velocity_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if velocity_grid.is_empty() || velocity_grid[0] <= 0.0 {
        return Err(Error::Domain("velocity grid must be positive".into()));
    }
    if velocity_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("velocity grid must be ascending".into()));
    }
    let model = TorqueModel::new(*spec, *params)?;
    Ok(velocity_grid
        .iter()
        .map(|&w| (w, model.steady_state_torque(load_torque, w)))
        .collect())
}

/// RMS deviation divided by the range (max − min) of the measured trace.
pub fn nrmsd(simulated: &TorqueTrace, measured: &TorqueTrace) -> Result<f64> {
    if simulated.torque.len() != measured.torque.len() {
        return Err(Error::Misaligned(format!(
            "{} simulated vs {} measured samples",
            simulated.torque.len(),
            measured.torque.len()
        )));
    }
    if measured.torque.is_empty() {
        return Err(Error::InsufficientData("empty traces".into()));
    }
    if simulated
        .time
        .iter()
        .zip(&measured.time)
        .any(|(a, b)| (a - b).abs() > 1e-9 * a.abs().max(1.0))
    {
        return Err(Error::Misaligned("timestamps differ".into()));
    }
    let (lo, hi) = measured
        .torque
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| {
            (l.min(x), h.max(x))
        });
    let range = hi - lo;
    if range < 1e-12 {
        return Err(Error::DegenerateRange { range });
    }
    let n = measured.torque.len() as f64;
    let mse = simulated
        .torque
        .iter()
        .zip(&measured.torque)
        .map(|(s, m)| (s - m).powi(2))
        .sum::<f64>()
        / n;
    Ok(mse.sqrt() / range)
}
