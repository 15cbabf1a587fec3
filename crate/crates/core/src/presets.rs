//! Reference parameters for the prototype.
//!
//! Friction coefficients are the identified values for joints 1, 2 and 4.
//! The transmission geometry (lead angles, inertias, screw lead) is a
//! plausible stand-in for the catalog parts, not a measured value.

use std::f64::consts::PI;

use crate::dynamics::{FrictionParams, TransmissionKind, TransmissionSpec};

pub const WORM_RATIO: f64 = 120.0;
pub const WORM_LEAD_ANGLE_DEG: f64 = 3.0;
pub const WORM_INERTIA: f64 = 2.0e-6;

/// Lead screw travel per motor revolution, m.
pub const SCREW_LEAD_M: f64 = 0.002;
pub const SCREW_LEAD_ANGLE_DEG: f64 = 7.0;
pub const SCREW_INERTIA: f64 = 1.0e-6;

/// Identified friction for joints 1, 2 and 4 (joint 3 has none).
pub fn friction(joint: u8) -> Option<FrictionParams> {
    let (mu_c, mu_s, b_c, b_v) = match joint {
        1 => (0.13, 0.15, 3.82e-3, 7.18e-5),
        2 => (0.12, 0.13, 3.54e-3, 3.69e-5),
        4 => (0.17, 0.17, 0.11e-3, 0.62e-5),
        _ => return None,
    };
    Some(FrictionParams {
        mu_s,
        mu_c,
        b_c,
        b_v,
    })
}

pub fn worm_gear() -> TransmissionSpec {
    TransmissionSpec {
        kind: TransmissionKind::WormGear,
        ratio: WORM_RATIO,
        lead_angle: WORM_LEAD_ANGLE_DEG.to_radians(),
        reflected_inertia: WORM_INERTIA,
    }
}

/// Motor radians per meter of travel.
pub fn lead_screw() -> TransmissionSpec {
    TransmissionSpec {
        kind: TransmissionKind::LeadScrew,
        ratio: 2.0 * PI / SCREW_LEAD_M,
        lead_angle: SCREW_LEAD_ANGLE_DEG.to_radians(),
        reflected_inertia: SCREW_INERTIA,
    }
}

/// Transmission of a joint with identified friction.
pub fn transmission(joint: u8) -> Option<TransmissionSpec> {
    match joint {
        1 | 2 => Some(worm_gear()),
        4 => Some(lead_screw()),
        _ => None,
    }
}
