//! Steady-state torque-velocity maps from telemetry and friction fitting.

mod fit;
mod map;
mod telemetry;

pub use fit::{evaluate_model, fit_friction, FitOptions, FitReport, HalfWidths, FALLBACK_MU_C};
pub use map::{
    detect_breakaways, extract_steady_segments, steady_segments, BreakawaySample, MapPoint,
    SegmentOptions, SteadySegment, TorqueVelocityMap, BREAKAWAY_FRACTION,
};
pub use telemetry::{
    JointSamples, TelemetryLog, TelemetryRecord, NOMINAL_RATE_HZ, TELEMETRY_HEADER,
};
