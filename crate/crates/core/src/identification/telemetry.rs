use std::io::{Read, Write};

use crate::format::format_sig;
use crate::{Error, Result};

pub const TELEMETRY_HEADER: [&str; 4] = ["time_s", "joint_id", "velocity", "torque"];

/// Nominal logging rate of the prototype controller, Hz.
pub const NOMINAL_RATE_HZ: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelemetryRecord {
    pub time: f64,
    pub joint_id: u8,
    /// Motor velocity, rad/s.
    pub velocity: f64,
    /// Motor torque, N·m.
    pub torque: f64,
}

/// Time series of one joint, extracted from a log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JointSamples {
    pub time: Vec<f64>,
    pub velocity: Vec<f64>,
    pub torque: Vec<f64>,
}

impl JointSamples {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryLog {
    records: Vec<TelemetryRecord>,
    sample_rate_hz: f64,
}

impl TelemetryLog {
    /// Validates per-joint monotonic time and a sample rate within 10 % of
    /// `nominal_rate_hz`.
    pub fn new(records: Vec<TelemetryRecord>, nominal_rate_hz: f64) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InsufficientData(
                "telemetry log has no records".into(),
            ));
        }
        let mut intervals = Vec::new();
        for id in 1..=4u8 {
            let times: Vec<f64> = records
                .iter()
                .filter(|r| r.joint_id == id)
                .map(|r| r.time)
                .collect();
            if let Some(bad) = times.windows(2).position(|w| w[1] <= w[0]) {
                return Err(Error::InvalidData(format!(
                    "joint {id}: timestamps not increasing at t = {}",
                    times[bad + 1]
                )));
            }
            intervals.extend(times.windows(2).map(|w| w[1] - w[0]));
        }
        if intervals.is_empty() {
            return Err(Error::InsufficientData(
                "need at least two samples of one joint".into(),
            ));
        }
        intervals.sort_by(f64::total_cmp);
        let rate = 1.0 / intervals[intervals.len() / 2];
        if (rate - nominal_rate_hz).abs() > 0.1 * nominal_rate_hz {
            return Err(Error::InvalidData(format!(
                "sample rate {rate:.3} Hz deviates from nominal {nominal_rate_hz} Hz by more than 10 %"
            )));
        }
        Ok(Self {
            records,
            sample_rate_hz: rate,
        })
    }

    /// Parses `time_s,joint_id,velocity,torque` CSV.
    pub fn from_csv<R: Read>(reader: R, nominal_rate_hz: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().ne(TELEMETRY_HEADER) {
            return Err(Error::InvalidData(format!(
                "expected header `{}`, got `{}`",
                TELEMETRY_HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut records = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let line = i + 2;
            let num = |k: usize| -> Result<f64> {
                let v: f64 = row[k]
                    .parse()
                    .map_err(|e| Error::InvalidData(format!("line {line}: `{}`: {e}", &row[k])))?;
                if !v.is_finite() {
                    return Err(Error::InvalidData(format!("line {line}: non-finite value")));
                }
                Ok(v)
            };
            let joint_id: u8 = row[1]
                .parse()
                .ok()
                .filter(|id| (1..=4).contains(id))
                .ok_or_else(|| {
                    Error::InvalidData(format!("line {line}: joint_id `{}` not in 1..=4", &row[1]))
                })?;
            records.push(TelemetryRecord {
                time: num(0)?,
                joint_id,
                velocity: num(2)?,
                torque: num(3)?,
            });
        }
        Self::new(records, nominal_rate_hz)
    }

    pub fn write_csv<W: Write>(&self, mut out: W, digits: usize) -> std::io::Result<()> {
        writeln!(out, "{}", TELEMETRY_HEADER.join(","))?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{}",
                format_sig(r.time, digits),
                r.joint_id,
                format_sig(r.velocity, digits),
                format_sig(r.torque, digits)
            )?;
        }
        Ok(())
    }

    pub fn records(&self) -> &[TelemetryRecord] {
        &self.records
    }

    /// Estimated from the median sample interval.
    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn joint_ids(&self) -> Vec<u8> {
        let mut ids: Vec<u8> = self.records.iter().map(|r| r.joint_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn joint(&self, id: u8) -> JointSamples {
        let mut s = JointSamples::default();
        for r in self.records.iter().filter(|r| r.joint_id == id) {
            s.time.push(r.time);
            s.velocity.push(r.velocity);
            s.torque.push(r.torque);
        }
        s
    }

    /// Merges logs of different joints.
    pub fn merge(mut self, other: TelemetryLog) -> Result<Self> {
        let nominal = self.sample_rate_hz;
        self.records.extend(other.records);
        self.records
            .sort_by(|a, b| a.time.total_cmp(&b.time).then(a.joint_id.cmp(&b.joint_id)));
        Self::new(self.records, nominal)
    }
}
