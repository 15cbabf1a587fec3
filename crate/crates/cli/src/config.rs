use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use ssmkit_core::kinematics::build_geometry;
use ssmkit_core::{FrictionParams, MechanismGeometry, Rot3, TransmissionKind, TransmissionSpec};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismConfig {
    pub alpha_deg: f64,
    pub beta_deg: f64,
    /// Row-major home orientation.
    pub r0: Option<Vec<f64>>,
}

impl MechanismConfig {
    pub fn prototype() -> Self {
        Self {
            alpha_deg: 30.0,
            beta_deg: 110.0,
            r0: None,
        }
    }

    pub fn geometry(&self) -> Result<MechanismGeometry> {
        let r0 = match &self.r0 {
            None => Rot3::identity(),
            Some(v) if v.len() == 9 => Rot3::from_row_slice(v),
            Some(v) => bail!("r0 needs 9 numbers, got {}", v.len()),
        };
        Ok(build_geometry(
            self.alpha_deg.to_radians(),
            self.beta_deg.to_radians(),
            r0,
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindKey {
    WormGear,
    LeadScrew,
}

impl From<KindKey> for TransmissionKind {
    fn from(k: KindKey) -> Self {
        match k {
            KindKey::WormGear => TransmissionKind::WormGear,
            KindKey::LeadScrew => TransmissionKind::LeadScrew,
        }
    }
}

pub fn kind_key(kind: TransmissionKind) -> &'static str {
    match kind {
        TransmissionKind::WormGear => "worm_gear",
        TransmissionKind::LeadScrew => "lead_screw",
    }
}

/// Transmission and friction keys. Other keys (such as the `[fit]` table
/// of an identification report) are ignored, so reports load unchanged.
#[derive(Debug, Clone, Deserialize)]
pub struct TransmissionConfig {
    pub kind: KindKey,
    pub ratio: f64,
    pub lead_angle_deg: f64,
    #[serde(default)]
    pub reflected_inertia: f64,
    pub mu_s: f64,
    pub mu_c: f64,
    pub b_c: f64,
    pub b_v: f64,
}

impl TransmissionConfig {
    pub fn spec(&self) -> Result<TransmissionSpec> {
        Ok(TransmissionSpec::new(
            self.kind.into(),
            self.ratio,
            self.lead_angle_deg.to_radians(),
            self.reflected_inertia,
        )?)
    }

    pub fn params(&self) -> Result<FrictionParams> {
        Ok(FrictionParams::new(
            self.mu_s, self.mu_c, self.b_c, self.b_v,
        )?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectFile {
    pub mechanism: Option<PathBuf>,
    #[serde(default)]
    pub joints: BTreeMap<String, PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub precision: Option<usize>,
}

/// A project with every referenced file loaded.
#[derive(Debug, Clone)]
pub struct Project {
    pub mechanism: Option<MechanismConfig>,
    pub joints: BTreeMap<u8, TransmissionConfig>,
    pub output_dir: Option<PathBuf>,
    pub precision: Option<usize>,
}

impl Project {
    pub fn joint(&self, id: u8) -> Result<&TransmissionConfig> {
        self.joints
            .get(&id)
            .with_context(|| format!("project has no transmission for joint {id}"))
    }
}

fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn load_mechanism(path: &Path) -> Result<MechanismConfig> {
    read_toml(path)
}

pub fn load_transmission(path: &Path) -> Result<TransmissionConfig> {
    let cfg: TransmissionConfig = read_toml(path)?;
    cfg.spec()
        .and_then(|_| cfg.params())
        .with_context(|| format!("validating {}", path.display()))?;
    Ok(cfg)
}

/// Paths inside a project file are relative to the file's directory.
pub fn load_project(path: &Path) -> Result<Project> {
    let file: ProjectFile = read_toml(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mechanism = file
        .mechanism
        .map(|p| load_mechanism(&base.join(p)))
        .transpose()?;
    let mut joints = BTreeMap::new();
    for (key, p) in file.joints {
        let id: u8 = key
            .parse()
            .ok()
            .filter(|id| (1..=4).contains(id))
            .with_context(|| format!("joint key `{key}` is not in 1..=4"))?;
        joints.insert(id, load_transmission(&base.join(p))?);
    }
    Ok(Project {
        mechanism,
        joints,
        output_dir: file.output_dir.map(|d| base.join(d)),
        precision: file.precision,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transmission_ignores_extra_tables() {
        let cfg: TransmissionConfig = toml::from_str(
            "kind = \"worm_gear\"\nratio = 120\nlead_angle_deg = 3\nmu_s = 0.15\nmu_c = 0.13\n\
             b_c = 3.82e-3\nb_v = 7.18e-5\n[fit]\nresidual = 0.01\n",
        )
        .unwrap();
        assert_eq!(cfg.kind, KindKey::WormGear);
        assert_eq!(cfg.ratio, 120.0);
        assert_eq!(cfg.reflected_inertia, 0.0);
        cfg.spec().unwrap();
    }

    #[test]
    fn mechanism_rejects_bad_r0() {
        let cfg: MechanismConfig =
            toml::from_str("alpha_deg = 30\nbeta_deg = 110\nr0 = [1, 0, 0]\n").unwrap();
        assert!(cfg.geometry().is_err());
        assert!(toml::from_str::<MechanismConfig>("alpha_deg = 30\nbeta = 1\n").is_err());
    }
}
