//! Run configuration: a TOML file plus `section.key=value` overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assembly::Operator;
use crate::classical::{IntegratorSettings, L2Settings, SaliSettings};
use crate::model::ModelParams;
use crate::spectra::Quantization;

/// Environment variable that replaces `output.directory`.
pub const OUTPUT_ENV: &str = "GCM_PERES_OUT";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config file {path} is not valid TOML: {message}")]
    Syntax { path: PathBuf, message: String },
    #[error("bad override '{0}': expected section.key=value")]
    Override(String),
    #[error("invalid config at '{path}': {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { path: path.into(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    #[serde(default = "default_quantization")]
    pub quantization: Quantization,
    #[serde(default)]
    pub basis: BasisConfig,
    #[serde(default)]
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub wavefunction: WavefunctionConfig,
    #[serde(default)]
    pub classical: ClassicalConfig,
    #[serde(default)]
    pub brody: BrodyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_quantization() -> Quantization {
    Quantization::TwoDEven
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasisConfig {
    pub n_max: u32,
    /// oscillator length; the harmonic length of the well when absent
    pub length: Option<f64>,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self { n_max: 60, length: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeConfig {
    pub operators: Vec<Operator>,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self { operators: vec![Operator::L2, Operator::HPrime, Operator::H0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WavefunctionConfig {
    pub levels: Vec<usize>,
    pub resolution: usize,
    /// `x` (or `β`) range; derived from the level energy when absent
    pub x_range: Option<[f64; 2]>,
    /// `y` (or `γ`) range
    pub y_range: Option<[f64; 2]>,
}

impl Default for WavefunctionConfig {
    fn default() -> Self {
        Self { levels: vec![0], resolution: 200, x_range: None, y_range: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassicalConfig {
    pub energy: f64,
    pub seed: u64,
    pub integrator: IntegratorSettings,
    pub sali: SaliSettings,
    pub l2: L2Settings,
    /// Poincaré trajectories and crossings per trajectory
    pub trajectories: usize,
    pub crossings: usize,
    pub max_duration: f64,
    /// section samples for f_reg and bounds
    pub samples: usize,
    /// energies of the f_reg curve; `[energy]` when empty
    pub energies: Vec<f64>,
    /// B values of the bounds table; `[model.b]` when empty
    pub b_values: Vec<f64>,
    pub mesh: [usize; 2],
    /// also write the map as raw little-endian f64 with a JSON sidecar
    pub binary_map: bool,
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        Self {
            energy: 0.2,
            seed: 1,
            integrator: IntegratorSettings::default(),
            sali: SaliSettings::default(),
            l2: L2Settings::default(),
            trajectories: 100,
            crossings: 1000,
            max_duration: 1e5,
            samples: 200,
            energies: Vec::new(),
            b_values: Vec::new(),
            mesh: [100, 100],
            binary_map: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BrodyConfig {
    pub window: [f64; 2],
    pub degree: usize,
}

impl Default for BrodyConfig {
    fn default() -> Self {
        Self { window: [0.0, 1.0], degree: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub format_version: u32,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), format_version: crate::output::FORMAT_VERSION }
    }
}

/// Sets `a.b.c = value` inside a TOML table, creating intermediate tables.
fn apply_override(root: &mut toml::Table, assignment: &str) -> Result<(), ConfigError> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| ConfigError::Override(assignment.into()))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override(assignment.into()));
    }
    let raw = raw.trim();
    // parse as a TOML value, falling back to a bare string
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut table = root;
    for part in &parts[..parts.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| invalid(key, format!("'{part}' is not a section")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Parses TOML text, applies overrides, then validates.
    pub fn from_toml(text: &str, source: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Syntax {
            path: source.to_path_buf(),
            message: e.message().to_string(),
        })?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: RunConfig = serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
            let path = e.path().to_string();
            invalid(&path, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_toml(&text, path, overrides)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let m = &self.model;
        let finite = |path: &str, v: f64| if v.is_finite() { Ok(()) } else { Err(invalid(path, "must be finite")) };
        finite("model.a", m.a)?;
        finite("model.b", m.b)?;
        if !(m.c > 0.0 && m.c.is_finite()) {
            return Err(invalid("model.c", "must be > 0"));
        }
        if !(m.hbar > 0.0 && m.hbar.is_finite()) {
            return Err(invalid("model.hbar", "must be > 0"));
        }
        if !(m.mass > 0.0 && m.mass.is_finite()) {
            return Err(invalid("model.mass", "must be > 0"));
        }
        if let Some(l) = self.basis.length {
            if !(l > 0.0 && l.is_finite()) {
                return Err(invalid("basis.length", "must be > 0"));
            }
        }
        if self.lattice.operators.is_empty() {
            return Err(invalid("lattice.operators", "needs at least one operator"));
        }
        if self.wavefunction.resolution == 0 {
            return Err(invalid("wavefunction.resolution", "must be >= 1"));
        }
        for (path, r) in [("wavefunction.x_range", self.wavefunction.x_range), ("wavefunction.y_range", self.wavefunction.y_range)] {
            if let Some([lo, hi]) = r {
                if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                    return Err(invalid(path, "must be an increasing pair"));
                }
            }
        }
        let c = &self.classical;
        finite("classical.energy", c.energy)?;
        c.integrator.validate().map_err(|e| invalid("classical.integrator", e.to_string()))?;
        c.sali.validate().map_err(|e| invalid("classical.sali", e.to_string()))?;
        c.l2.validate().map_err(|e| invalid("classical.l2", e.to_string()))?;
        if c.samples == 0 {
            return Err(invalid("classical.samples", "must be >= 1"));
        }
        if c.crossings == 0 {
            return Err(invalid("classical.crossings", "must be >= 1"));
        }
        if !(c.max_duration > 0.0 && c.max_duration.is_finite()) {
            return Err(invalid("classical.max_duration", "must be > 0"));
        }
        if c.mesh.contains(&0) {
            return Err(invalid("classical.mesh", "needs at least one cell per axis"));
        }
        if c.energies.iter().chain(&c.b_values).any(|v| !v.is_finite()) {
            return Err(invalid("classical", "energies and b_values must be finite"));
        }
        let [lo, hi] = self.brody.window;
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(invalid("brody.window", "must be an increasing pair"));
        }
        if self.output.format_version != crate::output::FORMAT_VERSION {
            return Err(invalid(
                "output.format_version",
                format!("only version {} is supported", crate::output::FORMAT_VERSION),
            ));
        }
        Ok(())
    }

    /// Output directory after the environment override.
    pub fn output_directory(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output.directory.clone(),
        }
    }

    pub fn length(&self) -> crate::Result<f64> {
        match self.basis.length {
            Some(l) => Ok(l),
            None => crate::spectra::default_length(&self.model),
        }
    }
}
