//! Run configuration, read from TOML. Every table rejects unknown keys.

use std::path::{Path, PathBuf};

use levsim_core::cavity::{CavityGeometry, InversionOptions, ParametricMap};
use levsim_core::levitation::{Model, SolverOptions, SuperconductorDisc};
use levsim_core::spectra::Thresholds;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Preset table replacing the built-in one.
    pub presets_file: Option<PathBuf>,
    pub geometry: CavityGeometry,
    pub disc: SuperconductorDisc,
    pub solver: SolverOptions,
    pub map: ParametricMap,
    /// Radial coordinate meant by `--r edge` (m).
    pub edge_radius: f64,
    pub inversion: InversionOptions,
    pub thresholds: Thresholds,
    pub sweep: SweepConfig,
    pub analysis: AnalysisConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            presets_file: None,
            geometry: CavityGeometry::default(),
            disc: SuperconductorDisc::default(),
            solver: SolverOptions::default(),
            map: ParametricMap::reference(),
            edge_radius: levsim_core::cavity::DEFAULT_EDGE_RADIUS,
            inversion: InversionOptions::default(),
            thresholds: Thresholds::default(),
            sweep: SweepConfig::default(),
            analysis: AnalysisConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub presets: Vec<String>,
    pub model: Model,
    /// Temperature for the two-loop height (K); none means full screening.
    pub temperature: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            presets: Vec::new(),
            model: Model::TwoLoop,
            temperature: Some(0.05),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    /// Reference resonance (Hz); none uses the warmest fitted record.
    pub reference_hz: Option<f64>,
    pub snr_db: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            reference_hz: None,
            snr_db: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("levsim-out"),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let wrap = |e: levsim_core::Error| CliError::config(format!("config: {e}"));
        self.geometry.validate().map_err(wrap)?;
        self.disc.validate().map_err(wrap)?;
        self.thresholds.validate().map_err(wrap)?;
        if !(self.map.lambda > 0.0) {
            return Err(CliError::config("config: map.lambda must be > 0"));
        }
        if !(self.edge_radius >= 0.0 && self.edge_radius <= self.map.r_max) {
            return Err(CliError::config("config: edge_radius must lie in [0, map.r_max]"));
        }
        if self.solver.scan_points < 2 {
            return Err(CliError::config("config: solver.scan_points must be >= 2"));
        }
        Ok(())
    }
}
