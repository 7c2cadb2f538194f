//! Magnet preset table, shipped as a TOML file and overridable.

use std::path::Path;

use levsim_core::magnetostatics::Magnet;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const BUILTIN: &str = include_str!("../presets.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetEntry {
    pub label: String,
    pub remanence: f64,
    pub radius: f64,
    pub height: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetTable {
    pub version: u32,
    #[serde(rename = "magnet")]
    pub magnets: Vec<PresetEntry>,
}

impl PresetTable {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("built-in preset table is valid")
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: PresetTable = toml::from_str(text).map_err(|e| CliError::config(format!("preset table: {e}")))?;
        for (i, m) in table.magnets.iter().enumerate() {
            if table.magnets[..i].iter().any(|o| o.label.eq_ignore_ascii_case(&m.label)) {
                return Err(CliError::config(format!("preset table: duplicate label '{}'", m.label)));
            }
            m.to_magnet()?;
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read preset table {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, label: &str) -> Result<Magnet, CliError> {
        self.magnets
            .iter()
            .find(|m| m.label.eq_ignore_ascii_case(label))
            .ok_or_else(|| {
                let known: Vec<&str> = self.magnets.iter().map(|m| m.label.as_str()).collect();
                CliError::config(format!("unknown preset '{label}' (known: {})", known.join(", ")))
            })?
            .to_magnet()
    }

    pub fn labels(&self) -> Vec<String> {
        self.magnets.iter().map(|m| m.label.clone()).collect()
    }
}

impl PresetEntry {
    pub fn to_magnet(&self) -> Result<Magnet, CliError> {
        Magnet::new(self.label.clone(), self.radius, self.height, self.mass, self.remanence)
            .map_err(|e| CliError::config(format!("preset '{}': {e}", self.label)))
    }
}
