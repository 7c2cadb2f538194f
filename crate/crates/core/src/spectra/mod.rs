//! S21 spectra: parsing, resonance fitting, cooldown tracking and region
//! classification, plus seeded synthetic fixtures.

mod cooldown;
mod fit;
mod regions;
mod synth;
mod touchstone;
mod trace_csv;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cooldown::{assemble_series, track_cooldown, write_cooldown_csv, CooldownRecord, CooldownSeries, Reference};
pub use fit::{fit_resonance, lorentzian_model, ResonanceFit};
pub use regions::{classify_regions, Region, RegionSegmentation, Segment, Thresholds};
pub use synth::{synth_cooldown, synth_trace, SynthProfile};
pub use touchstone::{parse_touchstone, DataFormat, FrequencyUnit, Touchstone};
pub use trace_csv::{parse_csv_trace, write_csv_trace};

/// Sampled forward transmission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceTrace {
    /// Hz, strictly increasing.
    pub frequencies: Vec<f64>,
    pub s21: Vec<Complex64>,
    pub source_meta: String,
}

impl ResonanceTrace {
    pub fn new(frequencies: Vec<f64>, s21: Vec<Complex64>, source_meta: impl Into<String>) -> Result<Self> {
        if frequencies.len() != s21.len() {
            return Err(Error::param(format!(
                "{} frequencies but {} samples",
                frequencies.len(),
                s21.len()
            )));
        }
        if frequencies.is_empty() {
            return Err(Error::NoData("trace has no samples".into()));
        }
        if let Some(i) = frequencies.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::param(format!("frequencies not strictly increasing at sample {}", i + 1)));
        }
        Ok(ResonanceTrace {
            frequencies,
            s21,
            source_meta: source_meta.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// |S21|² per sample.
    pub fn power(&self) -> Vec<f64> {
        self.s21.iter().map(|s| s.norm_sqr()).collect()
    }
}

pub(crate) fn from_db_deg(db: f64, deg: f64) -> Complex64 {
    Complex64::from_polar(10f64.powf(db / 20.0), deg.to_radians())
}

pub(crate) fn to_db_deg(s: Complex64) -> (f64, f64) {
    (20.0 * s.norm().log10(), s.arg().to_degrees())
}
