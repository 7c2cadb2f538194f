use serde::{Deserialize, Serialize};

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{Error, Result};

/// Coaxial quarter-wave stub cavity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CavityGeometry {
    pub outer_radius: f64,
    pub cavity_height: f64,
    pub stub_radius: f64,
    pub stub_height: f64,
    /// Added to the stub height to give the electrical quarter-wave length (m).
    pub effective_length_correction: f64,
}

impl Default for CavityGeometry {
    fn default() -> Self {
        CavityGeometry {
            outer_radius: 7e-3,
            cavity_height: 55e-3,
            stub_radius: 2e-3,
            stub_height: 5e-3,
            effective_length_correction: 0.0,
        }
    }
}

impl CavityGeometry {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.outer_radius, self.cavity_height, self.stub_radius, self.stub_height];
        if positive.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::domain("cavity dimensions must be positive"));
        }
        if self.stub_radius >= self.outer_radius {
            return Err(Error::domain("stub radius must be smaller than the outer radius"));
        }
        if self.stub_height >= self.cavity_height {
            return Err(Error::domain("stub height must be smaller than the cavity height"));
        }
        if self.stub_height + self.effective_length_correction <= 0.0 {
            return Err(Error::domain("effective stub length must be positive"));
        }
        Ok(())
    }

    pub fn effective_length(&self) -> f64 {
        self.stub_height + self.effective_length_correction
    }
}

/// `f0 = c / (4·(l + δl))`.
pub fn bare_frequency(geometry: &CavityGeometry) -> f64 {
    SPEED_OF_LIGHT / (4.0 * geometry.effective_length())
}

/// Length correction that makes [`bare_frequency`] reproduce `measured_f0`.
pub fn calibrate_effective_length(geometry: &CavityGeometry, measured_f0: f64) -> Result<f64> {
    if !(measured_f0 > 0.0 && measured_f0.is_finite()) {
        return Err(Error::Calibration(format!("measured f0 must be > 0, got {measured_f0}")));
    }
    let correction = SPEED_OF_LIGHT / (4.0 * measured_f0) - geometry.stub_height;
    if correction <= -geometry.stub_height {
        return Err(Error::Calibration(format!(
            "correction {correction} m would make the stub length non-positive"
        )));
    }
    Ok(correction)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naive_and_corrected_frequency() {
        let mut g = CavityGeometry::default();
        assert!((bare_frequency(&g) - SPEED_OF_LIGHT / 0.02).abs() < 1e-3);
        assert!((bare_frequency(&g) / 1e9 - 15.0).abs() < 0.02);
        g.effective_length_correction = 2.5e-3;
        assert!((bare_frequency(&g) / 1e9 - 10.0).abs() < 0.01);
    }

    #[test]
    fn decreasing_in_stub_height() {
        let mut prev = f64::INFINITY;
        for i in 1..20 {
            let g = CavityGeometry {
                stub_height: i as f64 * 1e-3,
                ..CavityGeometry::default()
            };
            let f = bare_frequency(&g);
            assert!(f < prev);
            prev = f;
        }
    }

    #[test]
    fn calibration_round_trip() {
        let mut g = CavityGeometry::default();
        let c = calibrate_effective_length(&g, 10e9).unwrap();
        assert!((c - (SPEED_OF_LIGHT / 4e10 - 5e-3)).abs() < 1e-15);
        assert!((c * 1e3 - 2.5).abs() < 0.01);
        g.effective_length_correction = c;
        assert!((bare_frequency(&g) - 10e9).abs() < 1.0);
        let c15 = calibrate_effective_length(&CavityGeometry::default(), SPEED_OF_LIGHT / 0.02).unwrap();
        assert!(c15.abs() < 1e-15);
    }

    #[test]
    fn calibration_errors() {
        let g = CavityGeometry::default();
        assert!(calibrate_effective_length(&g, 0.0).is_err());
        assert!(calibrate_effective_length(&g, -1.0).is_err());
        assert!(calibrate_effective_length(&g, f64::INFINITY).is_err());
    }
}
