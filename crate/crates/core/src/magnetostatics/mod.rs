//! Electromagnetic kernels: complete elliptic integrals, filament-loop
//! inductances, dipole fields and the remanence-to-moment conversion.

mod dipole;
mod elliptic;
mod inductance;
pub mod quadrature;

pub use dipole::{dipole_field, moment_from_remanence};
pub use elliptic::ellip_ke;
pub use inductance::{
    grad_mutual_inductance, mutual_inductance_coaxial,
    mutual_inductance_neumann, self_inductance_loop, Axis, Gradient,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A cylindrical permanent magnet magnetized along its axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Magnet {
    /// Cylinder radius (m).
    pub radius: f64,
    /// Cylinder height (m).
    pub height: f64,
    /// Mass (kg).
    pub mass: f64,
    /// Remanent flux density (T).
    pub remanence: f64,
    pub label: String,
}

impl Magnet {
    pub fn new(
        label: impl Into<String>,
        radius: f64,
        height: f64,
        mass: f64,
        remanence: f64,
    ) -> Result<Self> {
        let magnet = Magnet {
            radius,
            height,
            mass,
            remanence,
            label: label.into(),
        };
        magnet.validate()?;
        Ok(magnet)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::domain(format!("magnet radius must be > 0, got {}", self.radius)));
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(Error::domain(format!("magnet height must be > 0, got {}", self.height)));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::domain(format!("magnet mass must be > 0, got {}", self.mass)));
        }
        if !(self.remanence >= 0.0 && self.remanence.is_finite()) {
            return Err(Error::domain(format!(
                "remanence must be >= 0, got {}",
                self.remanence
            )));
        }
        Ok(())
    }

    /// Magnet volume (m³).
    pub fn volume(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius * self.height
    }

    pub fn weight(&self) -> f64 {
        self.mass * crate::constants::GRAVITY
    }

    pub fn moment(&self) -> DipoleMoment {
        moment_from_remanence(self)
    }
}

/// Horizontal circular filament. Its centre sits at `lateral_offset` along a
/// fixed horizontal axis and at height `axial_position`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Loop {
    pub radius: f64,
    pub axial_position: f64,
    pub lateral_offset: f64,
    pub current: f64,
}

impl Loop {
    pub fn new(radius: f64, axial_position: f64, lateral_offset: f64, current: f64) -> Result<Self> {
        let lp = Loop {
            radius,
            axial_position,
            lateral_offset,
            current,
        };
        lp.validate()?;
        Ok(lp)
    }

    /// A loop centred on the axis at height `z`, carrying no current.
    pub fn coaxial(radius: f64, z: f64) -> Result<Self> {
        Self::new(radius, z, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::domain(format!("loop radius must be > 0, got {}", self.radius)));
        }
        if !(self.lateral_offset >= 0.0 && self.lateral_offset.is_finite()) {
            return Err(Error::domain(format!(
                "lateral offset must be >= 0, got {}",
                self.lateral_offset
            )));
        }
        if !self.axial_position.is_finite() {
            return Err(Error::domain("axial position must be finite"));
        }
        Ok(())
    }
}

/// Magnetic dipole moment, always oriented along +z.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct DipoleMoment(f64);

impl DipoleMoment {
    pub fn new(magnitude: f64) -> Result<Self> {
        if magnitude >= 0.0 && magnitude.is_finite() {
            Ok(DipoleMoment(magnitude))
        } else {
            Err(Error::domain(format!("dipole moment must be >= 0, got {magnitude}")))
        }
    }

    /// Magnitude (A·m²).
    pub fn magnitude(self) -> f64 {
        self.0
    }

    /// Current in an equivalent loop of radius `loop_radius` carrying the same moment.
    pub fn loop_current(self, loop_radius: f64) -> f64 {
        self.0 / (std::f64::consts::PI * loop_radius * loop_radius)
    }
}
