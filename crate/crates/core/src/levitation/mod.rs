//! Levitation physics: the image method, the flux-nulling response-loop model
//! of a finite superconducting disc, equilibria, and the critical-field
//! normal region that delays levitation on cooldown.

mod critical;
mod equilibrium;
mod image;
mod response;

pub use critical::{critical_field, normal_region_radius};
pub use equilibrium::{equilibrium_height, onset_temperature, Model, SolverOptions};
pub use image::{image_equilibrium_height, image_force, image_potential};
pub use response::{
    build_response_array, levitation_force, potential_curve, solve_screening_currents,
    ForcePotentialCurve, ResponseArray, Screening,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::magnetostatics::{Loop, Magnet};

/// Top face of the superconducting stub, discretized into concentric loops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuperconductorDisc {
    /// Disc radius (m).
    pub radius: f64,
    pub loop_count: usize,
    /// Zero-temperature critical field B_c(0) (T).
    pub bc0: f64,
    /// Critical temperature (K).
    pub tc: f64,
}

impl Default for SuperconductorDisc {
    fn default() -> Self {
        SuperconductorDisc {
            radius: 2e-3,
            loop_count: 400,
            bc0: 0.010,
            tc: 1.2,
        }
    }
}

impl SuperconductorDisc {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::domain(format!("disc radius must be > 0, got {}", self.radius)));
        }
        if self.loop_count == 0 {
            return Err(Error::domain("disc needs at least one response loop"));
        }
        if !(self.bc0 > 0.0) {
            return Err(Error::domain(format!("bc0 must be > 0, got {}", self.bc0)));
        }
        if !(self.tc > 0.0 && self.tc.is_finite()) {
            return Err(Error::domain(format!("tc must be > 0, got {}", self.tc)));
        }
        Ok(())
    }
}

/// A solved force balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    /// Height of the magnet centre above the superconducting surface (m).
    pub height: f64,
    pub stable: bool,
    /// Net force (magnetic minus weight) at `height` (N).
    pub residual_force: f64,
    pub iterations: usize,
}

/// The magnet as one equivalent current loop at its mid-height, with the
/// magnet's radius and a current that reproduces its dipole moment.
pub fn magnet_loop(magnet: &Magnet, z: f64, lateral_offset: f64) -> Result<Loop> {
    let current = magnet.moment().loop_current(magnet.radius);
    Loop::new(magnet.radius, z, lateral_offset, current)
}
