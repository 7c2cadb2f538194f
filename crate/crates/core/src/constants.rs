//! Physical constants.

use std::f64::consts::PI;

/// Vacuum permeability (H/m), the exact pre-2019 value.
pub const MU_0: f64 = 4.0 * PI * 1e-7;

/// μ0 / 4π (H/m).
pub const MU0_OVER_4PI: f64 = 1e-7;

/// Standard gravity used for all force balances (m/s²).
pub const GRAVITY: f64 = 9.81;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
