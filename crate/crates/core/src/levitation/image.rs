use std::f64::consts::PI;

use super::Equilibrium;
use crate::constants::MU_0;
use crate::error::{Error, Result};
use crate::magnetostatics::{DipoleMoment, Magnet};

/// Repulsion between a vertical dipole at height `z` and its mirror image in
/// an infinite superconducting plane: `F = 3μ0m²/(32π z⁴)`, positive upward.
pub fn image_force(m: DipoleMoment, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain(format!("height must be > 0, got {z}")));
    }
    let m = m.magnitude();
    Ok(3.0 * MU_0 * m * m / (32.0 * PI * z.powi(4)))
}

/// Total potential `μ0m²/(32π z³) + M g z` for the image method.
pub fn image_potential(magnet: &Magnet, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain(format!("height must be > 0, got {z}")));
    }
    let m = magnet.moment().magnitude();
    Ok(MU_0 * m * m / (32.0 * PI * z.powi(3)) + magnet.weight() * z)
}

/// Closed-form image-method height `(3μ0m²/(32π M g))^¼`. Always stable:
/// quartic repulsion against constant weight.
pub fn image_equilibrium_height(magnet: &Magnet) -> Result<Equilibrium> {
    magnet.validate()?;
    let m = magnet.moment().magnitude();
    if m == 0.0 {
        return Err(Error::NoLevitation(format!(
            "magnet {} has zero moment",
            magnet.label
        )));
    }
    let height = (3.0 * MU_0 * m * m / (32.0 * PI * magnet.weight())).powf(0.25);
    let residual_force = image_force(magnet.moment(), height)? - magnet.weight();
    Ok(Equilibrium {
        height,
        stable: true,
        residual_force,
        iterations: 0,
    })
}
