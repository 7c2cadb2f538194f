use super::{DipoleMoment, Magnet};
use crate::constants::{MU0_OVER_4PI, MU_0};
use crate::error::{Error, Result};

/// Flux density magnitude of a vertical point dipole at in-plane distance
/// `rho` and height difference `dz` from it:
/// `|B| = μ0 m / (4π r³) · √(3cos²θ + 1)`.
pub fn dipole_field(m: DipoleMoment, rho: f64, dz: f64) -> Result<f64> {
    let r2 = rho * rho + dz * dz;
    if r2 == 0.0 {
        return Err(Error::Singular("dipole field evaluated at the dipole itself".into()));
    }
    if !r2.is_finite() {
        return Err(Error::domain("observation point must be finite"));
    }
    let r = r2.sqrt();
    let cos2 = dz * dz / r2;
    Ok(MU0_OVER_4PI * m.magnitude() / (r2 * r) * (3.0 * cos2 + 1.0).sqrt())
}

/// `m = B_r·V/μ0` for a uniformly magnetized cylinder.
pub fn moment_from_remanence(magnet: &Magnet) -> DipoleMoment {
    // Remanence and volume are validated non-negative at construction.
    DipoleMoment::new(magnet.remanence * magnet.volume() / MU_0).unwrap_or_else(|_| {
        DipoleMoment::new(0.0).expect("zero moment is valid")
    })
}
