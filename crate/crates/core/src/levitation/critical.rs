use super::SuperconductorDisc;
use crate::error::{Error, Result};
use crate::magnetostatics::{dipole_field, Magnet};
use crate::roots::bisect;

/// Parabolic critical-field law `B_c(T) = B_c0·(1 − (T/T_c)²)`, zero at and above `T_c`.
pub fn critical_field(temperature: f64, disc: &SuperconductorDisc) -> f64 {
    if temperature >= disc.tc {
        return 0.0;
    }
    let t = temperature.max(0.0) / disc.tc;
    disc.bc0 * (1.0 - t * t)
}

/// Radius of the normal spot the magnet's field drives on the disc surface:
/// the in-plane radius where the dipole field at depth `dipole_height` below
/// the magnet falls to `B_c(T)`.
///
/// Clamped to 0 when the field is below `B_c` everywhere and to the disc
/// radius when it exceeds `B_c` across the whole disc.
pub fn normal_region_radius(
    magnet: &Magnet,
    dipole_height: f64,
    temperature: f64,
    disc: &SuperconductorDisc,
) -> Result<f64> {
    if !(dipole_height > 0.0) {
        return Err(Error::domain(format!("dipole height must be > 0, got {dipole_height}")));
    }
    let m = magnet.moment();
    let bc = critical_field(temperature, disc);
    let excess = |rho: f64| Ok(dipole_field(m, rho, dipole_height)? - bc);
    if excess(0.0)? <= 0.0 {
        return Ok(0.0);
    }
    if excess(disc.radius)? >= 0.0 {
        return Ok(disc.radius);
    }
    bisect(excess, 0.0, disc.radius, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::MU0_OVER_4PI;

    fn magnet(br: f64) -> Magnet {
        Magnet::new("m", 0.5e-3, 0.5e-3, 2.75e-6, br).unwrap()
    }

    #[test]
    fn parabolic_law() {
        let disc = SuperconductorDisc::default();
        assert_eq!(critical_field(0.0, &disc), 0.010);
        assert_eq!(critical_field(1.2, &disc), 0.0);
        assert_eq!(critical_field(5.0, &disc), 0.0);
        assert!((critical_field(0.6, &disc) - 0.0075).abs() < 1e-15);
    }

    #[test]
    fn resting_n52_spot() {
        let disc = SuperconductorDisc::default();
        let n52 = magnet(1.47);
        let rho = normal_region_radius(&n52, 0.25e-3, 0.0, &disc).unwrap();
        // Far-field root: μ0 m / (4π ρ³) = B_c
        let far = (MU0_OVER_4PI * n52.moment().magnitude() / 0.010).cbrt();
        assert!((rho - far).abs() < 0.05 * far, "{rho} vs {far}");
        assert!((rho * 1e3 - 1.66).abs() < 0.05 * 1.66);
        assert!(rho > 1e-3 && rho < 2e-3);
    }

    #[test]
    fn clamps() {
        let disc = SuperconductorDisc::default();
        let n52 = magnet(1.47);
        assert_eq!(normal_region_radius(&n52, 0.25e-3, 1.2, &disc).unwrap(), disc.radius);
        assert_eq!(normal_region_radius(&n52, 50e-3, 0.0, &disc).unwrap(), 0.0);
        assert!(normal_region_radius(&n52, 0.0, 0.0, &disc).is_err());
    }

    #[test]
    fn grows_with_remanence() {
        let disc = SuperconductorDisc::default();
        let mut prev = 0.0;
        for br in [1.22, 1.32, 1.44, 1.47] {
            let rho = normal_region_radius(&magnet(br), 0.25e-3, 0.3, &disc).unwrap();
            assert!(rho > prev);
            prev = rho;
        }
    }
}
