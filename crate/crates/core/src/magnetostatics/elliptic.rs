//! Complete elliptic integrals by the arithmetic-geometric mean.
//!
//! The argument everywhere in this crate is the *parameter* `m = k²`, not the
//! modulus `k`. `K(m) = ∫₀^{π/2} dθ / √(1 − m sin²θ)` and
//! `E(m) = ∫₀^{π/2} √(1 − m sin²θ) dθ`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const MAX_AGM_STEPS: usize = 64;

/// Complete elliptic integrals of the first and second kind, `(K(k²), E(k²))`.
///
/// Takes the parameter `k_squared = k²` and requires `0 <= k² < 1`.
/// Relative accuracy is at the level of a few ulps.
pub fn ellip_ke(k_squared: f64) -> Result<(f64, f64)> {
    let (k, d) = agm_kd(k_squared)?;
    Ok((k, k * (1.0 - 0.5 * k_squared - 0.5 * d)))
}

/// `K(m)` together with `D(m) = Σ_{n≥1} 2ⁿ cₙ²` from the AGM sequence.
///
/// `E = K·(1 − m/2 − D/2)`, so `(2 − m)K − 2E = K·D` without cancellation.
/// That difference is what the coaxial mutual inductance needs at small `m`.
pub(crate) fn agm_kd(m: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::domain(format!(
            "elliptic parameter k² must lie in [0, 1), got {m}"
        )));
    }
    if m == 0.0 {
        return Ok((FRAC_PI_2, 0.0));
    }
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    // c₁ = (1 − k')/2 written without the subtraction.
    let mut c = 0.5 * m / (1.0 + b);
    let mut pow2 = 1.0;
    let mut d = 0.0;
    for _ in 0..MAX_AGM_STEPS {
        let a_next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = a_next;
        pow2 *= 2.0;
        d += pow2 * c * c;
        if c <= f64::EPSILON * a {
            break;
        }
        // c_{n+1} = c_n² / (4 a_{n+1})
        c = c * c / (4.0 * 0.5 * (a + b));
    }
    Ok((FRAC_PI_2 / a, d))
}
