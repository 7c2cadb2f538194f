//! Self and mutual inductances of thin circular filaments.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::elliptic::agm_kd;
use super::quadrature::{integrate_2d, QuadOptions};
use super::Loop;
use crate::constants::{MU0_OVER_4PI, MU_0};
use crate::error::{Error, Result};

/// Mutual inductance of two coaxial circular filaments of radii `a`, `b`
/// separated axially by `d` (Maxwell's closed form).
///
/// `M = μ0·√(ab)·[(2/k − k)K − (2/k)E]` with `k² = 4ab/((a+b)² + d²)`.
pub fn mutual_inductance_coaxial(a: f64, b: f64, d: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() || !d.is_finite() {
        return Err(Error::domain(format!(
            "loop radii must be positive and finite, got a={a}, b={b}, d={d}"
        )));
    }
    if a == b && d == 0.0 {
        return Err(Error::Singular(format!(
            "coincident loops (radius {a} m, separation 0)"
        )));
    }
    let sum = a + b;
    let m = 4.0 * a * b / (sum * sum + d * d);
    let (k_int, diff) = agm_kd(m)?;
    // (2/k − k)K − (2/k)E = ((2 − m)K − 2E)/k = K·D/k
    Ok(MU_0 * (a * b).sqrt() * k_int * diff / m.sqrt())
}

/// Neumann double line integral `μ0/4π ∮∮ dl₁·dl₂ / |r₁ − r₂|` for two
/// horizontal loops, evaluated by nested adaptive Gauss–Kronrod quadrature to a
/// relative tolerance of 1e-8.
///
/// Handles any lateral offset. Symmetric in its arguments.
pub fn mutual_inductance_neumann(loop1: &Loop, loop2: &Loop) -> Result<f64> {
    neumann_with(loop1, loop2, QuadOptions::default())
}

pub(crate) fn neumann_with(loop1: &Loop, loop2: &Loop, opts: QuadOptions) -> Result<f64> {
    loop1.validate()?;
    loop2.validate()?;
    let a = loop1.radius;
    let b = loop2.radius;
    let d = loop2.axial_position - loop1.axial_position;
    let rho = (loop2.lateral_offset - loop1.lateral_offset).abs();
    if a == b && d == 0.0 && rho == 0.0 {
        return Err(Error::Singular(format!(
            "coincident loops (radius {a} m, separation 0)"
        )));
    }
    let d2 = d * d;
    // Mirror symmetry φ → −φ about the offset axis halves the outer range.
    let integrand = |p1: f64, p2: f64| {
        let (s1, c1) = p1.sin_cos();
        let (s2, c2) = p2.sin_cos();
        let dx = b * c2 + rho - a * c1;
        let dy = b * s2 - a * s1;
        (c1 * c2 + s1 * s2) / (dx * dx + dy * dy + d2).sqrt()
    };
    let r = integrate_2d(integrand, (0.0, PI), (0.0, 2.0 * PI), opts)?;
    Ok(2.0 * MU0_OVER_4PI * a * b * r.value)
}

/// Direction of a finite-difference derivative with respect to the second loop's position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Axial,
    Lateral,
}

/// Finite-difference derivative together with the step used and an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gradient {
    /// dM/dx (H/m).
    pub value: f64,
    /// Base step h (m); the estimate combines steps h and h/2.
    pub step: f64,
    /// |D(h/2) − D(h)| / 3, the Richardson correction magnitude.
    pub error_estimate: f64,
}

/// Derivative of the mutual inductance with respect to moving `loop2` along
/// `axis`, by a once-Richardson-extrapolated central difference with step
/// `max(1 µm, 1e-4·separation)`.
///
/// Coaxial configurations perturbed axially use the closed form; anything
/// with a lateral displacement goes through the Neumann integral.
pub fn grad_mutual_inductance(loop1: &Loop, loop2: &Loop, axis: Axis) -> Result<Gradient> {
    loop1.validate()?;
    loop2.validate()?;
    let d = loop2.axial_position - loop1.axial_position;
    let rho = loop2.lateral_offset - loop1.lateral_offset;
    let separation = d.hypot(rho);
    let h = (1e-4 * separation).max(1e-6);

    let coaxial = rho == 0.0 && axis == Axis::Axial;
    let opts = QuadOptions {
        rel_tol: 1e-11,
        ..QuadOptions::default()
    };
    let eval = |delta: f64| -> Result<f64> {
        if coaxial {
            mutual_inductance_coaxial(loop1.radius, loop2.radius, d + delta)
        } else {
            // Only the relative offset matters, and M is even in it.
            let (dz, drho) = match axis {
                Axis::Axial => (delta, 0.0),
                Axis::Lateral => (0.0, delta),
            };
            let fixed = Loop { lateral_offset: 0.0, ..*loop1 };
            let moved = Loop {
                axial_position: loop2.axial_position + dz,
                lateral_offset: (rho + drho).abs(),
                ..*loop2
            };
            neumann_with(&fixed, &moved, opts)
        }
    };
    let central = |step: f64| -> Result<f64> { Ok((eval(step)? - eval(-step)?) / (2.0 * step)) };
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    Ok(Gradient {
        value: (4.0 * fine - coarse) / 3.0,
        step: h,
        error_estimate: (fine - coarse).abs() / 3.0,
    })
}

/// Self-inductance of a thin circular loop of radius `a` made of round wire
/// of radius `wire_radius`: `L = μ0·a·(ln(8a/r_w) − 2)`.
pub fn self_inductance_loop(a: f64, wire_radius: f64) -> Result<f64> {
    if !(wire_radius > 0.0 && wire_radius < a) || !a.is_finite() {
        return Err(Error::domain(format!(
            "wire radius must satisfy 0 < r_w < a, got r_w={wire_radius}, a={a}"
        )));
    }
    Ok(MU_0 * a * ((8.0 * a / wire_radius).ln() - 2.0))
}

/// Analytic ∂M/∂d of the coaxial closed form. Kept out of the production
/// path; tests use it as an independent check on the finite differences.
#[cfg(test)]
pub(crate) fn dmutual_coaxial_dd(a: f64, b: f64, d: f64) -> f64 {
    let sum = a + b;
    let m = 4.0 * a * b / (sum * sum + d * d);
    let (k_int, e_int) = super::ellip_ke(m).unwrap();
    -MU_0 * d * m.sqrt() / (4.0 * (a * b).sqrt()) * ((2.0 - m) / (1.0 - m) * e_int - 2.0 * k_int)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MM: f64 = 1e-3;

    #[test]
    fn coaxial_reference_value() {
        // Frozen from an independent Neumann double-integral evaluation
        // (adaptive 2D quadrature at 1e-12).
        let m = mutual_inductance_coaxial(MM, MM, MM).unwrap();
        assert!((m - 4.940_784_630_798_27e-10).abs() < 1e-9 * m);
        assert!((m * 1e9 - 0.494).abs() < 5e-4);
    }

    #[test]
    fn coaxial_is_symmetric() {
        for &(a, b, d) in &[(1e-3, 2e-3, 0.5e-3), (0.2e-3, 5e-3, 3e-3), (1e-3, 1.1e-3, 0.0)] {
            let m1 = mutual_inductance_coaxial(a, b, d).unwrap();
            let m2 = mutual_inductance_coaxial(b, a, d).unwrap();
            assert_eq!(m1, m2);
            assert_eq!(m1, mutual_inductance_coaxial(a, b, -d).unwrap());
        }
    }

    #[test]
    fn coaxial_far_field_decays_monotonically() {
        let mut prev = f64::INFINITY;
        for i in 0..40 {
            let d = MM * 1.5f64.powi(i);
            let m = mutual_inductance_coaxial(MM, MM, d).unwrap();
            assert!(m > 0.0 && m < prev, "d={d} m={m}");
            prev = m;
        }
        // Dipole–dipole limit: μ0 π a²b² / (2 d³)
        let d = 1.0;
        let m = mutual_inductance_coaxial(MM, MM, d).unwrap();
        let dipole = MU_0 * PI * MM.powi(4) / (2.0 * d.powi(3));
        assert!((m - dipole).abs() < 1e-5 * dipole);
    }

    #[test]
    fn coaxial_singular_and_domain_errors() {
        assert!(matches!(mutual_inductance_coaxial(MM, MM, 0.0), Err(Error::Singular(_))));
        assert!(matches!(mutual_inductance_coaxial(0.0, MM, MM), Err(Error::Domain(_))));
        assert!(matches!(mutual_inductance_coaxial(MM, -MM, MM), Err(Error::Domain(_))));
    }

    #[test]
    fn neumann_reduces_to_coaxial() {
        let l1 = Loop::coaxial(MM, 0.0).unwrap();
        let l2 = Loop::coaxial(MM, MM).unwrap();
        let n = mutual_inductance_neumann(&l1, &l2).unwrap();
        let c = mutual_inductance_coaxial(MM, MM, MM).unwrap();
        assert!((n - c).abs() < 1e-6 * c);
    }

    #[test]
    fn neumann_offset_golden() {
        // Frozen from an independent 2D quadrature at relative tolerance 1e-12.
        let l1 = Loop::coaxial(MM, 0.0).unwrap();
        let l2 = Loop::new(MM, MM, 0.5 * MM, 0.0).unwrap();
        let n = mutual_inductance_neumann(&l1, &l2).unwrap();
        assert!((n - 4.199_573_235_704_323e-10).abs() < 1e-7 * n, "{n}");
        let swapped = mutual_inductance_neumann(&l2, &l1).unwrap();
        assert!((n - swapped).abs() < 1e-12 * n);
    }

    #[test]
    fn neumann_decreases_with_offset() {
        let l1 = Loop::coaxial(MM, 0.0).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..10 {
            let off = 2.0 * MM * i as f64 / 9.0;
            let l2 = Loop::new(MM, MM, off, 0.0).unwrap();
            let m = mutual_inductance_neumann(&l1, &l2).unwrap();
            assert!(m < prev, "offset {off}: {m} !< {prev}");
            prev = m;
        }
    }

    #[test]
    fn neumann_coincident_is_singular() {
        let l = Loop::coaxial(MM, 0.0).unwrap();
        assert!(matches!(mutual_inductance_neumann(&l, &l), Err(Error::Singular(_))));
    }

    #[test]
    fn axial_gradient_matches_analytic() {
        let cases = [(MM, MM, MM), (MM, 2.0 * MM, 0.5 * MM), (0.5 * MM, 1.5 * MM, 3.0 * MM), (0.2e-3, 5e-3, 0.1e-3)];
        for &(a, b, d) in &cases {
            let l1 = Loop::coaxial(a, 0.0).unwrap();
            let l2 = Loop::coaxial(b, d).unwrap();
            let g = grad_mutual_inductance(&l1, &l2, Axis::Axial).unwrap();
            let exact = dmutual_coaxial_dd(a, b, d);
            assert!(g.value < 0.0);
            assert!((g.value - exact).abs() < 1e-5 * exact.abs(), "{a} {b} {d}: {} vs {exact}", g.value);
            assert!(g.step >= 1e-6);
        }
    }

    #[test]
    fn lateral_gradient_vanishes_on_axis() {
        let l1 = Loop::coaxial(MM, 0.0).unwrap();
        let l2 = Loop::coaxial(MM, MM).unwrap();
        let g = grad_mutual_inductance(&l1, &l2, Axis::Lateral).unwrap();
        assert_eq!(g.value, 0.0);
    }

    #[test]
    fn lateral_gradient_negative_off_axis() {
        let l1 = Loop::coaxial(MM, 0.0).unwrap();
        let l2 = Loop::new(MM, MM, 0.5 * MM, 0.0).unwrap();
        let g = grad_mutual_inductance(&l1, &l2, Axis::Lateral).unwrap();
        assert!(g.value < 0.0);
        // Compare against a wide central difference of the Neumann integral.
        let h = 1e-5;
        let mp = mutual_inductance_neumann(&l1, &Loop { lateral_offset: 0.5 * MM + h, ..l2 }).unwrap();
        let mm = mutual_inductance_neumann(&l1, &Loop { lateral_offset: 0.5 * MM - h, ..l2 }).unwrap();
        let wide = (mp - mm) / (2.0 * h);
        assert!((g.value - wide).abs() < 1e-4 * wide.abs());
    }

    #[test]
    fn self_inductance_value_and_trends() {
        let l = self_inductance_loop(MM, 0.05 * MM).unwrap();
        assert!((l - 3.864_377_386_580_115e-9).abs() < 1e-12 * l);
        let mut prev = 0.0;
        for i in 1..20 {
            let v = self_inductance_loop(MM * i as f64, 0.05 * MM).unwrap();
            assert!(v > prev);
            prev = v;
        }
        let mut prev = f64::INFINITY;
        for i in 1..20 {
            let v = self_inductance_loop(MM, 0.04 * MM * i as f64).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(self_inductance_loop(MM, MM).is_err());
        assert!(self_inductance_loop(MM, 0.0).is_err());
    }
}
