//! Least-squares fit of the parametric shift map to a handful of anchors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::map::{ParametricMap, Polarity, DEFAULT_EDGE_RADIUS};
use crate::error::{Error, Result};
use crate::lsq::{levenberg_marquardt, LmOptions};

const MHZ: f64 = 1e6;
const MM: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnchorKind {
    /// Δf (Hz).
    Shift,
    /// ∂Δf/∂r (Hz/m).
    RadialSlope,
    /// ∂Δf/∂z (Hz/m).
    VerticalSlope,
    /// |∂Δf/∂z| (Hz/m).
    VerticalMagnitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub r: f64,
    pub z: f64,
    pub kind: AnchorKind,
    pub value: f64,
}

impl Anchor {
    pub fn new(r: f64, z: f64, kind: AnchorKind, value: f64) -> Self {
        Anchor { r, z, kind, value }
    }

    /// Model value of this anchor's quantity for a map.
    pub fn evaluate(&self, map: &ParametricMap) -> f64 {
        match self.kind {
            AnchorKind::Shift => map.eval(self.r, self.z),
            AnchorKind::RadialSlope => map.d_dr(self.r, self.z),
            AnchorKind::VerticalSlope => map.d_dz(self.r, self.z),
            AnchorKind::VerticalMagnitude => map.d_dz(self.r, self.z).abs(),
        }
    }

    fn unit(&self) -> f64 {
        match self.kind {
            AnchorKind::Shift => MHZ,
            _ => MHZ / MM,
        }
    }
}

/// Radial slope −50 MHz/mm on contact, 400 MHz/mm height sensitivity and a
/// −120 MHz shift with the magnet at the stub edge.
pub fn default_anchors() -> Vec<Anchor> {
    vec![
        Anchor::new(0.5 * MM, 0.0, AnchorKind::RadialSlope, -50.0 * MHZ / MM),
        Anchor::new(DEFAULT_EDGE_RADIUS, 0.0, AnchorKind::VerticalMagnitude, 400.0 * MHZ / MM),
        Anchor::new(DEFAULT_EDGE_RADIUS, 0.0, AnchorKind::Shift, -120.0 * MHZ),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorResidual {
    pub anchor: Anchor,
    pub model: f64,
    /// `(model − value)/|value|`, or the absolute difference in MHz (MHz/mm) for a zero target.
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapCalibration {
    pub map: ParametricMap,
    pub residuals: Vec<AnchorResidual>,
    /// False when too few anchors were given and the offset was held at zero.
    pub offset_fitted: bool,
    pub iterations: usize,
}

impl MapCalibration {
    pub fn max_relative_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.relative.abs()).fold(0.0, f64::max)
    }
}

fn scale(anchor: &Anchor) -> f64 {
    let v = (anchor.value / anchor.unit()).abs();
    if v > 0.0 {
        v
    } else {
        1.0
    }
}

// p = [S0 (MHz), S1 (MHz/mm), ln(λ/mm), offset (MHz)]
fn unpack(p: &[f64]) -> ParametricMap {
    ParametricMap {
        s0: p[0] * MHZ,
        s1: p[1] * MHZ / MM,
        lambda: p[2].exp() * MM,
        residual_offset: p.get(3).copied().unwrap_or(0.0) * MHZ,
        r_max: 2e-3,
        polarity: Polarity::AboveStub,
    }
}

fn row(anchor: &Anchor, map: &ParametricMap, n: usize) -> (f64, Vec<f64>) {
    let r_mm = anchor.r / MM;
    let z = anchor.z / map.lambda;
    let e = (-z).exp();
    let mag = (map.s0 + map.s1 * anchor.r) / MHZ;
    let lam_mm = map.lambda / MM;
    let s1 = map.s1 / (MHZ / MM);
    // Derivatives of the anchor quantity in its own unit w.r.t. the packed parameters.
    let mut grad = match anchor.kind {
        AnchorKind::Shift => vec![-e, -r_mm * e, -mag * e * z, 1.0],
        AnchorKind::RadialSlope => vec![0.0, -e, -s1 * e * z, 0.0],
        AnchorKind::VerticalSlope | AnchorKind::VerticalMagnitude => {
            vec![e / lam_mm, r_mm * e / lam_mm, mag / lam_mm * e * (z - 1.0), 0.0]
        }
    };
    let mut value = anchor.evaluate(map) / anchor.unit();
    if anchor.kind == AnchorKind::VerticalMagnitude && map.d_dz(anchor.r, anchor.z) < 0.0 {
        grad.iter_mut().for_each(|g| *g = -*g);
    }
    grad.truncate(n);
    let s = scale(anchor);
    value = (value - anchor.value / anchor.unit()) / s;
    (value, grad.into_iter().map(|g| g / s).collect())
}

/// Fits `(S0, S1, λ, residual_offset)` to the anchors.
///
/// Exact duplicates are merged. With exactly three distinct anchors the
/// offset is held at zero; with four or more it is fitted too.
pub fn calibrate_map_anchors(anchors: &[Anchor]) -> Result<MapCalibration> {
    let mut distinct: Vec<Anchor> = Vec::with_capacity(anchors.len());
    for a in anchors {
        if !(a.r.is_finite() && a.z.is_finite() && a.value.is_finite()) || a.r < 0.0 || a.z < 0.0 {
            return Err(Error::Calibration(format!("anchor {a:?} is not a finite point on the stub")));
        }
        if !distinct.contains(a) {
            distinct.push(*a);
        }
    }
    if distinct.len() < 3 {
        return Err(Error::Calibration(format!(
            "at least 3 distinct anchors are needed, got {}",
            distinct.len()
        )));
    }
    let n = if distinct.len() >= 4 { 4 } else { 3 };

    let shift_guess = distinct
        .iter()
        .filter(|a| a.kind == AnchorKind::Shift)
        .map(|a| (a.value / MHZ).abs())
        .fold(0.0, f64::max);
    let slope_guess = distinct
        .iter()
        .find(|a| a.kind == AnchorKind::RadialSlope && a.z == 0.0)
        .map_or(0.0, |a| -a.value / (MHZ / MM));
    let s0_guess = if shift_guess > 0.0 { shift_guess } else { 100.0 };
    let mut x0 = vec![s0_guess, slope_guess, 0.3f64.ln(), 0.0];
    x0.truncate(n);

    let model = |p: &[f64]| {
        let map = unpack(p);
        let mut r = DVector::zeros(distinct.len());
        let mut j = DMatrix::zeros(distinct.len(), n);
        for (i, a) in distinct.iter().enumerate() {
            let (ri, gi) = row(a, &map, n);
            r[i] = ri;
            for (k, g) in gi.into_iter().enumerate() {
                j[(i, k)] = g;
            }
        }
        (r, j)
    };
    let report = levenberg_marquardt(model, &x0, LmOptions::default());

    let jac = &report.jacobian;
    let mut normalized = jac.clone();
    for mut col in normalized.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    let sv = normalized.singular_values();
    let (smin, smax) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    if !(smax > 0.0) || smin / smax < 1e-8 {
        return Err(Error::Calibration(
            "anchors do not determine all map parameters (rank-deficient fit)".into(),
        ));
    }
    if !report.params.iter().all(|p| p.is_finite()) {
        return Err(Error::Calibration("fit diverged".into()));
    }

    let map = unpack(&report.params);
    let residuals = distinct
        .iter()
        .map(|a| {
            let model = a.evaluate(&map);
            let relative = if a.value != 0.0 {
                (model - a.value) / a.value.abs()
            } else {
                model / a.unit()
            };
            AnchorResidual {
                anchor: *a,
                model,
                relative,
            }
        })
        .collect();
    Ok(MapCalibration {
        map,
        residuals,
        offset_fitted: n == 4,
        iterations: report.iterations,
    })
}
