//! Frequency shift Δf(r, z) of the cavity mode versus magnet position.
//!
//! `r` is the magnet centre's radial distance from the stub axis and `z` its
//! levitation height above the stub top, both in metres.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::bisect;

/// Radial coordinate used for "magnet at the stub edge" (m).
pub const DEFAULT_EDGE_RADIUS: f64 = 1.75e-3;

/// Which side of the mode the magnet perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    /// Magnet over the stub top: lengthens the stub, downshifts.
    #[default]
    AboveStub,
    /// Magnet on the cavity floor in the stub–wall gap: shortens the stub, upshifts.
    GapFloor,
}

impl Polarity {
    fn sign(self) -> f64 {
        match self {
            Polarity::AboveStub => 1.0,
            Polarity::GapFloor => -1.0,
        }
    }
}

/// `Δf(r, z) = −(S0 + S1·r)·exp(−z/λ) + offset` (sign flipped for the gap floor).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParametricMap {
    /// On-axis shift magnitude at z = 0 (Hz).
    pub s0: f64,
    /// Radial slope of the shift magnitude (Hz/m).
    pub s1: f64,
    /// Relaxation length toward the bare cavity (m).
    pub lambda: f64,
    /// Shift remaining with the magnet far above the stub (Hz).
    pub residual_offset: f64,
    /// Largest valid radius (m).
    pub r_max: f64,
    pub polarity: Polarity,
}

impl Default for ParametricMap {
    fn default() -> Self {
        Self::reference()
    }
}

fn default_r_max() -> f64 {
    2e-3
}

impl ParametricMap {
    /// Calibration reproducing the room-temperature anchors: a radial slope of
    /// −50 MHz/mm on contact, −120 MHz with the magnet at the 1.75 mm edge, and
    /// a 400 MHz/mm height sensitivity there.
    pub fn reference() -> Self {
        let s1 = 50e6 / 1e-3;
        let edge_shift = 120e6;
        ParametricMap {
            s0: edge_shift - s1 * DEFAULT_EDGE_RADIUS,
            s1,
            lambda: edge_shift / (400e6 / 1e-3),
            residual_offset: 0.0,
            r_max: default_r_max(),
            polarity: Polarity::AboveStub,
        }
    }

    pub fn magnitude(&self, r: f64) -> f64 {
        self.s0 + self.s1 * r
    }

    pub fn eval(&self, r: f64, z: f64) -> f64 {
        -self.polarity.sign() * self.magnitude(r) * (-z / self.lambda).exp() + self.residual_offset
    }

    pub fn d_dz(&self, r: f64, z: f64) -> f64 {
        self.polarity.sign() * self.magnitude(r) / self.lambda * (-z / self.lambda).exp()
    }

    pub fn d_dr(&self, _r: f64, z: f64) -> f64 {
        -self.polarity.sign() * self.s1 * (-z / self.lambda).exp()
    }
}

/// Δf samples on a rectilinear (r, z) grid, bilinearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GriddedMap {
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    /// Row-major with r as the outer index: `df[i * z.len() + j] = Δf(r[i], z[j])`.
    pub df: Vec<f64>,
}

impl GriddedMap {
    pub fn new(r: Vec<f64>, z: Vec<f64>, df: Vec<f64>) -> Result<Self> {
        if r.len() < 2 || z.len() < 2 {
            return Err(Error::format(0, "grid needs at least two points along each axis"));
        }
        if !strictly_increasing(&r) || !strictly_increasing(&z) {
            return Err(Error::format(0, "grid axes must be strictly increasing"));
        }
        if df.len() != r.len() * z.len() {
            return Err(Error::format(0, "sample count does not match the grid"));
        }
        Ok(GriddedMap { r, z, df })
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.df[i * self.z.len() + j]
    }

    fn cell(axis: &[f64], x: f64) -> (usize, f64) {
        let i = match axis.partition_point(|&v| v <= x) {
            0 => 0,
            k => (k - 1).min(axis.len() - 2),
        };
        (i, (x - axis[i]) / (axis[i + 1] - axis[i]))
    }

    fn contains(&self, r: f64, z: f64) -> bool {
        r >= self.r[0] && r <= *self.r.last().unwrap() && z >= self.z[0] && z <= *self.z.last().unwrap()
    }

    pub fn eval(&self, r: f64, z: f64) -> f64 {
        let (i, u) = Self::cell(&self.r, r);
        let (j, v) = Self::cell(&self.z, z);
        (1.0 - u) * (1.0 - v) * self.at(i, j)
            + u * (1.0 - v) * self.at(i + 1, j)
            + (1.0 - u) * v * self.at(i, j + 1)
            + u * v * self.at(i + 1, j + 1)
    }

    pub fn d_dz(&self, r: f64, z: f64) -> f64 {
        let (i, u) = Self::cell(&self.r, r);
        let (j, _) = Self::cell(&self.z, z);
        let dz = self.z[j + 1] - self.z[j];
        ((1.0 - u) * (self.at(i, j + 1) - self.at(i, j)) + u * (self.at(i + 1, j + 1) - self.at(i + 1, j))) / dz
    }
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FrequencyMap {
    Parametric(ParametricMap),
    Gridded(GriddedMap),
}

impl FrequencyMap {
    /// Valid height interval at any radius.
    pub fn z_domain(&self) -> (f64, f64) {
        match self {
            // 40 relaxation lengths leaves the exponential at 4e-18 of its start.
            FrequencyMap::Parametric(p) => (0.0, 40.0 * p.lambda),
            FrequencyMap::Gridded(g) => (g.z[0], *g.z.last().unwrap()),
        }
    }

    pub fn r_domain(&self) -> (f64, f64) {
        match self {
            FrequencyMap::Parametric(p) => (0.0, p.r_max),
            FrequencyMap::Gridded(g) => (g.r[0], *g.r.last().unwrap()),
        }
    }

    fn check_domain(&self, r: f64, z: f64) -> Result<()> {
        let ok = match self {
            FrequencyMap::Parametric(p) => (0.0..=p.r_max).contains(&r) && z >= 0.0 && z.is_finite(),
            FrequencyMap::Gridded(g) => g.contains(r, z),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("({r} m, {z} m) lies outside the map domain")))
        }
    }

    pub fn d_dz(&self, r: f64, z: f64) -> Result<f64> {
        self.check_domain(r, z)?;
        Ok(match self {
            FrequencyMap::Parametric(p) => p.d_dz(r, z),
            FrequencyMap::Gridded(g) => g.d_dz(r, z),
        })
    }

    /// Samples the map on a grid, producing a gridded map.
    pub fn sample(&self, r: &[f64], z: &[f64]) -> Result<GriddedMap> {
        let mut df = Vec::with_capacity(r.len() * z.len());
        for &ri in r {
            for &zj in z {
                df.push(shift_at(self, ri, zj)?);
            }
        }
        GriddedMap::new(r.to_vec(), z.to_vec(), df)
    }
}

pub fn build_shift_map_parametric(s0: f64, s1: f64, lambda: f64, residual_offset: f64) -> Result<FrequencyMap> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("relaxation length must be > 0, got {lambda}")));
    }
    if !(s0.is_finite() && s1.is_finite() && residual_offset.is_finite()) {
        return Err(Error::domain("map parameters must be finite"));
    }
    Ok(FrequencyMap::Parametric(ParametricMap {
        s0,
        s1,
        lambda,
        residual_offset,
        r_max: default_r_max(),
        polarity: Polarity::AboveStub,
    }))
}

/// Δf at `(r, z)`; errors outside the map's domain.
pub fn shift_at(map: &FrequencyMap, r: f64, z: f64) -> Result<f64> {
    map.check_domain(r, z)?;
    Ok(match map {
        FrequencyMap::Parametric(p) => p.eval(r, z),
        FrequencyMap::Gridded(g) => g.eval(r, z),
    })
}

/// Reads a `r_m,z_m,df_hz` table listed with r as the outer loop and z as the inner loop.
pub fn load_shift_map_csv<R: BufRead>(source: R) -> Result<FrequencyMap> {
    let mut rows: Vec<(usize, f64, f64, f64)> = Vec::new();
    let mut header_seen = false;
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::format(lineno, e.to_string()))?;
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        if !header_seen {
            let cols: Vec<&str> = line.trim_start_matches('\u{feff}').split(',').map(str::trim).collect();
            if cols != ["r_m", "z_m", "df_hz"] {
                return Err(Error::format(lineno, format!("expected header r_m,z_m,df_hz, got '{line}'")));
            }
            header_seen = true;
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 3 {
            return Err(Error::format(lineno, format!("expected 3 columns, got {}", cells.len())));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::format(lineno, format!("not a number: '{s}'")))
        };
        rows.push((lineno, parse(cells[0])?, parse(cells[1])?, parse(cells[2])?));
    }
    if !header_seen {
        return Err(Error::NoData("map file is empty".into()));
    }
    if rows.is_empty() {
        return Err(Error::NoData("map file has a header but no samples".into()));
    }

    let r0 = rows[0].1;
    let nz = rows.iter().take_while(|row| row.2.is_finite() && row.1 == r0).count();
    let z: Vec<f64> = rows[..nz].iter().map(|row| row.2).collect();
    if !strictly_increasing(&z) {
        let bad = rows[..nz].windows(2).find(|w| w[1].2 <= w[0].2).map_or(rows[0].0, |w| w[1].0);
        return Err(Error::format(bad, "z axis is not strictly increasing"));
    }
    if rows.len() % nz != 0 {
        let line = rows.last().map_or(0, |row| row.0);
        return Err(Error::format(line, format!(
            "incomplete grid: {} samples is not a multiple of {nz} heights",
            rows.len()
        )));
    }
    let mut r = Vec::with_capacity(rows.len() / nz);
    for (block, chunk) in rows.chunks(nz).enumerate() {
        let ri = chunk[0].1;
        for (j, row) in chunk.iter().enumerate() {
            if row.1 != ri {
                return Err(Error::format(row.0, format!("ragged grid: expected r = {ri}, got {}", row.1)));
            }
            if row.2 != z[j] {
                return Err(Error::format(row.0, format!("ragged grid: expected z = {}, got {}", z[j], row.2)));
            }
        }
        if block > 0 && ri <= r[block - 1] {
            return Err(Error::format(chunk[0].0, "r axis is not strictly increasing"));
        }
        r.push(ri);
    }
    let df = rows.iter().map(|row| row.3).collect();
    let grid = GriddedMap::new(r, z, df).map_err(|e| match e {
        Error::Format { message, .. } => Error::format(rows[0].0, message),
        other => other,
    })?;
    Ok(FrequencyMap::Gridded(grid))
}

/// Writes a gridded map in the layout [`load_shift_map_csv`] reads.
pub fn write_shift_map_csv<W: Write>(grid: &GriddedMap, mut out: W) -> std::io::Result<()> {
    writeln!(out, "r_m,z_m,df_hz")?;
    for (i, r) in grid.r.iter().enumerate() {
        for (j, z) in grid.z.iter().enumerate() {
            writeln!(out, "{r:e},{z:e},{:e}", grid.at(i, j))?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InversionOptions {
    /// Below this |∂Δf/∂z| (Hz/m) the estimate is flagged ill-conditioned.
    pub sensitivity_floor: f64,
    pub height_tol: f64,
}

impl Default for InversionOptions {
    fn default() -> Self {
        InversionOptions {
            // 1 MHz/mm
            sensitivity_floor: 1e9,
            height_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightEstimate {
    pub height: f64,
    /// ∂Δf/∂z at `height` (Hz/m).
    pub sensitivity: f64,
    /// `df_noise / |sensitivity|` (m).
    pub uncertainty: f64,
    /// Set when the sensitivity falls below the configured floor.
    pub warning: Option<String>,
}

/// Height at which the map at radius `r` produces `measured_df`.
pub fn invert_height(
    map: &FrequencyMap,
    measured_df: f64,
    r: f64,
    df_noise: f64,
    opts: &InversionOptions,
) -> Result<HeightEstimate> {
    if !(df_noise >= 0.0) {
        return Err(Error::domain(format!("frequency noise must be >= 0, got {df_noise}")));
    }
    let (z_lo, z_hi) = map.z_domain();
    let f_lo = shift_at(map, r, z_lo)?;
    let f_hi = shift_at(map, r, z_hi)?;
    let (min, max) = if f_lo <= f_hi { (f_lo, f_hi) } else { (f_hi, f_lo) };
    if !(measured_df >= min && measured_df <= max) || (measured_df == f_hi && f_lo != f_hi && matches!(map, FrequencyMap::Parametric(_))) {
        return Err(Error::Inversion {
            message: format!("shift {measured_df} Hz is not reachable at r = {r} m"),
            min,
            max,
        });
    }
    let height = bisect(|z| Ok(shift_at(map, r, z)? - measured_df), z_lo, z_hi, opts.height_tol)?;
    let sensitivity = map.d_dz(r, height)?;
    let uncertainty = if sensitivity == 0.0 { f64::INFINITY } else { df_noise / sensitivity.abs() };
    let warning = (sensitivity.abs() < opts.sensitivity_floor).then(|| {
        format!(
            "ill-conditioned: sensitivity {:.3e} Hz/m is below the floor {:.3e} Hz/m",
            sensitivity.abs(),
            opts.sensitivity_floor
        )
    });
    Ok(HeightEstimate {
        height,
        sensitivity,
        uncertainty,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MHZ: f64 = 1e6;
    const MM: f64 = 1e-3;

    fn reference() -> FrequencyMap {
        FrequencyMap::Parametric(ParametricMap::reference())
    }

    #[test]
    fn reference_anchors() {
        let p = ParametricMap::reference();
        assert!((p.lambda - 0.3 * MM).abs() < 1e-15);
        assert!((p.s1 - 50.0 * MHZ / MM).abs() < 1e-3);
        let map = reference();
        let edge = shift_at(&map, DEFAULT_EDGE_RADIUS, 0.0).unwrap();
        assert!((edge + 120.0 * MHZ).abs() < 1e-3);
        assert!((p.d_dr(0.5 * MM, 0.0) + 50.0 * MHZ / MM).abs() < 1e-6 * 50.0 * MHZ / MM);
        assert!((p.d_dz(DEFAULT_EDGE_RADIUS, 0.0) - 400.0 * MHZ / MM).abs() < 1e-3);
    }

    #[test]
    fn lateral_spread_collapses_with_height() {
        let map = reference();
        let spread = |z: f64| shift_at(&map, DEFAULT_EDGE_RADIUS, z).unwrap() - shift_at(&map, 0.0, z).unwrap();
        let base = spread(0.0).abs();
        for z in [0.7 * MM, 1.0 * MM, 2.0 * MM] {
            assert!(spread(z).abs() < 0.1 * base);
        }
    }

    #[test]
    fn tail_relaxes_to_offset() {
        let map = build_shift_map_parametric(32.5 * MHZ, 50.0 * MHZ / MM, 0.3 * MM, 5.0 * MHZ).unwrap();
        let v = shift_at(&map, DEFAULT_EDGE_RADIUS, 1.5 * MM).unwrap();
        assert!((v - 5.0 * MHZ).abs() < 0.01 * 120.0 * MHZ);
    }

    #[test]
    fn monotone_toward_bare() {
        let map = reference();
        for r in [0.0, 1.0 * MM, DEFAULT_EDGE_RADIUS] {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..50 {
                let v = shift_at(&map, r, i as f64 * 0.05 * MM).unwrap();
                assert!(v > prev && v < 0.0);
                prev = v;
            }
        }
    }

    #[test]
    fn gap_floor_is_flipped() {
        let FrequencyMap::Parametric(mut p) = reference() else { unreachable!() };
        p.polarity = Polarity::GapFloor;
        assert!(p.eval(DEFAULT_EDGE_RADIUS, 0.0) > 0.0);
        assert!((p.eval(DEFAULT_EDGE_RADIUS, 0.0) - 120.0 * MHZ).abs() < 1e-3);
    }

    #[test]
    fn domain_errors() {
        let map = reference();
        assert!(shift_at(&map, -1e-4, 0.0).is_err());
        assert!(shift_at(&map, 3.0 * MM, 0.0).is_err());
        assert!(shift_at(&map, 1.0 * MM, -1e-4).is_err());
        assert!(build_shift_map_parametric(1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn closed_form_inversion() {
        let map = reference();
        let est = invert_height(&map, -30.0 * MHZ, DEFAULT_EDGE_RADIUS, 0.1 * MHZ, &InversionOptions::default()).unwrap();
        assert!((est.height - 0.3 * MM * 4f64.ln()).abs() < 1e-10, "{}", est.height);
        assert!((est.height * 1e3 - 0.416).abs() < 1e-3);
        assert!(est.sensitivity > 0.0);
        assert!((est.uncertainty - 0.1 * MHZ / est.sensitivity).abs() < 1e-18);
        assert!(est.warning.is_none());
    }

    #[test]
    fn inversion_round_trip_and_uncertainty_growth() {
        let map = reference();
        let mut prev_unc = 0.0;
        for i in 0..40 {
            let z = 0.05 * MM + 0.95 * MM * i as f64 / 39.0;
            let df = shift_at(&map, DEFAULT_EDGE_RADIUS, z).unwrap();
            let est = invert_height(&map, df, DEFAULT_EDGE_RADIUS, 0.1 * MHZ, &InversionOptions::default()).unwrap();
            assert!((est.height - z).abs() < 0.01 * z);
            assert!(est.uncertainty > prev_unc);
            prev_unc = est.uncertainty;
        }
    }

    #[test]
    fn inversion_out_of_range() {
        let map = reference();
        let err = invert_height(&map, -200.0 * MHZ, DEFAULT_EDGE_RADIUS, 0.0, &InversionOptions::default()).unwrap_err();
        let Error::Inversion { min, max, .. } = err else { panic!("{err:?}") };
        assert!((min + 120.0 * MHZ).abs() < 1.0 && max <= 0.0);
        assert!(invert_height(&map, 10.0 * MHZ, DEFAULT_EDGE_RADIUS, 0.0, &InversionOptions::default()).is_err());
    }

    #[test]
    fn flat_map_is_flagged() {
        let map = reference();
        let df = shift_at(&map, DEFAULT_EDGE_RADIUS, 3.0 * MM).unwrap();
        let est = invert_height(&map, df, DEFAULT_EDGE_RADIUS, 1e3, &InversionOptions::default()).unwrap();
        assert!(est.warning.is_some());
    }

    #[test]
    fn csv_corners_and_midpoint() {
        let text = "r_m,z_m,df_hz\n0,0,-10\n0,1e-3,-2\n1e-3,0,-20\n1e-3,1e-3,-4\n";
        let map = load_shift_map_csv(text.as_bytes()).unwrap();
        assert_eq!(shift_at(&map, 0.0, 0.0).unwrap(), -10.0);
        assert_eq!(shift_at(&map, 0.0, 1e-3).unwrap(), -2.0);
        assert_eq!(shift_at(&map, 1e-3, 0.0).unwrap(), -20.0);
        assert_eq!(shift_at(&map, 1e-3, 1e-3).unwrap(), -4.0);
        assert_eq!(shift_at(&map, 0.5e-3, 0.5e-3).unwrap(), (-10.0 - 2.0 - 20.0 - 4.0) / 4.0);
        let crlf = text.replace('\n', "\r\n");
        assert_eq!(load_shift_map_csv(crlf.as_bytes()).unwrap(), map);
    }

    #[test]
    fn csv_format_errors() {
        let ragged = "r_m,z_m,df_hz\n0,0,1\n0,1,2\n1,0,3\n";
        assert!(matches!(load_shift_map_csv(ragged.as_bytes()), Err(Error::Format { line: 4, .. })));
        let wrong_z = "r_m,z_m,df_hz\n0,0,1\n0,1,2\n1,0,3\n1,2,4\n";
        assert!(matches!(load_shift_map_csv(wrong_z.as_bytes()), Err(Error::Format { line: 5, .. })));
        let non_monotone_r = "r_m,z_m,df_hz\n1,0,1\n1,1,2\n0,0,3\n0,1,4\n";
        assert!(matches!(load_shift_map_csv(non_monotone_r.as_bytes()), Err(Error::Format { line: 4, .. })));
        let non_monotone_z = "r_m,z_m,df_hz\n0,1,1\n0,0,2\n";
        assert!(matches!(load_shift_map_csv(non_monotone_z.as_bytes()), Err(Error::Format { .. })));
        let header = "r,z,df\n0,0,1\n";
        assert!(matches!(load_shift_map_csv(header.as_bytes()), Err(Error::Format { line: 1, .. })));
        let nan = "r_m,z_m,df_hz\n0,0,x\n";
        assert!(matches!(load_shift_map_csv(nan.as_bytes()), Err(Error::Format { line: 2, .. })));
        assert!(matches!(load_shift_map_csv("".as_bytes()), Err(Error::NoData(_))));
    }

    #[test]
    fn sampled_map_reproduces_parametric() {
        let map = reference();
        let r: Vec<f64> = (0..50).map(|i| 2.0 * MM * i as f64 / 49.0).collect();
        let z: Vec<f64> = (0..50).map(|i| 1.0 * MM * i as f64 / 49.0).collect();
        let grid = map.sample(&r, &z).unwrap();
        let mut buf = Vec::new();
        write_shift_map_csv(&grid, &mut buf).unwrap();
        let loaded = load_shift_map_csv(buf.as_slice()).unwrap();
        // Compare at cell centres, where bilinear error is largest, relative
        // to the z = 0 edge shift.
        let scale = 120.0 * MHZ;
        for i in 0..49 {
            for j in 0..49 {
                let rr = 0.5 * (r[i] + r[i + 1]);
                let zz = 0.5 * (z[j] + z[j + 1]);
                let a = shift_at(&loaded, rr, zz).unwrap();
                let b = shift_at(&map, rr, zz).unwrap();
                assert!((a - b).abs() < 0.01 * scale.max(b.abs()), "({rr},{zz}) {a} vs {b}");
            }
        }
    }
}
