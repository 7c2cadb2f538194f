//! Force balance against gravity, with the optional critical-field mask.

use serde::{Deserialize, Serialize};

use super::image::image_force;
use super::response::{build_response_array, force_with, ResponseArray, Screening};
use super::{critical_field, Equilibrium, SuperconductorDisc};
use crate::error::{Error, Result};
use crate::magnetostatics::{dipole_field, Magnet};
use crate::roots::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "image")]
    Image,
    #[serde(rename = "two-loop")]
    TwoLoop,
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "image" => Ok(Model::Image),
            "two-loop" | "two_loop" | "loop" => Ok(Model::TwoLoop),
            other => Err(Error::param(format!("unknown model '{other}' (expected image|two-loop)"))),
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::Image => "image",
            Model::TwoLoop => "two-loop",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    /// Grid points used to bracket roots of F(z) − Mg.
    pub scan_points: usize,
    /// Upper end of the height bracket (m).
    pub z_max: f64,
    /// Bisection tolerance on the height (m).
    pub height_tol: f64,
    pub damping: f64,
    pub max_fixed_point_iters: usize,
    /// Convergence tolerance of the critical-field fixed point (m).
    pub fixed_point_tol: f64,
    /// Bisection tolerance on the onset temperature (K).
    pub onset_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            scan_points: 200,
            z_max: 10e-3,
            height_tol: 1e-9,
            damping: 0.5,
            max_fixed_point_iters: 100,
            fixed_point_tol: 1e-6,
            onset_tol: 1e-3,
        }
    }
}

/// Resting configuration: the magnet's centre sits half its height above the stub.
fn rest_height(magnet: &Magnet) -> f64 {
    0.5 * magnet.height
}

/// Loops whose local dipole field exceeds B_c(T) are normal.
fn mask_for(array: &ResponseArray, magnet: &Magnet, z: f64, temperature: f64, disc: &SuperconductorDisc) -> ResponseArray {
    let bc = critical_field(temperature, disc);
    let m = magnet.moment();
    array.masked_by(|r| dipole_field(m, r, z).map(|b| b > bc).unwrap_or(true))
}

/// Largest stable root of `F(z) − Mg` on `[lo, hi]`, or `None` if the force never reaches the weight.
fn largest_stable_root<F>(mut net: F, lo: f64, hi: f64, opts: &SolverOptions) -> Result<Option<(f64, usize)>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let n = opts.scan_points.max(2);
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let values = grid.iter().map(|&z| net(z)).collect::<Result<Vec<f64>>>()?;
    if values.iter().all(|&v| v > 0.0) {
        return Err(Error::Convergence(format!(
            "magnetic force exceeds the weight over the whole bracket up to {hi} m"
        )));
    }
    // A stable crossing goes from net repulsion to net attraction as z rises.
    let Some(i) = (0..n - 1).rev().find(|&i| values[i] >= 0.0 && values[i + 1] < 0.0) else {
        return Ok(None);
    };
    let root = bisect(&mut net, grid[i], grid[i + 1], opts.height_tol)?;
    Ok(Some((root, n)))
}

fn slope<F: FnMut(f64) -> Result<f64>>(mut f: F, z: f64) -> Result<f64> {
    let h = (1e-4 * z).max(1e-7);
    Ok((f(z + h)? - f(z - h)?) / (2.0 * h))
}

/// Equilibrium height of the magnet for the chosen model.
///
/// With a temperature, loops under the magnet whose field exceeds B_c(T)
/// are excluded, and the height is iterated to self-consistency starting
/// from the resting position.
pub fn equilibrium_height(
    model: Model,
    magnet: &Magnet,
    disc: &SuperconductorDisc,
    temperature: Option<f64>,
    opts: &SolverOptions,
) -> Result<Equilibrium> {
    magnet.validate()?;
    disc.validate()?;
    let weight = magnet.weight();
    let lo = rest_height(magnet);
    let hi = opts.z_max;
    match model {
        Model::Image => {
            let m = magnet.moment();
            if m.magnitude() == 0.0 {
                return Err(Error::NoLevitation(format!("magnet {} has zero moment", magnet.label)));
            }
            let net = |z: f64| Ok(image_force(m, z)? - weight);
            let (height, iterations) = largest_stable_root(net, lo, hi, opts)?.ok_or_else(|| {
                Error::NoLevitation(format!("image force below the weight of {} above {lo} m", magnet.label))
            })?;
            let stable = slope(|z| image_force(m, z), height)? < 0.0;
            Ok(Equilibrium {
                height,
                stable,
                residual_force: image_force(m, height)? - weight,
                iterations,
            })
        }
        Model::TwoLoop => {
            let array = build_response_array(disc)?;
            match temperature {
                None => two_loop_root(&array, magnet, lo, hi, opts)?
                    .ok_or_else(|| no_levitation(magnet, None)),
                Some(t) => {
                    if t < 0.0 {
                        return Err(Error::domain(format!("temperature must be >= 0, got {t}")));
                    }
                    self_consistent(&array, magnet, disc, t, opts)
                }
            }
        }
    }
}

fn no_levitation(magnet: &Magnet, temperature: Option<f64>) -> Error {
    match temperature {
        Some(t) => Error::NoLevitation(format!(
            "screening force on {} stays below its weight at T = {t} K",
            magnet.label
        )),
        None => Error::NoLevitation(format!("screening force on {} stays below its weight", magnet.label)),
    }
}

fn two_loop_root(
    array: &ResponseArray,
    magnet: &Magnet,
    lo: f64,
    hi: f64,
    opts: &SolverOptions,
) -> Result<Option<Equilibrium>> {
    let screening = Screening::new(array)?;
    if screening.active_indices().is_empty() {
        return Ok(None);
    }
    let weight = magnet.weight();
    let force = |z: f64| Ok(force_with(array, &screening, magnet, z, 0.0)?.0);
    let Some((height, evals)) = largest_stable_root(|z| Ok(force(z)? - weight), lo, hi, opts)? else {
        return Ok(None);
    };
    let stable = slope(force, height)? < 0.0;
    Ok(Some(Equilibrium {
        height,
        stable,
        residual_force: force(height)? - weight,
        iterations: evals,
    }))
}

fn self_consistent(
    array: &ResponseArray,
    magnet: &Magnet,
    disc: &SuperconductorDisc,
    temperature: f64,
    opts: &SolverOptions,
) -> Result<Equilibrium> {
    let rest = rest_height(magnet);
    let mut z = rest;
    for iteration in 1..=opts.max_fixed_point_iters {
        let masked = mask_for(array, magnet, z, temperature, disc);
        let target = two_loop_root(&masked, magnet, rest, opts.z_max, opts)?;
        let target_z = target.map_or(rest, |e| e.height);
        let next = z + opts.damping * (target_z - z);
        if (next - z).abs() < opts.fixed_point_tol {
            let Some(eq) = target else {
                return Err(no_levitation(magnet, Some(temperature)));
            };
            // Settle on the root of the mask at the converged height.
            return Ok(Equilibrium {
                iterations: iteration,
                ..eq
            });
        }
        z = next;
    }
    Err(Error::Convergence(format!(
        "critical-field fixed point did not settle within {} iterations (last height {z} m)",
        opts.max_fixed_point_iters
    )))
}

/// Highest temperature below T_c at which the screening force on the resting
/// magnet, with the normal spot excluded, reaches its weight.
pub fn onset_temperature(magnet: &Magnet, disc: &SuperconductorDisc, opts: &SolverOptions) -> Result<f64> {
    magnet.validate()?;
    disc.validate()?;
    let array = build_response_array(disc)?;
    let z = rest_height(magnet);
    let weight = magnet.weight();
    let lifts = |t: f64| -> Result<bool> {
        let masked = mask_for(&array, magnet, z, t, disc);
        let screening = Screening::new(&masked)?;
        Ok(force_with(&masked, &screening, magnet, z, 0.0)?.0 >= weight)
    };
    if !lifts(0.0)? {
        return Err(Error::NoOnset(format!(
            "{} does not lift off even at T = 0",
            magnet.label
        )));
    }
    let (mut lo, mut hi) = (0.0, disc.tc);
    while hi - lo > opts.onset_tol {
        let mid = 0.5 * (lo + hi);
        if lifts(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
