//! Response-loop model of a finite superconducting disc.
//!
//! The disc's top face is represented by concentric filaments at z = 0. Each
//! superconducting filament carries whatever current keeps the net flux
//! through it at zero, given the magnet's flux and every other filament's.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::{magnet_loop, SuperconductorDisc};
use crate::error::{Error, Result};
use crate::magnetostatics::{
    grad_mutual_inductance, mutual_inductance_coaxial, mutual_inductance_neumann,
    self_inductance_loop, Axis, Loop, Magnet,
};

/// Concentric response loops with their inductance matrix and a mask of
/// which loops are superconducting.
#[derive(Debug, Clone)]
pub struct ResponseArray {
    loops: Vec<Loop>,
    inductance: DMatrix<f64>,
    active: Vec<bool>,
}

impl ResponseArray {
    pub fn loops(&self) -> &[Loop] {
        &self.loops
    }

    pub fn inductance_matrix(&self) -> &DMatrix<f64> {
        &self.inductance
    }

    pub fn active_mask(&self) -> &[bool] {
        &self.active
    }

    pub fn len(&self) -> usize {
        self.loops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Same loops and matrix with a different superconducting mask.
    pub fn with_mask(&self, active: Vec<bool>) -> Result<Self> {
        if active.len() != self.loops.len() {
            return Err(Error::param(format!(
                "mask length {} does not match {} loops",
                active.len(),
                self.loops.len()
            )));
        }
        Ok(ResponseArray {
            active,
            ..self.clone()
        })
    }

    /// Marks a loop normal when `is_normal(radius)` holds.
    pub fn masked_by<F: Fn(f64) -> bool>(&self, is_normal: F) -> Self {
        let active = self.loops.iter().map(|l| !is_normal(l.radius)).collect();
        ResponseArray {
            active,
            ..self.clone()
        }
    }
}

/// Builds `loop_count` loops at radii `(j − ½)·R/N`. Diagonal entries are
/// thin-loop self-inductances with an effective wire radius of half the
/// radial spacing; off-diagonals are coaxial mutual inductances.
pub fn build_response_array(disc: &SuperconductorDisc) -> Result<ResponseArray> {
    disc.validate()?;
    let n = disc.loop_count;
    let spacing = disc.radius / n as f64;
    let wire_radius = 0.5 * spacing;
    let loops = (0..n)
        .map(|j| Loop::coaxial((j as f64 + 0.5) * spacing, 0.0))
        .collect::<Result<Vec<_>>>()?;

    let mut inductance = DMatrix::zeros(n, n);
    for i in 0..n {
        inductance[(i, i)] = diagonal_inductance(loops[i].radius, wire_radius)?;
        for j in 0..i {
            let m = mutual_inductance_coaxial(loops[i].radius, loops[j].radius, 0.0)?;
            inductance[(i, j)] = m;
            inductance[(j, i)] = m;
        }
    }
    if Cholesky::new(inductance.clone()).is_none() {
        return Err(Error::Discretization(format!(
            "inductance matrix for {n} loops is not positive-definite; use fewer loops"
        )));
    }
    Ok(ResponseArray {
        loops,
        inductance,
        active: vec![true; n],
    })
}

/// Thin-loop self-inductance for the array diagonal. The innermost loop sits
/// at r = s/2, where half the spacing would equal its own radius and the
/// thin-loop formula collapses to μ0·a·(ln 8 − 2), small enough to make the
/// matrix indefinite; that loop alone gets an effective wire radius of a/2.
fn diagonal_inductance(radius: f64, wire_radius: f64) -> Result<f64> {
    self_inductance_loop(radius, wire_radius.min(0.5 * radius))
}

/// Factorized inductance matrix restricted to the superconducting loops.
#[derive(Debug, Clone)]
pub struct Screening {
    active: Vec<usize>,
    total: usize,
    sub: DMatrix<f64>,
    chol: Option<Cholesky<f64, Dyn>>,
    condition: f64,
}

impl Screening {
    pub fn new(array: &ResponseArray) -> Result<Self> {
        let active: Vec<usize> = (0..array.len()).filter(|&i| array.active[i]).collect();
        let k = active.len();
        let sub = DMatrix::from_fn(k, k, |i, j| array.inductance[(active[i], active[j])]);
        let (chol, condition) = if k == 0 {
            (None, 1.0)
        } else {
            let diag = sub.diagonal();
            let condition = diag.max() / diag.min();
            match Cholesky::new(sub.clone()) {
                Some(c) => {
                    // Squared ratio of Cholesky pivots bounds the condition number from below.
                    let l = c.l_dirty().diagonal();
                    let ratio = l.max() / l.min();
                    (Some(c), condition.max(ratio * ratio))
                }
                None => {
                    return Err(Error::LinearAlgebra {
                        message: format!("active inductance sub-matrix ({k} loops) is not positive-definite"),
                        condition,
                    })
                }
            }
        };
        Ok(Screening {
            active,
            total: array.len(),
            sub,
            chol,
            condition,
        })
    }

    pub fn active_indices(&self) -> &[usize] {
        &self.active
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    /// Solves `L·I = −Φ` on the active loops. `flux` holds one entry per
    /// active loop; the result is likewise per active loop.
    pub fn currents(&self, flux: &DVector<f64>) -> DVector<f64> {
        match &self.chol {
            Some(c) => -c.solve(flux),
            None => DVector::zeros(0),
        }
    }

    /// `‖L·I + Φ‖ / ‖Φ‖` for a solved current vector.
    pub fn residual(&self, flux: &DVector<f64>, currents: &DVector<f64>) -> f64 {
        let norm = flux.norm();
        if norm == 0.0 {
            return 0.0;
        }
        (&self.sub * currents + flux).norm() / norm
    }

    fn scatter(&self, active_values: &DVector<f64>) -> Vec<f64> {
        let mut full = vec![0.0; self.total];
        for (k, &i) in self.active.iter().enumerate() {
            full[i] = active_values[k];
        }
        full
    }
}

fn mutual_to(array_loop: &Loop, source: &Loop) -> Result<f64> {
    if source.lateral_offset == 0.0 {
        mutual_inductance_coaxial(source.radius, array_loop.radius, source.axial_position - array_loop.axial_position)
    } else {
        mutual_inductance_neumann(source, array_loop)
    }
}

/// Per-active-loop source flux `Φ_j = M(source, loop_j)·I_source`.
fn source_flux(array: &ResponseArray, screening: &Screening, source: &Loop) -> Result<DVector<f64>> {
    let values = screening
        .active
        .iter()
        .map(|&i| Ok(mutual_to(&array.loops[i], source)? * source.current))
        .collect::<Result<Vec<f64>>>()?;
    Ok(DVector::from_vec(values))
}

/// Screening currents that null the flux through every superconducting loop.
///
/// Returns one current per loop; normal loops carry exactly zero.
pub fn solve_screening_currents(array: &ResponseArray, magnet_loop: &Loop) -> Result<Vec<f64>> {
    magnet_loop.validate()?;
    let screening = Screening::new(array)?;
    let flux = source_flux(array, &screening, magnet_loop)?;
    let currents = screening.currents(&flux);
    let residual = screening.residual(&flux, &currents);
    if residual > 1e-10 {
        return Err(Error::LinearAlgebra {
            message: format!("flux-null residual {residual:.3e} exceeds 1e-10"),
            condition: screening.condition,
        });
    }
    Ok(screening.scatter(&currents))
}

/// Force on the magnet, `(axial, lateral)` in newtons.
///
/// `F = I_m·Σ_j I_j·∂M_mj/∂x`, with the magnet represented by its equivalent
/// loop at height `z` and horizontal offset `lateral_offset`. Axial force is
/// positive upward (repulsive).
pub fn levitation_force(array: &ResponseArray, magnet: &Magnet, z: f64, lateral_offset: f64) -> Result<(f64, f64)> {
    let screening = Screening::new(array)?;
    force_with(array, &screening, magnet, z, lateral_offset)
}

pub(crate) fn force_with(
    array: &ResponseArray,
    screening: &Screening,
    magnet: &Magnet,
    z: f64,
    lateral_offset: f64,
) -> Result<(f64, f64)> {
    if !(z > 0.0) {
        return Err(Error::domain(format!("height must be > 0, got {z}")));
    }
    let source = magnet_loop(magnet, z, lateral_offset)?;
    if screening.active.is_empty() {
        return Ok((0.0, 0.0));
    }
    let flux = source_flux(array, screening, &source)?;
    let currents = screening.currents(&flux);

    // Gradients are taken with the response loop as the moving member, so
    // flip the sign: moving the magnet up equals moving the loop down.
    let mut axial = 0.0;
    let mut lateral = 0.0;
    for (k, &i) in screening.active.iter().enumerate() {
        let g = grad_mutual_inductance(&array.loops[i], &source, Axis::Axial)?;
        axial += currents[k] * g.value;
        if lateral_offset > 0.0 {
            let g = grad_mutual_inductance(&array.loops[i], &source, Axis::Lateral)?;
            lateral += currents[k] * g.value;
        }
    }
    // On axis the lateral force vanishes identically by symmetry.
    Ok((source.current * axial, source.current * lateral))
}

/// Magnetic energy `½·Φᵀ L⁻¹ Φ` stored in the screening currents.
pub(crate) fn magnetic_energy(array: &ResponseArray, screening: &Screening, magnet: &Magnet, z: f64) -> Result<f64> {
    if screening.active.is_empty() {
        return Ok(0.0);
    }
    let source = magnet_loop(magnet, z, 0.0)?;
    let flux = source_flux(array, screening, &source)?;
    let currents = screening.currents(&flux);
    Ok(-0.5 * flux.dot(&currents))
}

/// Sampled axial force and potential versus height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcePotentialCurve {
    /// Heights (m), strictly increasing.
    pub z_grid: Vec<f64>,
    /// Magnetic axial force (N).
    pub force: Vec<f64>,
    /// Magnetic energy ½ΦᵀL⁻¹Φ (J).
    pub magnetic_potential: Vec<f64>,
    /// Total potential, magnetic plus M·g·z (J).
    pub potential: Vec<f64>,
}

impl ForcePotentialCurve {
    /// Potential rebuilt by trapezoidal integration of −force from the top of
    /// the grid, anchored to the sampled magnetic energy there, plus gravity.
    pub fn integrated_potential(&self, weight: f64) -> Vec<f64> {
        let n = self.z_grid.len();
        let mut magnetic = vec![0.0; n];
        magnetic[n - 1] = self.magnetic_potential[n - 1];
        for i in (0..n - 1).rev() {
            let dz = self.z_grid[i + 1] - self.z_grid[i];
            magnetic[i] = magnetic[i + 1] + 0.5 * dz * (self.force[i] + self.force[i + 1]);
        }
        magnetic
            .iter()
            .zip(&self.z_grid)
            .map(|(u, z)| u + weight * z)
            .collect()
    }

    /// Second-order derivative of the magnetic potential on the (possibly
    /// non-uniform) grid; one-sided at the ends.
    pub fn magnetic_potential_gradient(&self) -> Vec<f64> {
        let z = &self.z_grid;
        let u = &self.magnetic_potential;
        let n = z.len();
        (0..n)
            .map(|i| {
                let (a, b, c) = if i == 0 {
                    (0, 1, 2)
                } else if i == n - 1 {
                    (n - 3, n - 2, n - 1)
                } else {
                    (i - 1, i, i + 1)
                };
                // Derivative of the Lagrange interpolant through three points at z[i].
                let x = z[i];
                let (za, zb, zc) = (z[a], z[b], z[c]);
                u[a] * ((x - zb) + (x - zc)) / ((za - zb) * (za - zc))
                    + u[b] * ((x - za) + (x - zc)) / ((zb - za) * (zb - zc))
                    + u[c] * ((x - za) + (x - zb)) / ((zc - za) * (zc - zb))
            })
            .collect()
    }
}

/// Samples force and potential on `samples` evenly spaced heights over `z_range`.
pub fn potential_curve(
    array: &ResponseArray,
    magnet: &Magnet,
    z_range: (f64, f64),
    samples: usize,
) -> Result<ForcePotentialCurve> {
    let (lo, hi) = z_range;
    if !(lo > 0.0 && hi > lo && hi <= 10e-3 + 1e-15) {
        return Err(Error::domain(format!(
            "z range must lie within (0, 10 mm] and be increasing, got [{lo}, {hi}]"
        )));
    }
    if samples < 16 {
        return Err(Error::domain(format!("need at least 16 samples, got {samples}")));
    }
    let screening = Screening::new(array)?;
    let weight = magnet.weight();
    let mut curve = ForcePotentialCurve {
        z_grid: Vec::with_capacity(samples),
        force: Vec::with_capacity(samples),
        magnetic_potential: Vec::with_capacity(samples),
        potential: Vec::with_capacity(samples),
    };
    for i in 0..samples {
        let z = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
        let (fz, _) = force_with(array, &screening, magnet, z, 0.0)?;
        let u = magnetic_energy(array, &screening, magnet, z)?;
        curve.z_grid.push(z);
        curve.force.push(fz);
        curve.magnetic_potential.push(u);
        curve.potential.push(u + weight * z);
    }
    Ok(curve)
}
