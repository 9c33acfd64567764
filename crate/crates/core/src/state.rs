//! Density/action states, effective wavefunctions, and initial-state constructors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::stencil::d1;

/// Normalization tolerance for constructed and loaded states.
pub const NORM_TOL: f64 = 1e-9;
/// Largest Gaussian mass allowed outside the box.
pub const TAIL_LIMIT: f64 = 1e-10;
/// Minimum resolution of a Gaussian width, in grid spacings.
pub const MIN_SIGMA_CELLS: f64 = 3.0;

/// Density ρ and action S = Σ_d k0_d·x_d + s_residual(x) at time `t`.
///
/// The linear background carries the winding of plane-wave-like phases,
/// which a single-valued periodic field cannot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroState {
    pub t: f64,
    pub rho: Vec<f64>,
    pub s_residual: Vec<f64>,
    pub k0: Vec<f64>,
}

impl HydroState {
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        grid.check_field("rho", self.rho.len())?;
        grid.check_field("s_residual", self.s_residual.len())?;
        if self.k0.len() != grid.ndim() {
            return Err(Error::InvalidState(format!(
                "k0 has {} entries for a {}-dimensional grid",
                self.k0.len(),
                grid.ndim()
            )));
        }
        if let Some(i) = self.rho.iter().position(|&r| !(r >= 0.0 && r.is_finite())) {
            return Err(Error::InvalidState(format!(
                "rho[{i}] = {} is negative or non-finite",
                self.rho[i]
            )));
        }
        if let Some(i) = self.s_residual.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidState(format!("s_residual[{i}] is non-finite")));
        }
        let norm = self.norm(grid);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(())
    }

    pub fn norm(&self, grid: &GridSpec) -> f64 {
        grid.integrate(&self.rho)
    }

    /// ∂S/∂x_axis, background included.
    pub fn action_gradient(&self, grid: &GridSpec, axis: usize) -> Vec<f64> {
        let k = self.k0[axis];
        d1(&self.s_residual, grid, axis)
            .into_iter()
            .map(|v| v + k)
            .collect()
    }

    /// S reassembled at every grid point.
    pub fn full_action(&self, grid: &GridSpec) -> Vec<f64> {
        (0..grid.len())
            .map(|k| {
                self.s_residual[k]
                    + self
                        .k0
                        .iter()
                        .enumerate()
                        .map(|(a, &ka)| ka * grid.coord(k, a))
                        .sum::<f64>()
            })
            .collect()
    }
}

/// Complex field ψ on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub psi: Vec<Complex64>,
}

impl ComplexField {
    pub fn norm(&self, grid: &GridSpec) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.cell_volume()
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Normalized, periodically wrapped Gaussian density with linear phase p0.
///
/// `k0` is set to `p0` as given; it is not snapped to the grid.
pub fn sample_gaussian(
    grid: &GridSpec,
    center: &[f64],
    sigma: &[f64],
    p0: &[f64],
) -> Result<HydroState> {
    let d = grid.ndim();
    for (what, v) in [("center", center), ("sigma", sigma), ("p0", p0)] {
        if v.len() != d {
            return Err(Error::InvalidParams(format!(
                "{what} has {} entries for a {d}-dimensional grid",
                v.len()
            )));
        }
    }
    let mut inside = 1.0;
    for (axis, &s) in sigma.iter().enumerate() {
        let min = MIN_SIGMA_CELLS * grid.spacing(axis);
        if !(s >= min) {
            return Err(Error::UnderResolved {
                axis,
                sigma: s,
                min,
            });
        }
        let half = 0.5 * grid.dim(axis).length();
        inside *= 1.0 - erfc(half / (s * std::f64::consts::SQRT_2));
    }
    let outside = 1.0 - inside;
    if outside > TAIL_LIMIT {
        return Err(Error::TailTruncation {
            mass: outside,
            limit: TAIL_LIMIT,
        });
    }

    let mut rho: Vec<f64> = (0..grid.len())
        .map(|k| {
            let e: f64 = (0..d)
                .map(|a| {
                    let x = grid.dim(a).wrap_around(grid.coord(k, a), center[a]) - center[a];
                    x * x / (2.0 * sigma[a] * sigma[a])
                })
                .sum();
            (-e).exp()
        })
        .collect();
    normalize(&mut rho, grid);
    Ok(HydroState {
        t: 0.0,
        rho,
        s_residual: vec![0.0; grid.len()],
        k0: p0.to_vec(),
    })
}

/// Record of a wavevector rounded to the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KSnap {
    pub requested: Vec<f64>,
    pub snapped: Vec<f64>,
}

/// Nearest k with k·L a multiple of 2π·`unit`.
pub fn commensurate_k(k: f64, length: f64, unit: f64) -> f64 {
    let q = 2.0 * std::f64::consts::PI * unit / length;
    (k / q).round() * q
}

/// Uniform density with momentum p0 snapped so that e^{i p0·x} is periodic.
pub fn plane_wave(grid: &GridSpec, p0: &[f64]) -> Result<(HydroState, KSnap)> {
    if p0.len() != grid.ndim() {
        return Err(Error::InvalidParams(format!(
            "p0 has {} entries for a {}-dimensional grid",
            p0.len(),
            grid.ndim()
        )));
    }
    let snapped: Vec<f64> = p0
        .iter()
        .enumerate()
        .map(|(a, &p)| commensurate_k(p, grid.dim(a).length(), 1.0))
        .collect();
    if snapped != p0 {
        log::info!("plane wave k0 snapped from {p0:?} to {snapped:?}");
    }
    let mut rho = vec![1.0; grid.len()];
    normalize(&mut rho, grid);
    Ok((
        HydroState {
            t: 0.0,
            rho,
            s_residual: vec![0.0; grid.len()],
            k0: snapped.clone(),
        },
        KSnap {
            requested: p0.to_vec(),
            snapped,
        },
    ))
}

pub(crate) fn normalize(rho: &mut [f64], grid: &GridSpec) {
    let n = grid.integrate(rho);
    rho.iter_mut().for_each(|r| *r /= n);
}
