//! Wavefunction-level reference: the map ψ = √ρ·e^{iS/λ} and a Strang-split
//! spectral propagator for iλ∂ψ/∂t = −Σ_d (λ²/2m_d)∂_d²ψ + Uψ.
//!
//! The propagator shares nothing with the finite-difference solver beyond the
//! grid and potential values, so agreement between the two is a real check.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::params::{uniform_lambda, DofParams};
use crate::potential::PotentialSpec;
use crate::state::{commensurate_k, ComplexField, HydroState};

/// |ψ|²/max|ψ|² below which the phase is treated as undefined.
pub const NODE_FLOOR: f64 = 1e-12;

/// The shared λ of `dofs`, which must be positive.
pub fn wavefunction_lambda(dofs: &[DofParams]) -> Result<f64> {
    let lambda = uniform_lambda(dofs).ok_or(Error::NonUniformLambda)?;
    if lambda <= 0.0 {
        return Err(Error::ZeroLambda);
    }
    Ok(lambda)
}

pub fn to_wavefunction(state: &HydroState, grid: &GridSpec, lambda: f64) -> Result<ComplexField> {
    if !(lambda > 0.0) {
        return Err(Error::ZeroLambda);
    }
    state.validate(grid)?;
    let s = state.full_action(grid);
    let psi = state
        .rho
        .iter()
        .zip(&s)
        .map(|(&r, &s)| Complex64::from_polar(r.sqrt(), s / lambda))
        .collect();
    Ok(ComplexField { psi })
}

fn wrap_phase(d: f64) -> f64 {
    let w = (d + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Inverse of [`to_wavefunction`] for nodeless ψ.
///
/// The phase is unwrapped along axis 0 from the first grid point, then along
/// axis 1 from that line, then axis 2. The 2π branch at the first point keeps
/// its `s_residual` within (−πλ, πλ]. Each `k0_d` is the value nearest to
/// `k0_hint[d]` for which e^{i k0_d x_d/λ} is periodic; the rest of the
/// action goes into `s_residual`.
pub fn from_wavefunction(
    psi: &ComplexField,
    grid: &GridSpec,
    lambda: f64,
    k0_hint: &[f64],
) -> Result<HydroState> {
    if !(lambda > 0.0) {
        return Err(Error::ZeroLambda);
    }
    grid.check_field("psi", psi.psi.len())?;
    if k0_hint.len() != grid.ndim() {
        return Err(Error::InvalidParams(format!(
            "k0_hint has {} entries for a {}-dimensional grid",
            k0_hint.len(),
            grid.ndim()
        )));
    }
    let rho: Vec<f64> = psi.density();
    let max = rho.iter().copied().fold(0.0, f64::max);
    if let Some(index) = rho.iter().position(|&r| !(r > NODE_FLOOR * max)) {
        return Err(Error::NodeDetected { index });
    }

    let k0: Vec<f64> = k0_hint
        .iter()
        .enumerate()
        .map(|(a, &k)| commensurate_k(k, grid.dim(a).length(), lambda))
        .collect();
    let background = |flat: usize| -> f64 {
        k0.iter()
            .enumerate()
            .map(|(a, &ka)| ka * grid.coord(flat, a))
            .sum()
    };

    let arg: Vec<f64> = psi.psi.iter().map(|z| z.arg()).collect();
    let mut phase = vec![0.0; grid.len()];
    let a0 = arg[0];
    phase[0] = a0 + 2.0 * PI * ((background(0) / lambda - a0) / (2.0 * PI)).round();
    for axis in 0..grid.ndim() {
        let n = grid.dim(axis).n_points;
        for start in 0..grid.len() {
            let on_line = (axis..grid.ndim()).all(|b| grid.axis_index(start, b) == 0);
            if !on_line {
                continue;
            }
            let mut prev = start;
            for _ in 1..n {
                let next = grid.neighbor(prev, axis, 1);
                phase[next] = phase[prev] + wrap_phase(arg[next] - arg[prev]);
                prev = next;
            }
        }
    }

    let mut rho = rho;
    let norm = grid.integrate(&rho);
    rho.iter_mut().for_each(|r| *r /= norm);
    let s_residual = (0..grid.len())
        .map(|k| lambda * phase[k] - background(k))
        .collect();
    Ok(HydroState {
        t: 0.0,
        rho,
        s_residual,
        k0,
    })
}

/// Strang-split propagator with precomputed phase factors.
pub struct SplitStep {
    grid: GridSpec,
    half_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for SplitStep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SplitStep").field("grid", &self.grid).finish_non_exhaustive()
    }
}

/// Angular wavenumbers in FFT order for an axis of `n` points and length `l`.
fn wavenumbers(n: usize, l: f64) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            2.0 * PI * m / l
        })
        .collect()
}

impl SplitStep {
    pub fn new(grid: &GridSpec, dofs: &[DofParams], potential: &PotentialSpec, dt: f64) -> Result<Self> {
        if dofs.len() != grid.ndim() {
            return Err(Error::InvalidParams(format!(
                "{} dofs for a {}-dimensional grid",
                dofs.len(),
                grid.ndim()
            )));
        }
        let lambda = wavefunction_lambda(dofs)?;
        for (axis, d) in grid.dims().iter().enumerate() {
            if d.n_points % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: spectral propagation needs an even point count, got {}",
                    d.n_points
                )));
            }
        }
        let u = potential.evaluate(grid)?;
        let half_potential = u
            .iter()
            .map(|&u| Complex64::from_polar(1.0, -u * dt / (2.0 * lambda)))
            .collect();

        let ks: Vec<Vec<f64>> = grid
            .dims()
            .iter()
            .map(|d| wavenumbers(d.n_points, d.length()))
            .collect();
        let kinetic = (0..grid.len())
            .map(|flat| {
                let e: f64 = dofs
                    .iter()
                    .enumerate()
                    .map(|(a, dof)| {
                        let k = ks[a][grid.axis_index(flat, a)];
                        lambda * k * k / (2.0 * dof.mass)
                    })
                    .sum();
                Complex64::from_polar(1.0, -e * dt)
            })
            .collect();

        let mut planner = FftPlanner::new();
        let forward = grid
            .dims()
            .iter()
            .map(|d| planner.plan_fft_forward(d.n_points))
            .collect();
        let inverse = grid
            .dims()
            .iter()
            .map(|d| planner.plan_fft_inverse(d.n_points))
            .collect();
        Ok(SplitStep {
            grid: grid.clone(),
            half_potential,
            kinetic,
            forward,
            inverse,
        })
    }

    fn transform(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        let g = &self.grid;
        for (axis, plan) in plans.iter().enumerate() {
            let n = g.dim(axis).n_points;
            let stride = g.stride(axis);
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            for start in 0..g.len() {
                if g.axis_index(start, axis) != 0 {
                    continue;
                }
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[start + i * stride];
                }
                plan.process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    data[start + i * stride] = *v;
                }
            }
        }
    }

    /// Advance ψ by one dt in place.
    pub fn step_in_place(&self, psi: &mut [Complex64]) {
        for (z, p) in psi.iter_mut().zip(&self.half_potential) {
            *z *= p;
        }
        self.transform(psi, &self.forward);
        let scale = 1.0 / self.grid.len() as f64;
        for (z, k) in psi.iter_mut().zip(&self.kinetic) {
            *z *= k * scale;
        }
        self.transform(psi, &self.inverse);
        for (z, p) in psi.iter_mut().zip(&self.half_potential) {
            *z *= p;
        }
    }

    pub fn step(&self, psi: &ComplexField) -> ComplexField {
        let mut out = psi.clone();
        self.step_in_place(&mut out.psi);
        out
    }
}

/// One Strang step: e^{−iU dt/2λ}·F⁻¹e^{−iλk²dt/2m}F·e^{−iU dt/2λ}.
pub fn split_step(
    psi: &ComplexField,
    grid: &GridSpec,
    dofs: &[DofParams],
    potential: &PotentialSpec,
    dt: f64,
) -> Result<ComplexField> {
    grid.check_field("psi", psi.psi.len())?;
    Ok(SplitStep::new(grid, dofs, potential, dt)?.step(psi))
}
