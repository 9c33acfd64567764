//! Time evolution of (ρ, S) under the continuity and quantum Hamilton-Jacobi
//! equations with a separate quantum strength λ_i per degree of freedom:
//!
//! ∂ρ/∂t = −Σ_i ∂_i(ρ ∂_iS / m_i)
//! ∂S/∂t = −Σ_i (∂_iS)²/2m_i − Q − U,  Q = −Σ_i (λ_i²/2m_i) ∂_i²√ρ/√ρ
//!
//! Q is discretized through the log-density gradient u_i = ∂_iρ/ρ using the
//! identity ∂²√ρ/√ρ = ¼(u² + 2∂u). With the antisymmetric first-derivative
//! stencil this makes Q the exact discrete variational derivative of
//! Σ ρ·λ²u²/8m, so the semi-discrete system conserves the discrete energy
//! reported by [`crate::observables`] at κ = 1/4.
//!
//! Time stepping is classical RK4 on the method-of-lines system.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::observables::{report, ObservableReport};
use crate::params::DofParams;
use crate::potential::PotentialSpec;
use crate::state::HydroState;
use crate::stencil::d1;

pub const DEFAULT_KAPPA: f64 = 0.25;
pub const DEFAULT_RHO_FLOOR: f64 = 1e-12;
/// Norm drift beyond which a step renormalizes ρ.
pub const RENORM_THRESHOLD: f64 = 1e-12;
/// Negative density tolerated after a step, relative to max ρ.
pub const NEGATIVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationParams {
    pub dofs: Vec<DofParams>,
    pub potential: PotentialSpec,
    pub dt: f64,
    pub kappa: f64,
    pub rho_floor: f64,
}

impl SimulationParams {
    pub fn new(dofs: Vec<DofParams>, potential: PotentialSpec, dt: f64) -> Self {
        SimulationParams {
            dofs,
            potential,
            dt,
            kappa: DEFAULT_KAPPA,
            rho_floor: DEFAULT_RHO_FLOOR,
        }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.dofs.iter_mut().for_each(|d| d.lambda = lambda);
        self
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if self.dofs.len() != grid.ndim() {
            return Err(Error::InvalidParams(format!(
                "{} dofs for a {}-dimensional grid",
                self.dofs.len(),
                grid.ndim()
            )));
        }
        for d in &self.dofs {
            d.validate()?;
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParams(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::InvalidParams(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        if !(self.rho_floor.is_finite() && self.rho_floor >= 0.0 && self.rho_floor < 1.0) {
            return Err(Error::InvalidParams(format!(
                "rho_floor must be in [0, 1), got {}",
                self.rho_floor
            )));
        }
        self.potential.validate(grid)
    }
}

/// ρ with values below `rho_floor·max ρ` raised to that threshold, and the
/// mask of points that were raised.
pub fn floored_density(rho: &[f64], rho_floor: f64) -> (Vec<f64>, Vec<bool>) {
    let max = rho.iter().copied().fold(0.0, f64::max);
    let thr = (rho_floor * max).max(f64::MIN_POSITIVE);
    let floored: Vec<bool> = rho.iter().map(|&r| !(r >= thr)).collect();
    let rho_f = rho.iter().map(|&r| r.max(thr)).collect();
    (rho_f, floored)
}

/// u = ∂_axis ρ / ρ evaluated on the floored density.
pub fn log_density_gradient(rho_f: &[f64], grid: &GridSpec, axis: usize) -> Vec<f64> {
    d1(rho_f, grid, axis)
        .into_iter()
        .zip(rho_f)
        .map(|(d, r)| d / r)
        .collect()
}

/// Q = −Σ_i (λ_i²/2m_i)·∂_i²√ρ/√ρ.
///
/// Points below the density floor take the value at the nearest point above
/// it (breadth-first over grid neighbours). Identically zero when every
/// λ_i is zero.
pub fn quantum_potential(
    state: &HydroState,
    grid: &GridSpec,
    dofs: &[DofParams],
    rho_floor: f64,
) -> Vec<f64> {
    quantum_potential_of(&state.rho, grid, dofs, rho_floor)
}

pub(crate) fn quantum_potential_of(
    rho: &[f64],
    grid: &GridSpec,
    dofs: &[DofParams],
    rho_floor: f64,
) -> Vec<f64> {
    let mut q = vec![0.0; grid.len()];
    if dofs.iter().all(|d| d.lambda == 0.0) {
        return q;
    }
    let (rho_f, floored) = floored_density(rho, rho_floor);
    for (axis, dof) in dofs.iter().enumerate() {
        if dof.lambda == 0.0 {
            continue;
        }
        let c = dof.lambda * dof.lambda / (8.0 * dof.mass);
        let u = log_density_gradient(&rho_f, grid, axis);
        let du = d1(&u, grid, axis);
        for ((qk, uk), duk) in q.iter_mut().zip(&u).zip(&du) {
            *qk -= c * (uk * uk + 2.0 * duk);
        }
    }
    clamp_to_nearest(&mut q, &floored, grid);
    q
}

fn clamp_to_nearest(values: &mut [f64], masked: &[bool], grid: &GridSpec) {
    if !masked.iter().any(|&m| m) {
        return;
    }
    let mut done: Vec<bool> = masked.iter().map(|&m| !m).collect();
    let mut queue: VecDeque<usize> = (0..values.len()).filter(|&k| done[k]).collect();
    while let Some(k) = queue.pop_front() {
        for axis in 0..grid.ndim() {
            for off in [-1, 1] {
                let j = grid.neighbor(k, axis, off);
                if !done[j] {
                    done[j] = true;
                    values[j] = values[k];
                    queue.push_back(j);
                }
            }
        }
    }
}

/// Largest dt accepted by [`step`]:
/// 0.5·min_d m_d·Δx_d² / (λ_d + |k0_d|·Δx_d·m_d + 1).
pub fn stability_limit(state: &HydroState, grid: &GridSpec, dofs: &[DofParams]) -> f64 {
    dofs.iter()
        .enumerate()
        .map(|(a, d)| {
            let h = grid.spacing(a);
            0.5 * d.mass * h * h / (d.lambda + state.k0[a].abs() * h * d.mass + 1.0)
        })
        .fold(f64::INFINITY, f64::min)
}

/// The right-hand sides with the potential evaluated once.
#[derive(Debug, Clone)]
pub struct Dynamics<'a> {
    grid: &'a GridSpec,
    params: &'a SimulationParams,
    potential: Vec<f64>,
}

/// Result of one RK4 step.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub state: HydroState,
    /// Norm drift that was corrected, if the step renormalized ρ.
    pub renormalized: Option<f64>,
}

impl<'a> Dynamics<'a> {
    pub fn new(grid: &'a GridSpec, params: &'a SimulationParams) -> Result<Self> {
        params.validate(grid)?;
        let potential = params.potential.evaluate(grid)?;
        Ok(Dynamics {
            grid,
            params,
            potential,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.grid
    }

    pub fn params(&self) -> &SimulationParams {
        self.params
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn quantum_potential(&self, state: &HydroState) -> Vec<f64> {
        quantum_potential_of(&state.rho, self.grid, &self.params.dofs, self.params.rho_floor)
    }

    pub fn continuity_rhs(&self, state: &HydroState) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for (axis, dof) in self.params.dofs.iter().enumerate() {
            let v = state.action_gradient(self.grid, axis);
            let flux: Vec<f64> = state.rho.iter().zip(&v).map(|(r, v)| r * v / dof.mass).collect();
            for (o, f) in out.iter_mut().zip(d1(&flux, self.grid, axis)) {
                *o -= f;
            }
        }
        out
    }

    pub fn hj_rhs(&self, state: &HydroState) -> Vec<f64> {
        let q = self.quantum_potential(state);
        let mut out: Vec<f64> = q.iter().zip(&self.potential).map(|(q, u)| -q - u).collect();
        for (axis, dof) in self.params.dofs.iter().enumerate() {
            let v = state.action_gradient(self.grid, axis);
            for (o, v) in out.iter_mut().zip(&v) {
                *o -= v * v / (2.0 * dof.mass);
            }
        }
        if self.params.dofs.iter().any(|d| d.lambda > 0.0) {
            // Below the floor the action follows its nearest resolved point:
            // the velocity field there stays frozen instead of steepening into
            // shocks where the (clamped) quantum force vanishes.
            let (_, floored) = floored_density(&state.rho, self.params.rho_floor);
            clamp_to_nearest(&mut out, &floored, self.grid);
        }
        out
    }

    pub fn stability_limit(&self, state: &HydroState) -> f64 {
        stability_limit(state, self.grid, &self.params.dofs)
    }

    fn stage(&self, base: &HydroState, drho: &[f64], ds: &[f64], h: f64) -> HydroState {
        HydroState {
            t: base.t + h,
            rho: base.rho.iter().zip(drho).map(|(r, d)| r + h * d).collect(),
            s_residual: base.s_residual.iter().zip(ds).map(|(s, d)| s + h * d).collect(),
            k0: base.k0.clone(),
        }
    }

    /// One classical RK4 step.
    pub fn step(&self, state: &HydroState) -> Result<StepOutput> {
        let dt = self.params.dt;
        let limit = self.stability_limit(state);
        if dt > limit {
            return Err(Error::CflViolated { dt, limit });
        }

        let k1r = self.continuity_rhs(state);
        let k1s = self.hj_rhs(state);
        let y2 = self.stage(state, &k1r, &k1s, 0.5 * dt);
        let k2r = self.continuity_rhs(&y2);
        let k2s = self.hj_rhs(&y2);
        let y3 = self.stage(state, &k2r, &k2s, 0.5 * dt);
        let k3r = self.continuity_rhs(&y3);
        let k3s = self.hj_rhs(&y3);
        let y4 = self.stage(state, &k3r, &k3s, dt);
        let k4r = self.continuity_rhs(&y4);
        let k4s = self.hj_rhs(&y4);

        let w = dt / 6.0;
        let combine = |y: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
            (0..y.len())
                .map(|k| y[k] + w * (a[k] + 2.0 * b[k] + 2.0 * c[k] + d[k]))
                .collect()
        };
        let mut rho = combine(&state.rho, &k1r, &k2r, &k3r, &k4r);
        let s_residual = combine(&state.s_residual, &k1s, &k2s, &k3s, &k4s);

        if let Some(index) = rho.iter().position(|r| !r.is_finite()) {
            return Err(Error::NonFinite {
                field: "rho",
                index,
            });
        }
        if let Some(index) = s_residual.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite {
                field: "s_residual",
                index,
            });
        }
        let max = rho.iter().copied().fold(0.0, f64::max);
        for (index, r) in rho.iter_mut().enumerate() {
            if *r < 0.0 {
                if *r < -NEGATIVE_TOL * max {
                    return Err(Error::NegativeDensity { index, value: *r });
                }
                *r = 0.0;
            }
        }

        let drift = self.grid.integrate(&rho) - 1.0;
        let renormalized = if drift.abs() > RENORM_THRESHOLD {
            let n = 1.0 + drift;
            rho.iter_mut().for_each(|r| *r /= n);
            log::info!("t = {}: renormalized density, drift {drift:e}", state.t + dt);
            Some(drift)
        } else {
            None
        };

        Ok(StepOutput {
            state: HydroState {
                t: state.t + dt,
                rho,
                s_residual,
                k0: state.k0.clone(),
            },
            renormalized,
        })
    }
}

pub fn continuity_rhs(
    state: &HydroState,
    grid: &GridSpec,
    params: &SimulationParams,
) -> Result<Vec<f64>> {
    Ok(Dynamics::new(grid, params)?.continuity_rhs(state))
}

pub fn hj_rhs(state: &HydroState, grid: &GridSpec, params: &SimulationParams) -> Result<Vec<f64>> {
    Ok(Dynamics::new(grid, params)?.hj_rhs(state))
}

pub fn step(state: &HydroState, grid: &GridSpec, params: &SimulationParams) -> Result<StepOutput> {
    Dynamics::new(grid, params)?.step(state)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Renormalization {
    pub step: usize,
    pub drift: f64,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: HydroState,
    pub reports: Vec<ObservableReport>,
    pub renormalizations: Vec<Renormalization>,
}

/// Apply `n_steps` steps, reporting at step 0 and every `report_every` steps.
pub fn evolve(
    state: &HydroState,
    grid: &GridSpec,
    params: &SimulationParams,
    n_steps: usize,
    report_every: usize,
) -> Result<Evolution> {
    evolve_with(state, grid, params, n_steps, report_every, |_, _| {})
}

/// As [`evolve`], calling `observer(step_index, state)` on the initial state
/// and after every step.
pub fn evolve_with<F>(
    state: &HydroState,
    grid: &GridSpec,
    params: &SimulationParams,
    n_steps: usize,
    report_every: usize,
    mut observer: F,
) -> Result<Evolution>
where
    F: FnMut(usize, &HydroState),
{
    if report_every == 0 {
        return Err(Error::InvalidParams("report_every must be positive".into()));
    }
    state.validate(grid)?;
    let dynamics = Dynamics::new(grid, params)?;
    let mut current = state.clone();
    let mut reports = vec![report(&current, &dynamics)];
    let mut renormalizations = Vec::new();
    observer(0, &current);
    for n in 1..=n_steps {
        let out = dynamics.step(&current).map_err(|e| e.at_step(n))?;
        if let Some(drift) = out.renormalized {
            renormalizations.push(Renormalization { step: n, drift });
        }
        current = out.state;
        current.t = state.t + n as f64 * params.dt;
        if n % report_every == 0 {
            reports.push(report(&current, &dynamics));
        }
        observer(n, &current);
    }
    Ok(Evolution {
        state: current,
        reports,
        renormalizations,
    })
}
