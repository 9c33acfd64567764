//! Ensemble statistics of a density/action state.
//!
//! Local quantities: mean momentum p̄_i = ∂_iS and momentum variance
//! (δp_i)² = κ·λ_i²·(∂_iρ/ρ)². Global quantities are ρ-weighted grid sums
//! with the normalization N = Σ ρ·ΔV taken as 1.

use serde::{Deserialize, Serialize};

use crate::dynamics::{floored_density, log_density_gradient, Dynamics, SimulationParams};
use crate::error::Result;
use crate::grid::GridSpec;
use crate::state::HydroState;

/// Absolute slack of the uncertainty comparison.
pub const UNCERTAINTY_SLACK: f64 = 1e-9;
/// Fraction of mass that must lie within half a box of the centre for the
/// periodic position spread to be meaningful.
pub const LOCALIZATION_MASS: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableReport {
    pub t: f64,
    pub norm: f64,
    pub mean_x: Vec<f64>,
    pub delta_x: Vec<f64>,
    pub mean_p: Vec<f64>,
    pub delta_p: Vec<f64>,
    pub energy: f64,
    pub axiom1_residual: f64,
    pub uncertainty_product: Vec<f64>,
}

/// Format used for every number written to CSV: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl ObservableReport {
    pub fn csv_header(ndof: usize) -> String {
        let mut cols = vec![
            "t".to_string(),
            "norm".into(),
            "energy".into(),
            "axiom1_residual".into(),
        ];
        for i in 0..ndof {
            for name in ["mean_x", "delta_x", "mean_p", "delta_p", "uncertainty"] {
                cols.push(format!("{name}_{i}"));
            }
        }
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut vals = vec![self.t, self.norm, self.energy, self.axiom1_residual];
        for i in 0..self.mean_x.len() {
            vals.extend([
                self.mean_x[i],
                self.delta_x[i],
                self.mean_p[i],
                self.delta_p[i],
                self.uncertainty_product[i],
            ]);
        }
        vals.into_iter().map(fmt_f64).collect::<Vec<_>>().join(",")
    }
}

/// p̄_axis = ∂_axis S, including the linear background.
pub fn local_mean_momentum(state: &HydroState, grid: &GridSpec, axis: usize) -> Vec<f64> {
    state.action_gradient(grid, axis)
}

/// (δp_axis)² = κ·λ²·(∂_axis ρ/ρ)² on the floored density.
pub fn local_momentum_variance(
    state: &HydroState,
    grid: &GridSpec,
    lambda: f64,
    kappa: f64,
    axis: usize,
    rho_floor: f64,
) -> Vec<f64> {
    if lambda == 0.0 {
        return vec![0.0; grid.len()];
    }
    let (rho_f, _) = floored_density(&state.rho, rho_floor);
    variance_from(&rho_f, grid, lambda, kappa, axis)
}

fn variance_from(rho_f: &[f64], grid: &GridSpec, lambda: f64, kappa: f64, axis: usize) -> Vec<f64> {
    let c = kappa * lambda * lambda;
    log_density_gradient(rho_f, grid, axis)
        .into_iter()
        .map(|u| c * u * u)
        .collect()
}

/// Local energy density H̄ = Σ_i ((∂_iS)² + (δp_i)²)/2m_i + U.
pub fn local_energy(state: &HydroState, dynamics: &Dynamics) -> Vec<f64> {
    let grid = dynamics.grid();
    let params = dynamics.params();
    let (rho_f, _) = floored_density(&state.rho, params.rho_floor);
    let mut h = dynamics.potential().to_vec();
    for (axis, dof) in params.dofs.iter().enumerate() {
        let p = state.action_gradient(grid, axis);
        let var = if dof.lambda == 0.0 {
            vec![0.0; grid.len()]
        } else {
            variance_from(&rho_f, grid, dof.lambda, params.kappa, axis)
        };
        for ((hk, pk), vk) in h.iter_mut().zip(&p).zip(&var) {
            *hk += (pk * pk + vk) / (2.0 * dof.mass);
        }
    }
    h
}

/// Circular mean of the density along `axis`, in `[x_min, x_max)`.
fn circular_center(state: &HydroState, grid: &GridSpec, axis: usize) -> f64 {
    let dim = grid.dim(axis);
    let l = dim.length();
    let (mut s, mut c) = (0.0, 0.0);
    for (k, &r) in state.rho.iter().enumerate() {
        let th = 2.0 * std::f64::consts::PI * (grid.coord(k, axis) - dim.x_min) / l;
        s += r * th.sin();
        c += r * th.cos();
    }
    let th = s.atan2(c).rem_euclid(2.0 * std::f64::consts::PI);
    dim.x_min + th * l / (2.0 * std::f64::consts::PI)
}

/// Mean and standard deviation of the position along `axis`, measured in the
/// periodic image centred on the circular mean.
pub fn position_moments(state: &HydroState, grid: &GridSpec, axis: usize) -> (f64, f64) {
    let dim = grid.dim(axis);
    let center = circular_center(state, grid, axis);
    let dv = grid.cell_volume();
    let xs: Vec<f64> = (0..grid.len())
        .map(|k| dim.wrap_around(grid.coord(k, axis), center))
        .collect();
    let mean: f64 = state.rho.iter().zip(&xs).map(|(r, x)| r * x).sum::<f64>() * dv;
    let var: f64 = state
        .rho
        .iter()
        .zip(&xs)
        .map(|(r, x)| r * (x - mean) * (x - mean))
        .sum::<f64>()
        * dv;
    let near: f64 = state
        .rho
        .iter()
        .zip(&xs)
        .filter(|(_, x)| (*x - center).abs() < 0.25 * dim.length())
        .map(|(r, _)| r)
        .sum::<f64>()
        * dv;
    if near < LOCALIZATION_MASS {
        log::debug!("axis {axis}: state not localized ({near} within half box)");
    }
    (dim.wrap_around(mean, dim.x_min + 0.5 * dim.length()), var.sqrt())
}

pub(crate) fn report(state: &HydroState, dynamics: &Dynamics) -> ObservableReport {
    let grid = dynamics.grid();
    let params = dynamics.params();
    let dv = grid.cell_volume();
    let (rho_f, _) = floored_density(&state.rho, params.rho_floor);
    let weighted = |f: &[f64]| -> f64 { state.rho.iter().zip(f).map(|(r, v)| r * v).sum::<f64>() * dv };

    let ndof = params.dofs.len();
    let mut out = ObservableReport {
        t: state.t,
        norm: grid.integrate(&state.rho),
        mean_x: Vec::with_capacity(ndof),
        delta_x: Vec::with_capacity(ndof),
        mean_p: Vec::with_capacity(ndof),
        delta_p: Vec::with_capacity(ndof),
        energy: 0.0,
        axiom1_residual: 0.0,
        uncertainty_product: Vec::with_capacity(ndof),
    };
    for (axis, dof) in params.dofs.iter().enumerate() {
        let (mx, dx) = position_moments(state, grid, axis);
        let p = state.action_gradient(grid, axis);
        let dp2 = if dof.lambda == 0.0 {
            0.0
        } else {
            weighted(&variance_from(&rho_f, grid, dof.lambda, params.kappa, axis))
        };
        let dp = dp2.max(0.0).sqrt();
        out.mean_x.push(mx);
        out.delta_x.push(dx);
        out.mean_p.push(weighted(&p));
        out.delta_p.push(dp);
        out.uncertainty_product.push(dx * dp);
    }
    let h = local_energy(state, dynamics);
    out.energy = weighted(&h);
    let dsdt = dynamics.hj_rhs(state);
    let integrand: Vec<f64> = dsdt.iter().zip(&h).map(|(a, b)| a + b).collect();
    out.axiom1_residual = weighted(&integrand);
    out
}

/// Every global statistic of `state`.
pub fn global_stats(
    state: &HydroState,
    grid: &GridSpec,
    params: &SimulationParams,
) -> Result<ObservableReport> {
    state.validate(grid)?;
    Ok(report(state, &Dynamics::new(grid, params)?))
}

/// ∫ρ(∂S/∂t + H̄) with ∂S/∂t taken from the dynamics.
pub fn axiom1_residual(state: &HydroState, grid: &GridSpec, params: &SimulationParams) -> Result<f64> {
    Ok(global_stats(state, grid, params)?.axiom1_residual)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyCheck {
    pub product: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// Compare Δx_i·Δp_i against √κ·λ_i.
pub fn uncertainty_check(report: &ObservableReport, lambdas: &[f64], kappa: f64) -> Vec<UncertaintyCheck> {
    report
        .uncertainty_product
        .iter()
        .zip(lambdas)
        .map(|(&product, &lambda)| {
            let bound = kappa.sqrt() * lambda;
            UncertaintyCheck {
                product,
                bound,
                satisfied: product >= bound - UNCERTAINTY_SLACK,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::DofParams;
    use crate::potential::PotentialSpec;
    use crate::state::{plane_wave, sample_gaussian};
    use std::f64::consts::PI;

    fn grid() -> GridSpec {
        GridSpec::uniform_1d(-10.0, 10.0, 256).unwrap()
    }

    fn params(lambda: f64, kappa: f64) -> SimulationParams {
        SimulationParams::new(vec![DofParams::new(1.0, lambda).unwrap()], PotentialSpec::Free, 1e-3)
            .with_kappa(kappa)
    }

    #[test]
    fn standard_gaussian_stats() {
        let g = grid();
        let s = sample_gaussian(&g, &[0.0], &[1.0], &[0.0]).unwrap();
        let r = global_stats(&s, &g, &params(1.0, 0.25)).unwrap();
        assert!((r.norm - 1.0).abs() < 1e-12);
        assert!(r.mean_x[0].abs() < 1e-12);
        assert!((r.delta_x[0] - 1.0).abs() < 1e-9);
        assert!((r.delta_p[0] - 0.5).abs() < 1e-7);
        assert!((r.uncertainty_product[0] - 0.5).abs() < 1e-7);
        assert!((r.energy - 0.125).abs() < 1e-7);
        assert!(r.mean_p[0].abs() < 1e-15);
        assert!(r.axiom1_residual.abs() < 1e-8);
    }

    #[test]
    fn residual_is_affine_in_kappa() {
        let g = grid();
        let s = sample_gaussian(&g, &[0.0], &[1.0], &[0.0]).unwrap();
        // Independent quadrature of F = ∫ρ'²/ρ with the analytic ρ' = −xρ.
        let fisher: f64 = (0..g.len())
            .map(|k| {
                let x = g.coord(k, 0);
                x * x * s.rho[k]
            })
            .sum::<f64>()
            * g.cell_volume();
        for kappa in [0.25, 0.5, 1.0, 2.0] {
            let got = axiom1_residual(&s, &g, &params(1.0, kappa)).unwrap();
            let expect = (kappa - 0.25) * fisher / 2.0;
            assert!((got - expect).abs() < 1e-6, "kappa {kappa}: {got} vs {expect}");
        }
        let full = axiom1_residual(&s, &g, &params(1.0, 1.0)).unwrap();
        assert!((full - 0.375).abs() < 1e-4);
    }

    #[test]
    fn plane_wave_stats() {
        let g = GridSpec::uniform_1d(-5.0 * PI, 5.0 * PI, 128).unwrap();
        let (s, snap) = plane_wave(&g, &[2.0]).unwrap();
        assert_eq!(snap.snapped[0], 2.0);
        let r = global_stats(&s, &g, &params(1.0, 0.25)).unwrap();
        assert!((r.mean_p[0] - 2.0).abs() < 1e-12);
        assert_eq!(r.delta_p[0], 0.0);
        assert!((r.energy - 2.0).abs() < 1e-12);
        assert!(r.axiom1_residual.abs() < 1e-12);
        assert!(local_mean_momentum(&s, &g, 0).iter().all(|&p| p == 2.0));
    }

    #[test]
    fn classical_uniform_state() {
        let g = grid();
        let (s, _) = plane_wave(&g, &[0.0]).unwrap();
        let mut p = params(0.0, 0.25);
        p.potential = PotentialSpec::harmonic_1d(1.0, 0.0);
        let r = global_stats(&s, &g, &p).unwrap();
        assert_eq!((r.mean_p[0], r.delta_p[0]), (0.0, 0.0));
        let u = p.potential.evaluate(&g).unwrap();
        assert!((r.energy - g.inner(&s.rho, &u)).abs() < 1e-14);
    }

    #[test]
    fn local_fields() {
        let g = grid();
        let mut s = plane_wave(&g, &[0.0]).unwrap().0;
        assert!(local_mean_momentum(&s, &g, 0).iter().all(|&p| p == 0.0));
        assert!(local_momentum_variance(&s, &g, 1.0, 0.25, 0, 1e-12)
            .iter()
            .all(|&v| v == 0.0));
        let w = 2.0 * PI / 20.0;
        s.s_residual = g.coords(0).iter().map(|x| (w * x).sin()).collect();
        for (k, p) in local_mean_momentum(&s, &g, 0).iter().enumerate() {
            assert!((p - w * (w * g.coord(k, 0)).cos()).abs() < 1e-7);
        }

        let gs = sample_gaussian(&g, &[0.0], &[1.5], &[0.0]).unwrap();
        let var = local_momentum_variance(&gs, &g, 1.0, 0.25, 0, 1e-12);
        for (k, v) in var.iter().enumerate() {
            let x = g.coord(k, 0);
            if x.abs() < 4.0 {
                assert!((v - x * x / (4.0 * 1.5f64.powi(4))).abs() < 1e-5, "x = {x}: {v} vs {}", x * x / (4.0 * 1.5f64.powi(4)));
            }
        }
        assert!(local_momentum_variance(&gs, &g, 0.0, 0.25, 0, 1e-12)
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn uncertainty_cases() {
        let g = grid();
        let s = sample_gaussian(&g, &[0.0], &[1.0], &[0.0]).unwrap();
        let r = global_stats(&s, &g, &params(1.0, 0.25)).unwrap();
        let c = uncertainty_check(&r, &[1.0], 0.25)[0];
        assert!(c.satisfied);
        assert_eq!(c.bound, 0.5);
        assert!((c.product - c.bound).abs() < 1e-6);

        let a = sample_gaussian(&g, &[-2.0], &[0.8], &[0.0]).unwrap();
        let b = sample_gaussian(&g, &[2.5], &[1.0], &[0.0]).unwrap();
        let mut two = a.clone();
        two.rho = a.rho.iter().zip(&b.rho).map(|(x, y)| 0.5 * (x + y)).collect();
        let r = global_stats(&two, &g, &params(1.0, 0.25)).unwrap();
        let c = uncertainty_check(&r, &[1.0], 0.25)[0];
        assert!(c.satisfied && c.product > c.bound * 1.5, "{c:?}");

        let r = global_stats(&s, &g, &params(0.0, 0.25)).unwrap();
        let c = uncertainty_check(&r, &[0.0], 0.25)[0];
        assert!(c.satisfied && c.bound == 0.0);
    }

    #[test]
    fn periodic_centering() {
        let g = grid();
        let s = sample_gaussian(&g, &[9.5], &[1.0], &[0.0]).unwrap();
        let (mean, spread) = position_moments(&s, &g, 0);
        assert!((mean - 9.5).abs() < 1e-9);
        assert!((spread - 1.0).abs() < 1e-9);
    }

    #[test]
    fn csv_layout() {
        assert_eq!(
            ObservableReport::csv_header(2),
            "t,norm,energy,axiom1_residual,\
             mean_x_0,delta_x_0,mean_p_0,delta_p_0,uncertainty_0,\
             mean_x_1,delta_x_1,mean_p_1,delta_p_1,uncertainty_1"
        );
        let g = grid();
        let s = sample_gaussian(&g, &[0.0], &[1.0], &[0.0]).unwrap();
        let r = global_stats(&s, &g, &params(1.0, 0.25)).unwrap();
        let row = r.csv_row();
        let fields: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(fields.len(), 9);
        assert_eq!(fields[2], r.energy);
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
    }
}
