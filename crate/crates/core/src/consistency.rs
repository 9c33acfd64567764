//! Numerical check of which local momentum-variance models μ(ρ, η), with
//! η = |∇ρ|², give matching first and second variational derivatives.
//!
//! Q0 is the Euler-Lagrange derivative of ∫ρμ; Q1 is the functional
//! derivative of ∫ρ·Q0. A model is consistent when Q1 = Q0. Q1 is always
//! computed by brute force ([`gateaux_derivative`] of the nested Q0
//! functional), so a closed form never checks itself.
//!
//! Every discrete identity used here (summation by parts with the
//! antisymmetric stencil) is exact on a periodic grid, so agreement is limited
//! only by the Gateaux step and rounding.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::GridSpec;
use crate::state::{commensurate_k, normalize, plane_wave};
use crate::stencil::d1;

pub const DEFAULT_TOLERANCE: f64 = 1e-4;
/// Gateaux step relative to max ρ.
pub const DEFAULT_EPSILON_REL: f64 = 1e-6;
/// Relative step for finite-difference partials of custom μ rules.
const PARTIAL_STEP: f64 = 1e-3;

pub type MuRule = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Local momentum-variance model.
#[derive(Clone)]
pub enum MuModel {
    /// μ = a·η/ρ² + b/ρ + c.
    Family { a: f64, b: f64, c: f64 },
    /// Pointwise rule (ρ, η) ↦ μ.
    Custom { name: String, rule: Arc<MuRule> },
}

impl fmt::Debug for MuModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl MuModel {
    pub fn family(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "family coefficient a must be non-negative, got {a}"
            )));
        }
        if !(b.is_finite() && c.is_finite()) {
            return Err(Error::InvalidParams("family coefficients must be finite".into()));
        }
        Ok(MuModel::Family { a, b, c })
    }

    pub fn custom<F>(name: impl Into<String>, rule: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        MuModel::Custom {
            name: name.into(),
            rule: Arc::new(rule),
        }
    }

    /// Built-in custom rules: `eta` (μ = η), `rho_eta` (μ = ρη) and
    /// `fisher` (μ = η/4ρ², the a = 1/4 family member as a plain rule).
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "eta" => Some(Self::custom("eta", |_, eta| eta)),
            "rho_eta" => Some(Self::custom("rho_eta", |rho, eta| rho * eta)),
            "fisher" => Some(Self::custom("fisher", |rho, eta| 0.25 * eta / (rho * rho))),
            _ => None,
        }
    }

    pub const BUILTIN_NAMES: [&'static str; 3] = ["eta", "rho_eta", "fisher"];

    pub fn label(&self) -> String {
        match self {
            MuModel::Family { a, b, c } => format!("family(a={a}, b={b}, c={c})"),
            MuModel::Custom { name, .. } => format!("custom({name})"),
        }
    }

    pub fn eval(&self, rho: f64, eta: f64) -> f64 {
        match self {
            MuModel::Family { a, b, c } => a * eta / (rho * rho) + b / rho + c,
            MuModel::Custom { rule, .. } => rule(rho, eta),
        }
    }
}

/// η = Σ_i (∂_iρ)².
pub fn eta_field(rho: &[f64], grid: &GridSpec) -> Vec<f64> {
    let mut eta = vec![0.0; rho.len()];
    for axis in 0..grid.ndim() {
        for (e, d) in eta.iter_mut().zip(d1(rho, grid, axis)) {
            *e += d * d;
        }
    }
    eta
}

/// ∫ρ·μ(ρ, η).
pub fn density_functional(mu: &MuModel, rho: &[f64], grid: &GridSpec) -> f64 {
    let eta = eta_field(rho, grid);
    let s: f64 = rho.iter().zip(&eta).map(|(&r, &e)| r * mu.eval(r, e)).sum();
    s * grid.cell_volume()
}

fn check_probe(rho: &[f64], grid: &GridSpec) -> Result<()> {
    grid.check_field("probe density", rho.len())?;
    match rho.iter().position(|&r| !(r > 0.0 && r.is_finite())) {
        Some(index) => Err(Error::ProbeTouchesZero { index }),
        None => Ok(()),
    }
}

/// Fourth-order central difference of `f` at `x` with step `h`.
fn partial(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h)
}

/// a·[−Σ_i(u_i² + 2∂_iu_i)] + c, u_i = ∂_iρ/ρ.
fn family_q0(a: f64, c: f64, rho: &[f64], grid: &GridSpec) -> Vec<f64> {
    let mut q = vec![c; rho.len()];
    if a == 0.0 {
        return q;
    }
    for axis in 0..grid.ndim() {
        let u: Vec<f64> = d1(rho, grid, axis).iter().zip(rho).map(|(d, r)| d / r).collect();
        let du = d1(&u, grid, axis);
        for ((qk, uk), duk) in q.iter_mut().zip(&u).zip(&du) {
            *qk -= a * (uk * uk + 2.0 * duk);
        }
    }
    q
}

/// ∂(ρμ)/∂ρ − Σ_i ∂_i(2ρ·∂μ/∂η·∂_iρ), partials of μ by finite differences.
fn custom_q0(rule: &MuRule, rho: &[f64], grid: &GridSpec) -> Vec<f64> {
    let grads: Vec<Vec<f64>> = (0..grid.ndim()).map(|a| d1(rho, grid, a)).collect();
    let eta: Vec<f64> = (0..rho.len())
        .map(|k| grads.iter().map(|g| g[k] * g[k]).sum())
        .collect();
    let eta_scale = eta.iter().sum::<f64>() / eta.len() as f64;
    let eta_scale = if eta_scale > 0.0 { eta_scale } else { 1.0 };

    let mut q = Vec::with_capacity(rho.len());
    let mut weight = Vec::with_capacity(rho.len());
    for (&r, &e) in rho.iter().zip(&eta) {
        let mu = rule(r, e);
        let mu_rho = partial(|x| rule(x, e), r, PARTIAL_STEP * r);
        let mu_eta = partial(|y| rule(r, y), e, PARTIAL_STEP * (e.abs() + eta_scale));
        q.push(mu + r * mu_rho);
        weight.push(2.0 * r * mu_eta);
    }
    for (axis, g) in grads.iter().enumerate() {
        let flux: Vec<f64> = weight.iter().zip(g).map(|(w, g)| w * g).collect();
        for (qk, dk) in q.iter_mut().zip(d1(&flux, grid, axis)) {
            *qk -= dk;
        }
    }
    q
}

fn q0_unchecked(mu: &MuModel, rho: &[f64], grid: &GridSpec) -> Vec<f64> {
    match mu {
        MuModel::Family { a, c, .. } => family_q0(*a, *c, rho, grid),
        MuModel::Custom { rule, .. } => custom_q0(rule.as_ref(), rho, grid),
    }
}

/// Q0 = [∂/∂ρ − ∂_i ∂/∂(∂_iρ)](ρμ).
///
/// For the family this is the closed form −4a·∇²√ρ/√ρ + c; b drops out
/// because ρ·(b/ρ) is constant.
pub fn q0_field(mu: &MuModel, rho: &[f64], grid: &GridSpec) -> Result<Vec<f64>> {
    check_probe(rho, grid)?;
    let q = q0_unchecked(mu, rho, grid);
    match q.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFiniteMu { index }),
        None => Ok(q),
    }
}

/// Discrete functional gradient by central bump perturbations:
/// component j = (F[ρ + εδ_j] − F[ρ − εδ_j]) / (2ε·ΔV).
///
/// `epsilon` defaults to 1e-6·max ρ. Costs 2N evaluations of `functional`.
pub fn gateaux_derivative<F>(
    functional: F,
    rho: &[f64],
    grid: &GridSpec,
    epsilon: Option<f64>,
    exec: Execution,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    grid.check_field("density", rho.len())?;
    let max = rho.iter().copied().fold(0.0, f64::max);
    let eps = epsilon.unwrap_or(DEFAULT_EPSILON_REL * max);
    if !(eps > 0.0) {
        return Err(Error::InvalidParams(format!("epsilon must be positive, got {eps}")));
    }
    if let Some(index) = rho.iter().position(|&r| !(r - eps > 0.0)) {
        return Err(Error::EpsilonTooLarge {
            index,
            epsilon: eps,
        });
    }
    let denom = 2.0 * eps * grid.cell_volume();
    Ok(exec.map_indices(rho.len(), |j| {
        let mut work = rho.to_vec();
        work[j] = rho[j] + eps;
        let plus = functional(&work);
        work[j] = rho[j] - eps;
        let minus = functional(&work);
        (plus - minus) / denom
    }))
}

#[derive(Debug, Clone)]
pub struct Q1Field {
    /// Brute-force functional derivative of ∫ρ·Q0.
    pub numeric: Vec<f64>,
    /// −4a·∇²√ρ/√ρ + c for family models.
    pub closed_form: Option<Vec<f64>>,
}

/// Q1 = δ/δρ ∫ρ·Q0[ρ].
pub fn q1_field(mu: &MuModel, rho: &[f64], grid: &GridSpec, exec: Execution) -> Result<Q1Field> {
    check_probe(rho, grid)?;
    let dv = grid.cell_volume();
    let numeric = gateaux_derivative(
        |r| {
            let q = q0_unchecked(mu, r, grid);
            r.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>() * dv
        },
        rho,
        grid,
        None,
        exec,
    )?;
    if let Some(index) = numeric.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteMu { index });
    }
    let closed_form = match mu {
        MuModel::Family { a, c, .. } => Some(family_q0(*a, *c, rho, grid)),
        MuModel::Custom { .. } => None,
    };
    Ok(Q1Field {
        numeric,
        closed_form,
    })
}

/// A named nodeless density used to probe the consistency condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub name: String,
    pub rho: Vec<f64>,
}

/// Gaussian, double Gaussian and raised cosine, each on a positive
/// background and normalized. Multi-dimensional probes are products of the
/// per-axis profile.
pub fn default_probes(grid: &GridSpec) -> Vec<Probe> {
    let profile = |f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> {
        let mut rho: Vec<f64> = (0..grid.len())
            .map(|k| {
                (0..grid.ndim())
                    .map(|a| {
                        let d = grid.dim(a);
                        let mid = d.x_min + 0.5 * d.length();
                        f(grid.coord(k, a) - mid, d.length())
                    })
                    .product()
            })
            .collect();
        normalize(&mut rho, grid);
        rho
    };
    let gauss = |x: f64, s: f64| (-x * x / (2.0 * s * s)).exp();
    vec![
        Probe {
            name: "gaussian".into(),
            rho: profile(&|x, l| gauss(x, l / 10.0) + 0.02),
        },
        Probe {
            name: "double_gaussian".into(),
            rho: profile(&|x, l| {
                gauss(x - l / 6.0, l / 16.0) + 0.7 * gauss(x + l / 6.0, l / 14.0) + 0.02
            }),
        },
        Probe {
            name: "raised_cosine".into(),
            rho: profile(&|x, l| 1.0 + 0.6 * (2.0 * std::f64::consts::PI * x / l).cos()),
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub name: String,
    pub max_abs_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub model: String,
    pub probes: Vec<ProbeResult>,
    pub tolerance: f64,
    pub max_abs_deviation: f64,
    pub verdict: Verdict,
}

/// L∞(Q1 − Q0) on each probe; pass iff every probe is within `tolerance`.
pub fn check_consistency(
    mu: &MuModel,
    probes: &[Probe],
    grid: &GridSpec,
    tolerance: f64,
    exec: Execution,
) -> Result<ConsistencyReport> {
    if probes.len() < 3 {
        return Err(Error::InvalidParams(format!(
            "need at least 3 probe densities, got {}",
            probes.len()
        )));
    }
    let mut results = Vec::with_capacity(probes.len());
    for p in probes {
        let q0 = q0_field(mu, &p.rho, grid)?;
        let q1 = q1_field(mu, &p.rho, grid, exec)?;
        let dev = q1
            .numeric
            .iter()
            .zip(&q0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        results.push(ProbeResult {
            name: p.name.clone(),
            max_abs_dev: dev,
        });
    }
    let max_abs_deviation = results.iter().map(|r| r.max_abs_dev).fold(0.0, f64::max);
    Ok(ConsistencyReport {
        model: mu.label(),
        probes: results,
        tolerance,
        max_abs_deviation,
        verdict: if max_abs_deviation <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub mean_p: f64,
    /// Σρ[(∂S)²/2m + Q0]·ΔV with Q0 = c on a uniform density.
    pub energy: f64,
    pub energy_shift: f64,
    pub c_admissible: bool,
}

/// Plane-wave check of the constant c: the ensemble momentum of e^{i p0 x}
/// must be p0 whatever c is, and only c = 0 leaves the energy zero alone.
pub fn plane_wave_calibration(c: f64, grid: &GridSpec, p0: f64, mass: f64) -> Result<Calibration> {
    if grid.ndim() != 1 {
        return Err(Error::InvalidParams("plane-wave calibration is one-dimensional".into()));
    }
    if (commensurate_k(p0, grid.dim(0).length(), 1.0) - p0).abs() > 1e-12 * p0.abs().max(1.0) {
        return Err(Error::InvalidParams(format!(
            "p0 = {p0} is not commensurate with the grid"
        )));
    }
    let (state, _) = plane_wave(grid, &[p0])?;
    let p = state.action_gradient(grid, 0);
    let q0 = family_q0(0.0, c, &state.rho, grid);
    let mean_p = grid.inner(&state.rho, &p);
    let local: Vec<f64> = p.iter().zip(&q0).map(|(p, q)| p * p / (2.0 * mass) + q).collect();
    let energy = grid.inner(&state.rho, &local);
    Ok(Calibration {
        mean_p,
        energy,
        energy_shift: energy - p0 * p0 / (2.0 * mass),
        c_admissible: c == 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::sample_gaussian;
    use std::f64::consts::PI;

    fn probe_grid() -> GridSpec {
        GridSpec::uniform_1d(-8.0, 8.0, 128).unwrap()
    }

    fn linf(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn family_rejects_negative_a() {
        assert!(MuModel::family(-1.0, 0.0, 0.0).is_err());
        assert!(MuModel::family(0.0, f64::NAN, 0.0).is_err());
        assert!(MuModel::family(0.0, 0.0, 0.0).is_ok());
        assert!(MuModel::builtin("nope").is_none());
        for name in MuModel::BUILTIN_NAMES {
            assert_eq!(MuModel::builtin(name).unwrap().label(), format!("custom({name})"));
        }
    }

    #[test]
    fn q0_examples() {
        let g = GridSpec::uniform_1d(-10.0, 10.0, 256).unwrap();
        let s = sample_gaussian(&g, &[0.0], &[1.0], &[0.0]).unwrap();
        let q = q0_field(&MuModel::family(0.25, 0.0, 0.0).unwrap(), &s.rho, &g).unwrap();
        for (k, v) in q.iter().enumerate() {
            let x = g.coord(k, 0);
            if x.abs() < 3.0 {
                assert!((v - (0.5 - x * x / 4.0)).abs() < 1e-4, "x = {x}");
            }
        }
        assert!((q[128] - 0.5).abs() < 1e-4);
        let b_only = q0_field(&MuModel::family(0.0, 5.0, 0.0).unwrap(), &s.rho, &g).unwrap();
        assert!(b_only.iter().all(|&v| v == 0.0));
        let c_only = q0_field(&MuModel::family(0.0, 0.0, 3.0).unwrap(), &s.rho, &g).unwrap();
        assert!(c_only.iter().all(|&v| v == 3.0));
    }

    #[test]
    fn q0_rejects_bad_probes() {
        let g = probe_grid();
        let mut rho = default_probes(&g)[0].rho.clone();
        rho[7] = 0.0;
        let mu = MuModel::family(0.25, 0.0, 0.0).unwrap();
        assert_eq!(q0_field(&mu, &rho, &g), Err(Error::ProbeTouchesZero { index: 7 }));
        let rho = default_probes(&g)[0].rho.clone();
        let blowup = MuModel::custom("inf", |_, _| f64::INFINITY);
        assert!(matches!(q0_field(&blowup, &rho, &g), Err(Error::NonFiniteMu { .. })));
    }

    #[test]
    fn gateaux_examples() {
        let g = probe_grid();
        let rho = default_probes(&g)[1].rho.clone();
        let exec = Execution::default();
        let one = gateaux_derivative(|r| g.integrate(r), &rho, &g, None, exec).unwrap();
        assert!(one.iter().all(|v| (v - 1.0).abs() < 1e-7));

        let sq = gateaux_derivative(|r| g.inner(r, r), &rho, &g, None, exec).unwrap();
        let twice: Vec<f64> = rho.iter().map(|r| 2.0 * r).collect();
        assert!(linf(&sq, &twice) < 1e-7);

        let fisher = MuModel::family(1.0, 0.0, 0.0).unwrap();
        for p in default_probes(&g) {
            let num = gateaux_derivative(|r| density_functional(&fisher, r, &g), &p.rho, &g, None, exec)
                .unwrap();
            let closed = q0_field(&fisher, &p.rho, &g).unwrap();
            let scale = closed.iter().map(|v| v.abs()).fold(1.0, f64::max);
            assert!(linf(&num, &closed) < 1e-6 * scale, "{}", p.name);
        }
    }

    #[test]
    fn gateaux_rejects_large_epsilon() {
        let g = probe_grid();
        let rho = default_probes(&g)[0].rho.clone();
        let err = gateaux_derivative(|r| g.integrate(r), &rho, &g, Some(1.0), Execution::Sequential);
        assert!(matches!(err, Err(Error::EpsilonTooLarge { .. })));
    }

    #[test]
    fn q1_examples() {
        let g = probe_grid();
        let gauss = default_probes(&g).remove(0);
        let exec = Execution::default();
        let mu = MuModel::family(0.7, 0.0, -0.3).unwrap();
        let q1 = q1_field(&mu, &gauss.rho, &g, exec).unwrap();
        let q0 = q0_field(&mu, &gauss.rho, &g).unwrap();
        assert!(linf(&q1.numeric, &q0) < DEFAULT_TOLERANCE);
        assert_eq!(q1.closed_form.as_deref(), Some(q0.as_slice()));

        let zero = MuModel::family(0.0, 0.0, 0.0).unwrap();
        let q1 = q1_field(&zero, &gauss.rho, &g, exec).unwrap();
        assert!(q1.numeric.iter().all(|&v| v == 0.0));

        let eta = MuModel::builtin("eta").unwrap();
        let q1 = q1_field(&eta, &gauss.rho, &g, exec).unwrap();
        let q0 = q0_field(&eta, &gauss.rho, &g).unwrap();
        assert!(q1.closed_form.is_none());
        assert!(linf(&q1.numeric, &q0) > 10.0 * DEFAULT_TOLERANCE);
    }

    #[test]
    fn custom_eta_matches_symbolic_q0() {
        // (∂ρ)² − 2∂(ρ∂ρ) on the grid.
        let g = probe_grid();
        let rho = default_probes(&g)[0].rho.clone();
        let d = d1(&rho, &g, 0);
        let flux: Vec<f64> = rho.iter().zip(&d).map(|(r, d)| 2.0 * r * d).collect();
        let expect: Vec<f64> = d.iter().zip(d1(&flux, &g, 0)).map(|(d, f)| d * d - f).collect();
        let got = q0_field(&MuModel::builtin("eta").unwrap(), &rho, &g).unwrap();
        assert!(linf(&got, &expect) < 1e-10);
    }

    #[test]
    fn verdicts() {
        let g = probe_grid();
        let probes = default_probes(&g);
        let exec = Execution::default();
        let check = |mu: &MuModel| check_consistency(mu, &probes, &g, DEFAULT_TOLERANCE, exec).unwrap();

        let r = check(&MuModel::family(0.25, 0.0, 0.0).unwrap());
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.probes.len(), 3);
        assert_eq!(r.max_abs_deviation, r.probes.iter().map(|p| p.max_abs_dev).fold(0.0, f64::max));

        let r = check(&MuModel::builtin("fisher").unwrap());
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");

        for name in ["eta", "rho_eta"] {
            let r = check(&MuModel::builtin(name).unwrap());
            assert_eq!(r.verdict, Verdict::Fail);
            assert!(r.max_abs_deviation >= 10.0 * DEFAULT_TOLERANCE, "{r:?}");
        }
        let few = check_consistency(
            &MuModel::family(0.25, 0.0, 0.0).unwrap(),
            &probes[..2],
            &g,
            DEFAULT_TOLERANCE,
            exec,
        );
        assert!(few.is_err());
    }

    #[test]
    fn b_is_invisible_for_the_family() {
        let g = probe_grid();
        let exec = Execution::default();
        for p in default_probes(&g) {
            let base = MuModel::family(0.4, 0.0, 0.2).unwrap();
            let shifted = MuModel::family(0.4, -0.9, 0.2).unwrap();
            assert_eq!(q0_field(&base, &p.rho, &g), q0_field(&shifted, &p.rho, &g));
            let a = q1_field(&base, &p.rho, &g, exec).unwrap().numeric;
            let b = q1_field(&shifted, &p.rho, &g, exec).unwrap().numeric;
            assert!(linf(&a, &b) < 1e-10);
        }
    }

    // Through finite-difference partials b cancels only to the accuracy of
    // the partials, which the Gateaux step then amplifies in Q1.
    #[test]
    fn b_is_invisible_through_numeric_path() {
        let g = probe_grid();
        let exec = Execution::default();
        let rule = |b: f64| MuModel::custom("abc", move |r: f64, e: f64| 0.3 * e / (r * r) + b / r + 0.1);
        for p in default_probes(&g) {
            let q0a = q0_field(&rule(0.0), &p.rho, &g).unwrap();
            let q0b = q0_field(&rule(0.8), &p.rho, &g).unwrap();
            assert!(linf(&q0a, &q0b) < 1e-8, "{}: {:e}", p.name, linf(&q0a, &q0b));
            let q1a = q1_field(&rule(0.0), &p.rho, &g, exec).unwrap().numeric;
            let q1b = q1_field(&rule(0.8), &p.rho, &g, exec).unwrap().numeric;
            assert!(linf(&q1a, &q1b) < 0.1 * DEFAULT_TOLERANCE, "{}: {:e}", p.name, linf(&q1a, &q1b));
        }
    }

    #[test]
    fn q0_is_linear_in_the_model() {
        let g = probe_grid();
        let rho = default_probes(&g)[2].rho.clone();
        let a = q0_field(&MuModel::family(0.3, 1.0, 0.2).unwrap(), &rho, &g).unwrap();
        let b = q0_field(&MuModel::family(1.1, -0.5, -0.7).unwrap(), &rho, &g).unwrap();
        let ab = q0_field(&MuModel::family(1.4, 0.5, -0.5).unwrap(), &rho, &g).unwrap();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        assert!(linf(&ab, &sum) < 1e-12);
    }

    #[test]
    fn probes_are_nodeless_and_normalized() {
        for g in [probe_grid(), GridSpec::new(vec![crate::grid::Dim::new(-4.0, 4.0, 32); 2]).unwrap()] {
            let probes = default_probes(&g);
            let names: Vec<&str> = probes.iter().map(|p| p.name.as_str()).collect();
            assert_eq!(names, ["gaussian", "double_gaussian", "raised_cosine"]);
            for p in &probes {
                assert!(p.rho.iter().all(|&r| r > 0.0));
                assert!((g.integrate(&p.rho) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn plane_wave_examples() {
        let g = GridSpec::uniform_1d(-5.0 * PI, 5.0 * PI, 128).unwrap();
        let c0 = plane_wave_calibration(0.0, &g, 2.0, 1.0).unwrap();
        assert!((c0.mean_p - 2.0).abs() < 1e-12);
        assert!(c0.c_admissible);
        assert!(c0.energy_shift.abs() < 1e-12);
        let c5 = plane_wave_calibration(5.0, &g, 2.0, 1.0).unwrap();
        assert!((c5.mean_p - 2.0).abs() < 1e-12);
        assert!(!c5.c_admissible);
        assert!((c5.energy_shift - 5.0).abs() < 1e-12);
        assert_eq!(plane_wave_calibration(0.0, &g, 0.0, 1.0).unwrap().mean_p, 0.0);
        assert!(plane_wave_calibration(0.0, &g, 2.05, 1.0).is_err());
    }

    #[test]
    fn report_json_shape() {
        let r = ConsistencyReport {
            model: "m".into(),
            probes: vec![ProbeResult { name: "p".into(), max_abs_dev: 0.5 }],
            tolerance: 1e-4,
            max_abs_deviation: 0.5,
            verdict: Verdict::Fail,
        };
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["verdict"], "fail");
        assert_eq!(v["probes"][0]["max_abs_dev"], 0.5);
    }
}
