use madelung_core::consistency::{
    check_consistency, default_probes, gateaux_derivative, q0_field, q1_field, MuModel, Verdict,
    DEFAULT_TOLERANCE,
};
use madelung_core::dynamics::{continuity_rhs, hj_rhs};
use madelung_core::observables::{axiom1_residual, uncertainty_check};
use madelung_core::oracle::{from_wavefunction, split_step, to_wavefunction};
use madelung_core::{
    global_stats, step, DofParams, Execution, GridSpec, HydroState, PotentialSpec, SimulationParams,
};
use proptest::prelude::*;
use std::f64::consts::PI;

fn grid() -> GridSpec {
    GridSpec::uniform_1d(-10.0, 10.0, 256).unwrap()
}

/// Two-bump Gaussian mixture with a smooth periodic phase. Tails are below
/// 1e-12 at the box edge unless `bg` lifts them.
fn mixture(g: &GridSpec, c: [f64; 2], s: [f64; 2], w: f64, amp: [f64; 2], k0: f64, bg: f64) -> HydroState {
    let l = g.dim(0).length();
    let xs = g.coords(0);
    let mut rho: Vec<f64> = xs
        .iter()
        .map(|x| {
            let a = (-(x - c[0]).powi(2) / (2.0 * s[0] * s[0])).exp() / s[0];
            let b = (-(x - c[1]).powi(2) / (2.0 * s[1] * s[1])).exp() / s[1];
            w * a + (1.0 - w) * b + bg
        })
        .collect();
    let n = g.integrate(&rho);
    rho.iter_mut().for_each(|r| *r /= n);
    let s_residual = xs
        .iter()
        .map(|x| amp[0] * (2.0 * PI * x / l).sin() + amp[1] * (4.0 * PI * x / l + 0.3).cos())
        .collect();
    HydroState {
        t: 0.0,
        rho,
        s_residual,
        k0: vec![k0],
    }
}

fn states(bg: std::ops::Range<f64>) -> impl Strategy<Value = HydroState> {
    (
        (-1.0..1.0f64, bg),
        -1.0..1.0f64,
        0.8..1.2f64,
        0.8..1.2f64,
        0.1..0.9f64,
        -0.5..0.5f64,
        -0.5..0.5f64,
        -3i32..=3,
    )
        .prop_map(|((c0, bg), c1, s0, s1, w, a0, a1, n)| {
            let g = grid();
            let k0 = n as f64 * 2.0 * PI / g.dim(0).length();
            mixture(&g, [c0, c1], [s0, s1], w, [a0, a1], k0, bg)
        })
}

fn smooth_state() -> impl Strategy<Value = HydroState> {
    states(0.0..1e-3)
}

fn nodeless_state() -> impl Strategy<Value = HydroState> {
    states(1e-4..1e-2)
}

fn free(lambda: f64) -> SimulationParams {
    SimulationParams::new(vec![DofParams::new(1.0, lambda).unwrap()], PotentialSpec::Free, 1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn continuity_conserves_mass(state in smooth_state(), lambda in 0.0..2.0f64) {
        let g = grid();
        let rhs = continuity_rhs(&state, &g, &free(lambda)).unwrap();
        prop_assert!(g.integrate(&rhs).abs() < 1e-10);
    }

    #[test]
    fn classical_dust_at_rest_is_fixed(state in smooth_state()) {
        let g = grid();
        let mut state = state;
        state.s_residual.iter_mut().for_each(|s| *s = 0.0);
        state.k0 = vec![0.0];
        let p = free(0.0);
        prop_assert!(continuity_rhs(&state, &g, &p).unwrap().iter().all(|&v| v == 0.0));
        prop_assert!(hj_rhs(&state, &g, &p).unwrap().iter().all(|&v| v == 0.0));
        let next = step(&state, &g, &p).unwrap().state;
        prop_assert_eq!(next.rho, state.rho);
    }

    #[test]
    fn axiom1_holds_at_quarter_kappa(state in smooth_state(), lambda in 0.1..2.0f64) {
        let g = grid();
        let r = axiom1_residual(&state, &g, &free(lambda)).unwrap();
        prop_assert!(r.abs() < 1e-8, "{r:e}");
    }

    #[test]
    fn residual_is_affine_in_kappa(state in smooth_state(), kappa in 0.05..3.0f64) {
        let g = grid();
        let at = |k: f64| axiom1_residual(&state, &g, &free(1.0).with_kappa(k)).unwrap();
        let slope = at(1.25) - at(0.25);
        prop_assert!((at(kappa) - at(0.25) - slope * (kappa - 0.25)).abs() < 1e-9);
    }

    #[test]
    fn uncertainty_bound(state in smooth_state(), lambda in 0.1..2.0f64, kappa in 0.1..1.0f64) {
        let g = grid();
        let report = global_stats(&state, &g, &free(lambda).with_kappa(kappa)).unwrap();
        let c = uncertainty_check(&report, &[lambda], kappa)[0];
        prop_assert!(c.product >= c.bound - 1e-9, "{c:?}");
        prop_assert!(c.satisfied);
    }

    #[test]
    fn wavefunction_round_trip(state in nodeless_state()) {
        let g = grid();
        let psi = to_wavefunction(&state, &g, 1.0).unwrap();
        let back = from_wavefunction(&psi, &g, 1.0, &state.k0).unwrap();
        let again = to_wavefunction(&back, &g, 1.0).unwrap();
        let phase = (again.psi[128] / psi.psi[128]).arg();
        let rot = num_complex::Complex64::from_polar(1.0, -phase);
        let dev = psi.psi.iter().zip(&again.psi).map(|(a, b)| (a - b * rot).norm()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-10, "{dev:e}");
    }

    #[test]
    fn split_step_is_unitary(state in smooth_state(), dt in 1e-4..1e-1f64) {
        let g = grid();
        let dofs = [DofParams::quantum(1.0)];
        let psi = to_wavefunction(&state, &g, 1.0).unwrap();
        let next = split_step(&psi, &g, &dofs, &PotentialSpec::harmonic_1d(0.5, 0.3), dt).unwrap();
        prop_assert!((next.norm(&g) - psi.norm(&g)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn family_is_consistent(a in 0.0..2.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64) {
        let g = GridSpec::uniform_1d(-8.0, 8.0, 96).unwrap();
        let mu = MuModel::family(a, b, c).unwrap();
        let r = check_consistency(&mu, &default_probes(&g), &g, DEFAULT_TOLERANCE, Execution::default()).unwrap();
        prop_assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn b_never_matters(a in 0.0..2.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64) {
        let g = GridSpec::uniform_1d(-8.0, 8.0, 64).unwrap();
        let base = MuModel::family(a, 0.0, c).unwrap();
        let mu = MuModel::family(a, b, c).unwrap();
        for p in default_probes(&g) {
            prop_assert_eq!(q0_field(&mu, &p.rho, &g).unwrap(), q0_field(&base, &p.rho, &g).unwrap());
            let x = q1_field(&mu, &p.rho, &g, Execution::default()).unwrap().numeric;
            let y = q1_field(&base, &p.rho, &g, Execution::default()).unwrap().numeric;
            prop_assert!(x.iter().zip(&y).all(|(u, v)| (u - v).abs() < 1e-10));
        }
    }

    #[test]
    fn execution_modes_agree(a in 0.0..2.0f64) {
        let g = GridSpec::uniform_1d(-8.0, 8.0, 64).unwrap();
        let mu = MuModel::family(a, 0.0, 0.0).unwrap();
        let rho = default_probes(&g).remove(1).rho;
        let f = |r: &[f64]| madelung_core::consistency::density_functional(&mu, r, &g);
        let seq = gateaux_derivative(f, &rho, &g, None, Execution::Sequential).unwrap();
        let par = gateaux_derivative(f, &rho, &g, None, Execution::Parallel).unwrap();
        prop_assert_eq!(seq, par);
    }
}
