//! The four subcommands, as library functions returning their artifacts.

use std::path::PathBuf;

use madelung_core::consistency::{check_consistency, default_probes, ConsistencyReport, MuModel, Verdict};
use madelung_core::dynamics::{evolve, evolve_with, Renormalization};
use madelung_core::observables::fmt_f64;
use madelung_core::oracle::{to_wavefunction, wavefunction_lambda, SplitStep};
use madelung_core::{Execution, GridSpec, ObservableReport};
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::output::{create_dir, observables_csv, write_json, write_snapshot, write_text};

pub const DEFAULT_COMPARE_THRESHOLD: f64 = 1e-3;
pub const DEFAULT_PROBE_POINTS: usize = 128;
/// Half-width of the 1-D box holding the consistency probes.
pub const PROBE_HALF_WIDTH: f64 = 8.0;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub reports: Vec<ObservableReport>,
    pub renormalizations: Vec<Renormalization>,
    pub snapshots: Vec<PathBuf>,
}

fn manifest(command: &str, extra: serde_json::Value) -> serde_json::Value {
    let mut m = serde_json::json!({
        "command": command,
        "package": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
    });
    if let (Some(m), serde_json::Value::Object(extra)) = (m.as_object_mut(), extra) {
        m.extend(extra);
    }
    m
}

/// Evolve the scenario and write observables.csv, run.json and, if
/// requested, snapshots.
pub fn run(cfg: &ScenarioConfig) -> Result<RunOutput, CliError> {
    let dir = cfg.outputs.dir.clone();
    create_dir(&dir)?;
    let state = cfg.initial_state()?;
    let params = cfg.params();
    let it = &cfg.integrator;
    let every = cfg.snapshot_every();

    let mut snapshots = Vec::new();
    let mut io_failure = None;
    let ev = evolve_with(&state, &cfg.grid, &params, it.n_steps, it.report_every, |n, s| {
        if cfg.outputs.write_snapshots && io_failure.is_none() && n % every == 0 {
            match write_snapshot(&dir, n, &cfg.grid, s) {
                Ok(p) => snapshots.push(p),
                Err(e) => io_failure = Some(e),
            }
        }
    })?;
    if let Some(e) = io_failure {
        return Err(e);
    }

    write_text(&dir.join("observables.csv"), &observables_csv(&ev.reports, cfg.dofs.len()))?;
    let mut echoed = cfg.clone();
    echoed.manifest = Some(manifest(
        "run",
        serde_json::json!({
            "reports": ev.reports.len(),
            "renormalizations": ev
                .renormalizations
                .iter()
                .map(|r| serde_json::json!({"step": r.step, "drift": r.drift}))
                .collect::<Vec<_>>(),
        }),
    ));
    write_json(&dir.join("run.json"), &echoed)?;
    Ok(RunOutput {
        dir,
        reports: ev.reports,
        renormalizations: ev.renormalizations,
        snapshots,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub t_samples: Vec<f64>,
    pub linf_rho: Vec<f64>,
    pub l2_rho: Vec<f64>,
}

/// Run the hydrodynamic solver and the split-step wavefunction oracle side
/// by side, comparing densities at every report step. Writes compare.json;
/// fails verification when the final L∞ exceeds `threshold`.
pub fn compare_oracle(cfg: &ScenarioConfig, threshold: f64) -> Result<CompareReport, CliError> {
    if !(threshold > 0.0) {
        return Err(CliError::Usage(format!("threshold must be positive, got {threshold}")));
    }
    let lambda = wavefunction_lambda(&cfg.dofs)?;
    let dir = cfg.outputs.dir.clone();
    create_dir(&dir)?;
    let state = cfg.initial_state()?;
    let params = cfg.params();
    let it = &cfg.integrator;
    let oracle = SplitStep::new(&cfg.grid, &cfg.dofs, &cfg.potential, it.dt)?;
    let mut psi = to_wavefunction(&state, &cfg.grid, lambda)?;

    let grid = &cfg.grid;
    let mut report = CompareReport {
        t_samples: Vec::new(),
        linf_rho: Vec::new(),
        l2_rho: Vec::new(),
    };
    evolve_with(&state, grid, &params, it.n_steps, it.report_every, |n, s| {
        if n > 0 {
            oracle.step_in_place(&mut psi.psi);
        }
        if n % it.report_every == 0 {
            let diff: Vec<f64> = s.rho.iter().zip(psi.density()).map(|(a, b)| a - b).collect();
            report.t_samples.push(s.t);
            report.linf_rho.push(diff.iter().map(|d| d.abs()).fold(0.0, f64::max));
            report.l2_rho.push(grid.inner(&diff, &diff).sqrt());
        }
    })?;
    write_json(&dir.join("compare.json"), &report)?;

    let last = *report.linf_rho.last().expect("initial sample");
    if last > threshold {
        return Err(CliError::Verification(format!(
            "final L-infinity density deviation {last:e} exceeds {threshold:e}"
        )));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub outcome: Result<ObservableReport, String>,
}

pub fn sweep_header(ndof: usize) -> String {
    let mut cols = vec!["lambda".to_string()];
    for i in 0..ndof {
        cols.extend([format!("delta_x_{i}"), format!("delta_p_{i}"), format!("uncertainty_{i}")]);
    }
    cols.extend(["energy".to_string(), "error".to_string()]);
    cols.join(",")
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl SweepRow {
    pub fn csv(&self, ndof: usize) -> String {
        let mut cols = vec![fmt_f64(self.lambda)];
        match &self.outcome {
            Ok(r) => {
                for i in 0..ndof {
                    cols.extend([r.delta_x[i], r.delta_p[i], r.uncertainty_product[i]].map(fmt_f64));
                }
                cols.push(fmt_f64(r.energy));
                cols.push(String::new());
            }
            Err(e) => {
                cols.extend(std::iter::repeat_n(String::new(), 3 * ndof + 1));
                cols.push(csv_quote(e));
            }
        }
        cols.join(",")
    }
}

/// One evolution per λ (applied to every degree of freedom), rows sorted by
/// λ. Writes sweep.csv; fails if any run failed.
pub fn sweep(cfg: &ScenarioConfig, lambdas: &[f64], exec: Execution) -> Result<Vec<SweepRow>, CliError> {
    if lambdas.is_empty() {
        return Err(CliError::Usage("at least one lambda is required".into()));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(CliError::Usage(format!("lambda values must be non-negative, got {bad}")));
    }
    let dir = cfg.outputs.dir.clone();
    create_dir(&dir)?;
    let state = cfg.initial_state()?;
    let base = cfg.params();
    let it = &cfg.integrator;

    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rows = exec.map_slice(&sorted, |&lambda| {
        let params = base.clone().with_lambda(lambda);
        let outcome = evolve(&state, &cfg.grid, &params, it.n_steps, it.report_every)
            .map(|ev| ev.reports.last().cloned().expect("initial report"))
            .map_err(|e| e.to_string());
        SweepRow { lambda, outcome }
    });

    let ndof = cfg.dofs.len();
    let mut text = sweep_header(ndof);
    text.push('\n');
    for r in &rows {
        text.push_str(&r.csv(ndof));
        text.push('\n');
    }
    write_text(&dir.join("sweep.csv"), &text)?;

    let failed: Vec<String> = rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().err().map(|e| format!("lambda {}: {e}", r.lambda)))
        .collect();
    if !failed.is_empty() {
        return Err(CliError::Numerics(failed.join("; ")));
    }
    Ok(rows)
}

pub fn probe_grid(n_points: usize) -> Result<GridSpec, CliError> {
    Ok(GridSpec::uniform_1d(-PROBE_HALF_WIDTH, PROBE_HALF_WIDTH, n_points)?)
}

/// Consistency check of `mu` on the default probes of a 1-D grid.
pub fn check(mu: &MuModel, tolerance: f64, n_points: usize, exec: Execution) -> Result<ConsistencyReport, CliError> {
    if !(tolerance > 0.0) {
        return Err(CliError::Usage(format!("tolerance must be positive, got {tolerance}")));
    }
    let grid = probe_grid(n_points)?;
    Ok(check_consistency(mu, &default_probes(&grid), &grid, tolerance, exec)?)
}

pub fn check_passed(report: &ConsistencyReport) -> bool {
    report.verdict == Verdict::Pass
}
