//! Scenario files: strict JSON, unknown keys rejected at every level.

use std::path::{Path, PathBuf};

use madelung_core::dynamics::{DEFAULT_KAPPA, DEFAULT_RHO_FLOOR};
use madelung_core::{plane_wave, sample_gaussian, DofParams, GridSpec, HydroState, PotentialSpec, SimulationParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::read_snapshot;

/// Environment variable that replaces `outputs.dir`.
pub const OUT_ENV: &str = "LAMBDA_MADELUNG_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub grid: GridSpec,
    pub dofs: Vec<DofParams>,
    pub potential: PotentialSpec,
    pub initial: InitialState,
    pub integrator: Integrator,
    pub outputs: Outputs,
    /// Written into run.json; ignored on input so a manifest can be re-run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Gaussian {
        center: Vec<f64>,
        sigma: Vec<f64>,
        p0: Vec<f64>,
    },
    PlaneWave {
        p0: Vec<f64>,
    },
    /// Sidecar JSON of a snapshot written by `run`.
    Snapshot {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Integrator {
    pub dt: f64,
    pub n_steps: usize,
    pub report_every: usize,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_rho_floor")]
    pub rho_floor: f64,
}

fn default_kappa() -> f64 {
    DEFAULT_KAPPA
}

fn default_rho_floor() -> f64 {
    DEFAULT_RHO_FLOOR
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub dir: PathBuf,
    #[serde(default)]
    pub write_snapshots: bool,
    /// Steps between snapshots; defaults to `report_every`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Parse, apply the output-directory override, resolve relative paths
    /// against the config's directory and validate.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let InitialState::Snapshot { path } = &mut cfg.initial {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        match std::env::var_os(OUT_ENV) {
            Some(dir) if !dir.is_empty() => cfg.outputs.dir = PathBuf::from(dir),
            _ => {
                if cfg.outputs.dir.is_relative() {
                    cfg.outputs.dir = base.join(&cfg.outputs.dir);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.params().validate(&self.grid)?;
        let it = &self.integrator;
        if it.report_every == 0 {
            return Err(CliError::Config("integrator.report_every must be positive".into()));
        }
        if self.outputs.snapshot_every == Some(0) {
            return Err(CliError::Config("outputs.snapshot_every must be positive".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> SimulationParams {
        SimulationParams {
            dofs: self.dofs.clone(),
            potential: self.potential.clone(),
            dt: self.integrator.dt,
            kappa: self.integrator.kappa,
            rho_floor: self.integrator.rho_floor,
        }
    }

    pub fn snapshot_every(&self) -> usize {
        self.outputs.snapshot_every.unwrap_or(self.integrator.report_every)
    }

    pub fn initial_state(&self) -> Result<HydroState, CliError> {
        let state = match &self.initial {
            InitialState::Gaussian { center, sigma, p0 } => sample_gaussian(&self.grid, center, sigma, p0)?,
            InitialState::PlaneWave { p0 } => {
                let (state, snap) = plane_wave(&self.grid, p0)?;
                if snap.snapped != snap.requested {
                    log::warn!("plane-wave momentum {:?} snapped to {:?}", snap.requested, snap.snapped);
                }
                state
            }
            InitialState::Snapshot { path } => {
                let (grid, state) = read_snapshot(path)?;
                if grid != self.grid {
                    return Err(CliError::Config(format!(
                        "snapshot {} was written on a different grid",
                        path.display()
                    )));
                }
                state
            }
        };
        state.validate(&self.grid)?;
        Ok(state)
    }
}
