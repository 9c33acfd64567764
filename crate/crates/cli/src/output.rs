//! Artifact files: observable CSV, JSON documents and binary snapshots.
//!
//! A snapshot is one flat little-endian f64 file per field in row-major
//! order (`rho_NNNNNN.f64`, `s_NNNNNN.f64`, the latter holding the periodic
//! action residual) plus a JSON sidecar `snapshot_NNNNNN.json` with the grid,
//! time, linear action background k0 and the two file names.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use madelung_core::{GridSpec, HydroState, ObservableReport};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn observables_csv(reports: &[ObservableReport], ndof: usize) -> String {
    let mut out = ObservableReport::csv_header(ndof);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotMeta {
    pub grid: GridSpec,
    pub step: usize,
    pub t: f64,
    pub k0: Vec<f64>,
    pub rho: String,
    pub s: String,
}

fn write_f64s(path: &Path, values: &[f64]) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    for v in values {
        w.write_all(&v.to_le_bytes()).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn read_f64s(path: &Path, n: usize) -> Result<Vec<f64>, CliError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.len() != 8 * n {
        return Err(CliError::Config(format!(
            "{}: expected {n} values, found {} bytes",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

/// Write the snapshot of `state` taken after `step` steps; returns the
/// sidecar path.
pub fn write_snapshot(dir: &Path, step: usize, grid: &GridSpec, state: &HydroState) -> Result<PathBuf, CliError> {
    let rho = format!("rho_{step:06}.f64");
    let s = format!("s_{step:06}.f64");
    write_f64s(&dir.join(&rho), &state.rho)?;
    write_f64s(&dir.join(&s), &state.s_residual)?;
    let meta = SnapshotMeta {
        grid: grid.clone(),
        step,
        t: state.t,
        k0: state.k0.clone(),
        rho,
        s,
    };
    let path = dir.join(format!("snapshot_{step:06}.json"));
    write_json(&path, &meta)?;
    Ok(path)
}

pub fn read_snapshot(sidecar: &Path) -> Result<(GridSpec, HydroState), CliError> {
    let text = fs::read_to_string(sidecar).map_err(|e| io_err(sidecar, e))?;
    let meta: SnapshotMeta =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", sidecar.display())))?;
    let dir = sidecar.parent().unwrap_or(Path::new(""));
    let n = meta.grid.len();
    let state = HydroState {
        t: meta.t,
        rho: read_f64s(&dir.join(&meta.rho), n)?,
        s_residual: read_f64s(&dir.join(&meta.s), n)?,
        k0: meta.k0,
    };
    Ok((meta.grid, state))
}
