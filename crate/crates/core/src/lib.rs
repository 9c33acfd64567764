//! Density/action ("Madelung") dynamics with a separate quantum strength λ_i
//! for every degree of freedom.
//!
//! λ_i = 0 gives classical Hamilton-Jacobi transport, λ_i = 1 (ħ) the
//! Schrödinger case, and mixed values hybrid quantum-classical systems.
//!
//! - [`grid`], [`params`], [`potential`], [`state`], [`stencil`]: shared
//!   discretization and data types.
//! - [`dynamics`]: RK4 method-of-lines solver for (ρ, S).
//! - [`oracle`]: split-step spectral Schrödinger propagator for cross-checks.
//! - [`observables`]: ensemble statistics, energy and the averaged
//!   Hamilton-Jacobi residual.
//! - [`consistency`]: variational consistency checks on momentum-variance
//!   models.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod consistency;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod grid;
pub mod observables;
pub mod oracle;
pub mod params;
pub mod potential;
pub mod state;
pub mod stencil;

pub use dynamics::{evolve, step, Dynamics, Evolution, SimulationParams};
pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::{Dim, GridSpec};
pub use observables::{global_stats, ObservableReport};
pub use params::DofParams;
pub use potential::PotentialSpec;
pub use state::{plane_wave, sample_gaussian, ComplexField, HydroState};
