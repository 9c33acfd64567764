//! Command-line front end for `madelung-core`: JSON scenario files in,
//! CSV/JSON/binary artifacts out.
//!
//! Exit statuses: 0 success, 2 usage or config error, 3 numerical failure,
//! 4 I/O failure, 5 verification failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use madelung_core::consistency::{MuModel, DEFAULT_TOLERANCE};
use madelung_core::Execution;

pub mod commands;
pub mod config;
mod error;
pub mod output;

pub use config::ScenarioConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "lambda-madelung", version, about = "Density/action dynamics with a tunable quantum strength")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve a scenario and write observables.csv and run.json.
    Run { config: PathBuf },
    /// Compare the density against the split-step wavefunction oracle.
    CompareOracle {
        config: PathBuf,
        /// Largest accepted final L-infinity density deviation.
        #[arg(long, default_value_t = commands::DEFAULT_COMPARE_THRESHOLD)]
        threshold: f64,
    },
    /// Repeat a scenario for each lambda and write sweep.csv.
    Sweep {
        config: PathBuf,
        /// Comma-separated lambda values.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        lambdas: Vec<f64>,
        /// Run the evolutions one after another.
        #[arg(long)]
        serial: bool,
    },
    /// Check whether a momentum-variance model is self-consistent.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Family member mu = a*eta/rho^2 + b/rho + c.
    #[arg(
        long,
        num_args = 3,
        value_names = ["A", "B", "C"],
        allow_negative_numbers = true,
        conflicts_with = "custom",
        required_unless_present = "custom"
    )]
    pub family: Option<Vec<f64>>,
    /// Built-in rule: eta, rho_eta or fisher.
    #[arg(long)]
    pub custom: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Points of the 1-D probe grid.
    #[arg(long, default_value_t = commands::DEFAULT_PROBE_POINTS)]
    pub points: usize,
}

impl CheckArgs {
    pub fn model(&self) -> Result<MuModel, CliError> {
        match (&self.family, &self.custom) {
            (Some(v), None) => Ok(MuModel::family(v[0], v[1], v[2])?),
            (None, Some(name)) => MuModel::builtin(name).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown rule {name:?}; expected one of {}",
                    MuModel::BUILTIN_NAMES.join(", ")
                ))
            }),
            _ => Err(CliError::Usage("give exactly one of --family or --custom".into())),
        }
    }
}

/// Execute a parsed command.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run { config } => {
            let cfg = ScenarioConfig::load(config)?;
            let out = commands::run(&cfg)?;
            log::info!("wrote {} reports to {}", out.reports.len(), out.dir.display());
        }
        Command::CompareOracle { config, threshold } => {
            let cfg = ScenarioConfig::load(config)?;
            let r = commands::compare_oracle(&cfg, *threshold)?;
            log::info!("final L-infinity deviation {:e}", r.linf_rho.last().copied().unwrap_or(0.0));
        }
        Command::Sweep { config, lambdas, serial } => {
            let cfg = ScenarioConfig::load(config)?;
            let exec = if *serial { Execution::Sequential } else { Execution::default() };
            commands::sweep(&cfg, lambdas, exec)?;
        }
        Command::Check(args) => {
            let mu = args.model()?;
            let report = commands::check(&mu, args.tolerance, args.points, Execution::Sequential)?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
            println!("{json}");
            if !commands::check_passed(&report) {
                return Err(CliError::Verification(format!(
                    "{}: max deviation {:e} above tolerance {:e}",
                    report.model, report.max_abs_deviation, report.tolerance
                )));
            }
        }
    }
    Ok(())
}

/// Parse `args`, execute, report errors on standard error and return the
/// exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
