//! `cavityw`: config-driven runner for the W-state transfer simulator.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::artifacts::{sha256_hex, Manifest, OutDir};
use crate::config::{read_config, resolve, Command, Overrides};
pub use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "cavityw", version, about = "W-state transfer between cavity groups through a coupler qutrit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Evaluate the matching and dispersive conditions of the device.
    Check(CommonArgs),
    /// Evolve one transfer and report the final fidelity.
    Transfer(CommonArgs),
    /// Fidelity versus b for each crosstalk level.
    SweepB(CommonArgs),
    /// Fidelity versus the breakage ratio r.
    SweepR(CommonArgs),
    /// Single-pair equivalence checks against a brute-force propagator.
    Oracle(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Artifact directory [default: run.out_dir, then $CAVITYW_OUT, then ./cavityw-out].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps; 0 uses every core.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Integrator tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

impl CliCommand {
    fn split(&self) -> (Command, &CommonArgs) {
        match self {
            CliCommand::Check(a) => (Command::Check, a),
            CliCommand::Transfer(a) => (Command::Transfer, a),
            CliCommand::SweepB(a) => (Command::SweepB, a),
            CliCommand::SweepR(a) => (Command::SweepR, a),
            CliCommand::Oracle(a) => (Command::Oracle, a),
        }
    }
}

/// Runs one command, printing progress lines to stdout. Once the config is
/// valid a manifest is written even when the run fails.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let (command, args) = cli.command.split();
    let (file, bytes) = read_config(&args.config)?;
    let overrides = Overrides { out: args.out.clone(), workers: args.workers, tol: args.tol };
    let cfg = resolve(file, command, &overrides)?;
    let mut out = OutDir::create(&cfg.out_dir)?;

    let result = commands::execute(&cfg, &mut out);
    let (diagnostics, error) = match &result {
        Ok(o) => (o.diagnostics.clone(), o.threshold_failure.clone().map(CliError::Threshold)),
        Err(e) => (serde_json::Value::Null, Some(e.clone())),
    };
    let resolved_json = serde_json::to_vec(&cfg.resolved).map_err(|e| CliError::Io(e.to_string()))?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: command.as_str(),
        config_path: args.config.display().to_string(),
        input_sha256: sha256_hex(&bytes),
        resolved_config: &cfg.resolved,
        resolved_sha256: sha256_hex(&resolved_json),
        artifacts: out.artifacts().to_vec(),
        status: if error.is_none() { "ok" } else { "error" },
        error: error.as_ref().map(|e| e.report()),
        diagnostics,
    };
    out.write_json("manifest.json", &manifest)?;

    let outcome = result?;
    for line in &outcome.lines {
        println!("{line}");
    }
    match error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
