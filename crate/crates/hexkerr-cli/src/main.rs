//! `hexkerr` — CSV experiments on the seven-mode Kerr cavity model.
//!
//! Every run is a pure function of its configuration: a flat `key = value`
//! file, overridden by flags, fully validated before any work starts.  On
//! failure the binary prints a single machine-parsable `error: …` line and
//! exits nonzero (2 when the conservation oracle itself fails, 1 otherwise).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::{Overrides, RunConfig};

/// Drive sweeps, hexagon branches, squeezing spectra and conservation
/// reports for a seven-mode Kerr cavity, written as CSV artifacts.
#[derive(Parser)]
#[command(name = "hexkerr", version, arg_required_else_help = true)]
struct Cli {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory for CSV artifacts (created if missing).
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    /// Seed for the pseudo-random perturbation phases.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Cavity detuning; when absent it is tied to the drive, delta = |E_in|^2.
    #[arg(long, global = true, allow_negative_numbers = true)]
    delta: Option<f64>,

    /// Drive intensity |E_in|^2 for single-drive commands and branch anchors.
    #[arg(long, global = true)]
    drive: Option<f64>,

    /// Mode combination for `spectrum`: W, Q or X (optionally Q2/X2).
    #[arg(long, global = true)]
    observable: Option<String>,

    /// Extra quadrature angle in radians sampled by `spectrum`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    angle: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward and backward drive sweeps with a jump/drop summary.
    Hysteresis,
    /// Newton continuation of the stationary hexagon across the drive range.
    Steady,
    /// Noise spectrum of one mode combination at one drive.
    Spectrum,
    /// Optimal low-frequency squeezing of W, Q and X across the drive range.
    BestSqueeze,
    /// Fock-space conservation report at the configured cutoffs.
    Oracle,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            // One line no matter how deep the cause chain goes.
            let line = format!("{err:#}").replace('\n', "; ");
            eprintln!("error: {line}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    init_threads()?;
    let over = Overrides {
        out_dir: cli.out_dir,
        seed: cli.seed,
        delta: cli.delta,
        drive: cli.drive,
        observable: cli.observable,
        angle: cli.angle,
    };
    let cfg = RunConfig::load(cli.config.as_deref(), &over)?;

    match cli.command {
        Command::Hysteresis => commands::hysteresis(&cfg)?,
        Command::Steady => commands::steady(&cfg)?,
        Command::Spectrum => commands::spectrum(&cfg)?,
        Command::BestSqueeze => commands::best_squeeze(&cfg)?,
        Command::Oracle => {
            let report = commands::oracle(&cfg)?;
            if !report.passed() {
                eprintln!("error: {}", report.failure_line());
                return Ok(ExitCode::from(2));
            }
            println!(
                "oracle: all conservation checks passed on {} states; worst commutator {:.3e}, N1-N4 violation {:.3e} -> {}",
                report.dim,
                report.worst_conservation,
                report.violation,
                cfg.out_dir.display()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Apply the `HEXKERR_THREADS` cap before any parallel section spins up.
fn init_threads() -> anyhow::Result<()> {
    match std::env::var("HEXKERR_THREADS") {
        Ok(raw) => {
            let n: usize = raw
                .trim()
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| anyhow!("HEXKERR_THREADS must be a positive integer, got {raw:?}"))?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("cannot size the worker pool")
        }
        Err(_) => Ok(()),
    }
}
