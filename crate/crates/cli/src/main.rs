use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cbandit::config::{ExperimentConfig, Format, Overrides};
use cbandit::{execute, Command};

/// Curricular bandit experiments: closed forms, Monte-Carlo estimates,
/// exploit-probability sweeps and the two-digit Thompson sampling study.
#[derive(Debug, Parser)]
#[command(name = "cbandit", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML config file; missing sections take their defaults.
    #[arg(long, global = true, env = "CBANDIT_CONFIG")]
    config: Option<PathBuf>,

    /// Master seed (overrides sim.master_seed).
    #[arg(long, global = true, env = "CBANDIT_SEED")]
    seed: Option<u64>,

    /// Output directory (overrides output.directory).
    #[arg(long, global = true, env = "CBANDIT_OUT")]
    out: Option<PathBuf>,

    /// Monte-Carlo trials for simulate, sweep and diagnostics.
    #[arg(long, global = true, env = "CBANDIT_TRIALS")]
    trials: Option<u64>,

    /// Horizon for whichever subcommand runs.
    #[arg(long, global = true, env = "CBANDIT_HORIZON")]
    horizon: Option<u64>,

    /// Output formats; repeat the flag or separate with commas.
    #[arg(long = "format", global = true, env = "CBANDIT_FORMAT", value_delimiter = ',')]
    formats: Vec<Format>,

    /// Worker threads. Affects speed only, never results.
    #[arg(long, global = true, env = "CBANDIT_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Closed-form and exact-recursion values over a policy grid.
    Values,
    /// Monte-Carlo values next to the analytic ones, with z-scores.
    Simulate,
    /// Sweep the exploit count m per horizon and report m*, p*_T.
    Sweep,
    /// Thompson sampling against rate-distortion Thompson sampling.
    Finite,
    /// Coupled and decoupled summands f_n and f~_n.
    Diagnostics,
    /// Rate-distortion curve of the two-digit experiment.
    RdCurve,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::Values => Command::Values,
        Cmd::Simulate => Command::Simulate,
        Cmd::Sweep => Command::Sweep,
        Cmd::Finite => Command::Finite,
        Cmd::Diagnostics => Command::Diagnostics,
        Cmd::RdCurve => Command::RdCurve,
    };
    let mut cfg = match &cli.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
        },
        None => ExperimentConfig::default(),
    };
    cfg.apply(&Overrides {
        seed: cli.seed,
        out: cli.out,
        trials: cli.trials,
        horizon: cli.horizon,
        formats: cli.formats,
    });
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match execute(command, &cfg, cli.threads) {
        Ok(manifest) => {
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            for e in &manifest.errors {
                eprintln!("error: {e}");
            }
            if manifest.errors.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
