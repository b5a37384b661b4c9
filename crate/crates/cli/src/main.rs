//! `priorquant`: design, evaluate, sweep and simulate prior quantizers for
//! teams of detectors that fuse votes `L`-out-of-`N`.

mod commands;
mod config;
mod error;
mod output;
mod qfile;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "priorquant", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (TOML). Built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Seed for design restarts and simulation; overrides the config.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,

    /// Number of p0 grid points, both ends included.
    #[arg(long, global = true, value_name = "INT", default_value_t = 1001)]
    grid: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Design identical and diverse quantizers and write quantizer files.
    Design,
    /// Risk curves of a quantizer file over the p0 grid.
    Evaluate {
        /// Quantizer file written by `design` or by hand.
        quantizer: PathBuf,
    },
    /// MBRE against levels, thresholds against p0, risk against the fusion rule.
    Sweep,
    /// Monte Carlo check of the analytic error probabilities and risk.
    Simulate {
        /// Quantizer file; the team uses the exact prior when omitted.
        quantizer: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::defaults(),
    };
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.override_seed(seed);
    }
    if cli.grid < 2 {
        return Err(CliError::Config {
            file: "--grid".into(),
            line: None,
            message: format!("need at least 2 grid points, got {}", cli.grid),
        });
    }
    match cli.command {
        Command::Design => commands::design(&cfg),
        Command::Evaluate { quantizer } => {
            let path = commands::evaluate(&cfg, &quantizer, cli.grid)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Sweep => {
            let result = commands::sweep(&cfg, cli.grid);
            if let Ok(paths) = &result {
                for p in paths {
                    println!("wrote {}", p.display());
                }
            }
            result.map(|_| ())
        }
        Command::Simulate { quantizer } => {
            let path = commands::simulate(&cfg, quantizer.as_deref())?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
