//! `lsscatter` command line.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Error;

use super::config::{CaseConfig, Mode};
use super::study::{mode_name, run_case, run_convergence, run_timing};

#[derive(Debug, Parser)]
#[command(name = "lsscatter", version, about = "2D Lippmann-Schwinger scattering solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one case and dump the fields.
    Solve(CommonArgs),
    /// Run a convergence study over the configured grids.
    Converge(CommonArgs),
    /// Time operator applications and solves over the configured grids.
    Timing(CommonArgs),
}

#[derive(Debug, clap::Args)]
pub struct CommonArgs {
    /// JSON case file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Indicator treatment; overrides the config.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// `key=value` config override; dotted keys reach nested fields.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Format { .. } => EXIT_IO,
        Error::MaxIterations { .. }
        | Error::BetaNotConverged { .. }
        | Error::ToleranceNotMet { .. }
        | Error::TruncationNotConverged { .. } => EXIT_NOT_CONVERGED,
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cmd: &Command) -> Result<(), Error> {
    let (Command::Solve(args) | Command::Converge(args) | Command::Timing(args)) = cmd;
    let cfg = CaseConfig::load(&args.config, &args.overrides)?;
    let mode = args.mode.unwrap_or(cfg.mode);
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    match cmd {
        Command::Solve(_) => {
            let (res, files) = run_case(&cfg, mode, &args.out)?;
            println!(
                "{} ({}): n={} iterations={} residual={:.3e}",
                cfg.name,
                mode_name(mode),
                res.total_field.grid().n(),
                res.iterations,
                res.final_relative_residual
            );
            for p in [files.total, files.scattered, files.csv].into_iter().flatten() {
                println!("wrote {}", p.display());
            }
        }
        Command::Converge(_) => {
            let rows = run_convergence(&cfg, mode, &args.out)?;
            println!("{}", super::io::CONVERGENCE_HEADER);
            for r in rows {
                println!("{}", r.to_csv());
            }
        }
        Command::Timing(_) => {
            let rows = run_timing(&cfg, mode, &args.out)?;
            println!("{}", super::io::TIMING_HEADER);
            for r in rows {
                println!("{}", r.to_csv());
            }
        }
    }
    Ok(())
}
