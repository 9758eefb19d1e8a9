//! Command-line front end of `exotic-curv`: configuration files, suite
//! execution, scans and profile plots.
//!
//! The binary is a thin wrapper around [`run`], which parses the arguments,
//! sets up the worker pool and dispatches to the commands.

pub mod commands;
pub mod config;
pub mod output;

use clap::{Parser, Subcommand};
use commands::{CommandError, Format, Options, ProfileKind, EXIT_CONFIG, EXIT_PASS, EXIT_RUNTIME, SEED_ENV};
use std::ffi::OsString;
use std::path::PathBuf;

/// Numerical verification of the positive-curvature deformation of the
/// Gromoll-Meyer sphere.
#[derive(Debug, Parser)]
#[command(name = "exotic-curv", version, about)]
pub struct Cli {
    /// Configuration file (TOML). Defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Output formats, comma separated.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    pub format: Vec<Format>,
    /// Command.
    #[command(subcommand)]
    pub command: Command,
}

/// The commands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run verification suites and write a JSON report.
    Verify {
        /// Suites to run, comma separated; all configured suites by default.
        #[arg(long, value_delimiter = ',', value_name = "NAME[,NAME]")]
        suite: Vec<String>,
    },
    /// Scan sectional curvature over the (t, theta) grid.
    Scan,
    /// Write a profile along the meridian or the zero-locus boundary.
    Profile {
        /// Quantity to profile.
        #[arg(value_enum)]
        what: ProfileKind,
    },
}

fn dispatch(cli: &Cli, opts: &Options) -> Result<i32, CommandError> {
    match &cli.command {
        Command::Verify { suite } => commands::cmd_verify(opts, suite),
        Command::Scan => commands::cmd_scan(opts),
        Command::Profile { what } => commands::cmd_profile(opts, *what),
    }
}

/// Runs the command line `args` and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let opts = Options {
        config: cli.config.clone(),
        out: cli.out.clone(),
        formats: cli.format.clone(),
        seed: std::env::var(SEED_ENV).ok(),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        builder = builder.num_threads(n as usize);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("runtime error: cannot start worker pool: {e}");
            return EXIT_RUNTIME;
        }
    };
    match pool.install(|| dispatch(&cli, &opts)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
