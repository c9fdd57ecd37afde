//! Batch front end: `vortex <command> <config.json>`.
//!
//! Exit codes are 0 on success, 1 when a computation fails or its outcome
//! is negative, and 2 when the command line or configuration is invalid.

pub mod commands;
pub mod config;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{ConfigError, Run, RunConfig, OUTPUT_ENV};

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Compute(vortex_core::Error),
    Io(std::io::Error),
    /// The command ran but its result is negative.
    Unmet(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Compute(e) => write!(f, "computation failed: {e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
            Failure::Unmet(m) => f.write_str(m),
        }
    }
}

impl From<vortex_core::Error> for Failure {
    fn from(e: vortex_core::Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

#[derive(Debug, Parser)]
#[command(name = "vortex", version, about = "Point-vortex equilibria, dynamics and desingularization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report which existence result the strengths satisfy.
    Check { config: PathBuf },
    /// Tabulate G and h at sample points.
    Green { config: PathBuf },
    /// Find and certify equilibria.
    Equilibrium { config: PathBuf },
    /// Integrate the point-vortex system from the configured positions.
    Simulate { config: PathBuf },
    /// Solve for steady vortex patches near an equilibrium.
    Desingularize { config: PathBuf },
    /// Run the Green-function contracts, gradient checks and Robin sweeps.
    Validate { config: PathBuf },
}

impl Command {
    fn config(&self) -> &Path {
        match self {
            Command::Check { config }
            | Command::Green { config }
            | Command::Equilibrium { config }
            | Command::Simulate { config }
            | Command::Desingularize { config }
            | Command::Validate { config } => config,
        }
    }
}

/// Reads, validates and builds the run described by the file at `path`.
pub fn load(path: &Path, output_override: Option<PathBuf>) -> Result<Run, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(RunConfig::parse(&text)?.build(base, output_override)?)
}

fn dispatch(cmd: &Command) -> Result<(), Failure> {
    let over = std::env::var_os(OUTPUT_ENV).map(PathBuf::from);
    let run = load(cmd.config(), over)?;
    match cmd {
        Command::Check { .. } => commands::check(&run),
        Command::Green { .. } => commands::green(&run),
        Command::Equilibrium { .. } => commands::equilibrium(&run),
        Command::Simulate { .. } => commands::simulate(&run),
        Command::Desingularize { .. } => commands::desingularize(&run),
        Command::Validate { .. } => commands::validate(&run),
    }
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("vortex: {f}");
            f.exit_code()
        }
    }
}
