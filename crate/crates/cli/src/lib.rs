//! Config-driven front end: `graphon-gl --config run.toml`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input or violated
//! precondition, 3 infinite energy, 4 non-convergence (outputs are still
//! written).

pub mod commands;
pub mod config;
pub mod outputs;

use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INFINITE: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {msg}", path.display())]
    Io { path: PathBuf, msg: String },
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Validation(_) => EXIT_VALIDATION,
        }
    }
}

impl From<graphon_gl::Error> for CliError {
    fn from(e: graphon_gl::Error) -> Self {
        match e {
            graphon_gl::Error::Io { path, source } => CliError::Io {
                path,
                msg: source.to_string(),
            },
            other => CliError::Validation(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "graphon-gl", version, about = "Graph and graphon Ginzburg-Landau experiments")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (overrides `[output] dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write two-column `.dat` files for sweeps.
    #[arg(long)]
    pub plot_data: bool,
    /// Use exhaustive enumeration for the cut norm regardless of n.
    #[arg(long)]
    pub force_exhaustive: bool,
    /// Worker threads for restarts and sweeps.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// What a successful run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
    /// Lines for stdout.
    pub report: Vec<String>,
}

/// Runs one configured command. Thread-pool setup is left to the caller.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = RunConfig::load(&cli.config)?;
    commands::dispatch(&cfg, cli)
}

/// Entry point shared by the binary: parses flags, runs, prints and returns
/// the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_VALIDATION;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: thread pool: {e}");
            return EXIT_VALIDATION;
        }
    }
    match run(&cli) {
        Ok(o) => {
            for line in &o.report {
                println!("{line}");
            }
            o.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
