//! Command-line interface: argument parsing, configuration merging and the
//! `bound`, `trial`, `sweep`, `certify` and `validate` subcommands.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 validation
//! failure, 3 solver error.

pub mod commands;
pub mod config;
pub mod csvio;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{ConfigFile, Section};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;

/// Environment variable consulted for the master seed when neither a flag
/// nor the config file sets one.
pub const SEED_ENV: &str = "PHASECORE_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("solver error: {0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::Convergence { .. } => CliError::Solver(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// Result of a subcommand that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    /// A check or certificate fell below its bound.
    ValidationFailed,
    /// Some trials hit solver errors (recorded in the output).
    SolverFailures,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Success => EXIT_OK,
            Status::ValidationFailed => EXIT_VALIDATION,
            Status::SolverFailures => EXIT_SOLVER,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "phasecore",
    version,
    about = "Null-vector and spectral initializers for Gaussian phase retrieval"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the error bound and its success probability.
    Bound(Flags),
    /// Run a single seeded trial and print its records.
    Trial(Flags),
    /// Run a parameter sweep and write trials/summary CSVs.
    Sweep(Flags),
    /// Check the per-instance error certificate over seeded trials.
    Certify(Flags),
    /// Monte Carlo checks of the order-statistic, weak-energy and Wishart bounds.
    Validate(Flags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bound(_) => "bound",
            Command::Trial(_) => "trial",
            Command::Sweep(_) => "sweep",
            Command::Certify(_) => "certify",
            Command::Validate(_) => "validate",
        }
    }

    pub fn flags(&self) -> &Flags {
        match self {
            Command::Bound(f)
            | Command::Trial(f)
            | Command::Sweep(f)
            | Command::Certify(f)
            | Command::Validate(f) => f,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed (falls back to the config file, then PHASECORE_SEED, then 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Signal dimension.
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// Number of measurements; a comma-separated list for sweeps.
    #[arg(long = "N", value_delimiter = ',')]
    pub big_n: Vec<usize>,
    /// Size of the weak set.
    #[arg(long = "I-size")]
    pub i_size: Option<usize>,
    /// Weak fraction |I|/N.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Aspect ratio n/|I|.
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Bernstein constant used in the tail term Q.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Comma-separated subset of null,spectral.
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<String>,
    /// Output file (bound, trial, certify, validate) or directory (sweep).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Trial index for `trial`.
    #[arg(long)]
    pub index: Option<u64>,
    /// Comma-separated subset of order,energy,wishart for `validate`.
    #[arg(long, value_delimiter = ',')]
    pub checks: Vec<String>,
    /// Add a wall_time_ms column to trial CSVs (output is then not reproducible).
    #[arg(long)]
    pub timings: bool,
}

impl Flags {
    pub(crate) fn as_section(&self) -> Section {
        let some_vec = |v: &Vec<String>| (!v.is_empty()).then(|| v.clone());
        Section {
            seed: self.seed,
            n: self.n,
            big_n: (!self.big_n.is_empty()).then(|| config::CountList::Many(self.big_n.clone())),
            i_size: self.i_size,
            sigma: self.sigma,
            nu: self.nu,
            eps: self.eps,
            delta: self.delta,
            t: self.t,
            c: self.c,
            trials: self.trials,
            methods: some_vec(&self.methods),
            out: self.out.clone(),
            workers: self.workers,
            index: self.index,
            checks: some_vec(&self.checks),
            timings: self.timings.then_some(true),
            ..Section::default()
        }
    }
}

/// Merge flags over the config file's table for `subcommand`. A weak-set
/// size given on the command line (`--I-size`, `--sigma` or `--nu`) replaces
/// all three from the file.
pub fn resolve(subcommand: &str, flags: &Flags) -> Result<Section, CliError> {
    let mut file = match &flags.config {
        Some(path) => ConfigFile::load(path)?.section(subcommand),
        None => Section::default(),
    };
    if subcommand != "bound"
        && (flags.i_size.is_some() || flags.sigma.is_some() || flags.nu.is_some())
    {
        file.i_size = None;
        file.sigma = None;
        file.nu = None;
    }
    let mut merged = flags.as_section().or(&file);
    if merged.seed.is_none() {
        if let Ok(v) = std::env::var(SEED_ENV) {
            merged.seed = Some(v.trim().parse().map_err(|_| {
                CliError::Usage(format!("{SEED_ENV} must be an unsigned integer, got '{v}'"))
            })?);
        }
    }
    Ok(merged)
}

/// Parse, dispatch and map the outcome to an exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    let outcome = resolve(cli.command.name(), cli.command.flags())
        .and_then(|section| commands::dispatch(&cli.command, &section, stdout));
    match outcome {
        Ok(status) => status.exit_code(),
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point used by the binary.
pub fn main_with_env() -> ExitCode {
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    ExitCode::from(run(std::env::args_os(), &mut out, &mut err))
}
