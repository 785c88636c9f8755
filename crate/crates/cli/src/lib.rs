//! Argument grammar, dispatch and error mapping for the `gcantor` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use gcantor_core::cantor::CantorError;
use gcantor_core::classify::ClassifyError;
use gcantor_core::hyperbolic::HypError;
use gcantor_core::seqspec::SeqError;
use gcantor_core::NumericsError;

mod commands;
pub mod report;

/// Environment variable consulted when `--precision` is not given.
pub const PRECISION_ENV: &str = "GCANTOR_PRECISION";

#[derive(Parser, Debug)]
#[command(name = "gcantor", version, about = "Certified computations for generalized Cantor sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Parse and check a spec, echoing its canonical form and digest.
    SpecValidate,
    /// Interval endpoints of levels 1..=levels.
    Cantor,
    /// Two-sided length bounds for every curve of levels 1..=levels.
    Bounds,
    /// Verdict, criterion trace, thresholds and representative bounds.
    Classify,
    /// Threshold levels n1, n2, N with their per-level certificates.
    Thresholds,
    /// Boundary lengths, seam and boundary-to-seam distance per pair of pants.
    Pants,
    /// Plot series as CSV.
    Plotdata,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Spec document (JSON, numbers as strings).
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Working precision in bits.
    #[arg(long, global = true, env = PRECISION_ENV, default_value_t = 128,
          value_parser = clap::value_parser!(u32).range(53..))]
    pub precision: u32,
    /// Last index n examined by classify, thresholds and plotdata.
    #[arg(long, global = true, default_value_t = 32, value_parser = clap::value_parser!(u32).range(2..))]
    pub horizon: u32,
    /// Deepest level listed by cantor, bounds and pants.
    #[arg(long, global = true, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
    pub levels: u32,
    /// Subsequence bound c in (0, 1), decimal or p/q.
    #[arg(long, global = true, default_value = "1/3")]
    pub c: String,
    /// Quasiconformal constant K >= 1, decimal or p/q.
    #[arg(long = "K", alias = "k", global = true, default_value = "2")]
    pub k: String,
    /// Output format; the default depends on the subcommand.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Exit with status 4 when the result is inconclusive.
    #[arg(long, global = true)]
    pub require_verdict: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("{0}")]
    Io(String),
    #[error("computation failed: {0}")]
    Computation(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::InvalidSpec(_) | CliError::Io(_) => 2,
            CliError::Computation(_) => 3,
            CliError::Inconclusive(_) => 4,
        }
    }
}

impl From<NumericsError> for CliError {
    fn from(e: NumericsError) -> Self {
        match e {
            NumericsError::Parse(_) | NumericsError::ZeroDenominator(_) => CliError::InvalidSpec(e.to_string()),
            _ => CliError::Computation(e.to_string()),
        }
    }
}

impl From<SeqError> for CliError {
    fn from(e: SeqError) -> Self {
        match e {
            SeqError::Numerics(inner) => inner.into(),
            SeqError::LogScaleOnly(_) => CliError::Computation(e.to_string()),
            _ => CliError::InvalidSpec(e.to_string()),
        }
    }
}

impl From<CantorError> for CliError {
    fn from(e: CantorError) -> Self {
        match e {
            CantorError::Sequence(inner) => inner.into(),
            _ => CliError::Computation(e.to_string()),
        }
    }
}

impl From<HypError> for CliError {
    fn from(e: HypError) -> Self {
        match e {
            HypError::Sequence(inner) => inner.into(),
            HypError::Cantor(inner) => inner.into(),
            HypError::Numerics(inner) => inner.into(),
            _ => CliError::Computation(e.to_string()),
        }
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::KBelowOne(_) | ClassifyError::InvalidC(_) | ClassifyError::HorizonTooSmall(_) => {
                CliError::Usage(e.to_string())
            }
            ClassifyError::Sequence(inner) => inner.into(),
            ClassifyError::Hyperbolic(inner) => inner.into(),
            ClassifyError::Cantor(inner) => inner.into(),
            _ => CliError::Computation(e.to_string()),
        }
    }
}

/// Runs a parsed command line, writing the document to `out`.
///
/// With `--require-verdict` an inconclusive result is still written before
/// [`CliError::Inconclusive`] is returned.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let doc = commands::execute(cli.command, &cli.config)?;
    out.write_all(doc.text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
    match doc.inconclusive {
        Some(reason) if cli.config.require_verdict => Err(CliError::Inconclusive(reason)),
        _ => Ok(()),
    }
}

/// Parses `args` (including the program name) and runs them.
pub fn run_args<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    run(&cli, out)
}
