//! Files, timing and the command line for `nasp-core`.

pub mod commands;
pub mod formats;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nasp_core::lcp::LcpError;
use nasp_core::nash::GameError;
use nasp_core::nasp::{NaspError, Status};

/// Process exit statuses.
pub mod exit {
    pub const EQUILIBRIUM: i32 = 0;
    /// `validate` found a profitable deviation or a support point outside its region.
    pub const NOT_AN_EQUILIBRIUM: i32 = 1;
    pub const NO_EQUILIBRIUM: i32 = 2;
    pub const TIME_LIMIT: i32 = 3;
    pub const INPUT: i32 = 4;
    pub const NUMERICAL: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => exit::INPUT,
            CliError::Numerical(_) => exit::NUMERICAL,
        }
    }
}

impl From<NaspError> for CliError {
    fn from(e: NaspError) -> Self {
        let input = match &e {
            NaspError::Dimension { .. } => true,
            NaspError::Game(g) => !matches!(g, GameError::Lcp(_)),
            NaspError::Lcp(l) => matches!(
                l,
                LcpError::DimensionMismatch(_)
                    | LcpError::DuplicateComplementarity(_)
                    | LcpError::IndexOutOfRange(_)
                    | LcpError::TooManyComplementarities { .. }
                    | LcpError::EncodingLength { .. }
            ),
            _ => false,
        };
        if input {
            CliError::Input(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

pub fn status_code(s: Status) -> i32 {
    match s {
        Status::Pne | Status::Mne => exit::EQUILIBRIUM,
        Status::NoEquilibrium => exit::NO_EQUILIBRIUM,
        Status::TimeLimit => exit::TIME_LIMIT,
    }
}

#[derive(Debug, Parser)]
#[command(name = "nasp", version, about = "Equilibria of Nash games among Stackelberg leaders")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an instance file.
    Generate(GenerateArgs),
    /// Compute an equilibrium.
    Solve(SolveArgs),
    /// Check a result against its instance.
    Validate(ValidateArgs),
    /// Market outcome of an energy instance under a result.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Energy,
    /// Latin and Greek leaders on a punctured interval.
    LatinGreek,
    /// The same game with the Greek cost sign flipped.
    LatinGreekFlipped,
    MatchingPennies,
    UnboundedPursuit,
    RandomTrivial,
    PneHardness,
    MneHardness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Paradigm {
    Standard,
    Single,
    Carbon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProducerClass {
    Green,
    Average,
    High,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value_t = Family::Energy)]
    pub family: Family,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Country count, or an inclusive range `lo..hi`.
    #[arg(long, default_value = "2")]
    pub countries: String,
    /// Producers per country, or an inclusive range `lo..hi`.
    #[arg(long, default_value = "3")]
    pub followers: String,
    #[arg(long)]
    pub no_trade: bool,
    #[arg(long)]
    pub tax_revenue: bool,
    /// Tax paradigms to draw from (default: all).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub paradigm: Vec<Paradigm>,
    /// Producer classes to draw from (default: all).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub classes: Vec<ProducerClass>,
    /// Subset-sum items for the hardness families.
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<u64>,
    #[arg(long, default_value_t = 0)]
    pub p: u64,
    #[arg(long, default_value_t = 0)]
    pub t: u64,
    #[arg(long, default_value_t = 0)]
    pub r: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Full,
    Inner,
    Pure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Seq,
    Rseq,
    Rand,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Instance files; several are solved as a batch.
    #[arg(long = "in", required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Algorithm::Full)]
    pub algorithm: Algorithm,
    #[arg(long, value_enum, default_value_t = Strategy::Seq)]
    pub strategy: Strategy,
    /// Pieces added per extension of the inner approximation.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Seed of the random extension order.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seconds.
    #[arg(long, default_value_t = 1800.0)]
    pub timelimit: f64,
    /// Pick the equilibrium of least total leader cost.
    #[arg(long)]
    pub select: bool,
    /// Record wall time in the result.
    #[arg(long)]
    pub timing: bool,
    /// Improvement a deviation must bring to count.
    #[arg(long)]
    pub deviation_tol: Option<f64>,
    /// Parallel solves in batch mode.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Result file; a directory in batch mode. Defaults to stdout, or to
    /// `<instance>.result.json` next to each batch input.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub result: PathBuf,
    #[arg(long, default_value_t = nasp_core::tol::DEVIATION)]
    pub tol: f64,
    #[arg(long, default_value_t = 1800.0)]
    pub timelimit: f64,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub result: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a per-country summary table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Runs a command and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    let r = match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::Validate(a) => commands::validate(&a),
        Command::Report(a) => commands::report(&a),
    };
    r.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.code()
    })
}
