//! `phragmen` command-line front end.

mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "phragmen", version, about = "Exact Phragmén tabulation for ranked-ballot elections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a counting method and print the winners and round tables.
    Tabulate(TabulateArgs),
    /// Build a proportional list (top-down or bottom-up).
    List(ListArgs),
    /// List solid-coalition constraints and Droop-compliant winner sets.
    Coalitions(CoalitionsArgs),
    /// Run the randomized property suites.
    Properties(PropertiesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Irv,
    QuotaPhragmen,
    BottomUp,
    TopDown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ListMethod {
    BottomUp,
    TopDown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Json,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Check the result against the Droop proportionality oracle.
    #[arg(long)]
    verify_droop: bool,
    /// Refuse oracle enumeration above this many candidates.
    #[arg(long, default_value_t = 16)]
    max_candidates: usize,
}

#[derive(Debug, Args)]
pub struct TabulateArgs {
    /// Ballot file.
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::TopDown)]
    method: Method,
    /// Seat count (defaults to the file header). For list methods, the list
    /// depth when --depth is absent.
    #[arg(long)]
    seats: Option<usize>,
    /// List depth for list methods.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[command(flatten)]
    oracle: OracleArgs,
}

#[derive(Debug, Args)]
pub struct ListArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = ListMethod::TopDown)]
    method: ListMethod,
    /// Number of positions to fill (defaults to every candidate).
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[command(flatten)]
    oracle: OracleArgs,
}

#[derive(Debug, Args)]
pub struct CoalitionsArgs {
    input: PathBuf,
    /// Seat count (defaults to the file header).
    #[arg(long)]
    seats: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long, default_value_t = 16)]
    max_candidates: usize,
    /// Enumerate every candidate subset rather than ballot prefix sets.
    #[arg(long)]
    exhaustive: bool,
}

#[derive(Debug, Args)]
pub struct PropertiesArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Tie-free runs to judge per suite.
    #[arg(long, default_value_t = 1000)]
    profiles: usize,
    /// Suites to run (repeatable); all when omitted.
    #[arg(long = "suite")]
    suites: Vec<String>,
    /// Smallest generated candidate count.
    #[arg(long, default_value_t = 2)]
    min_candidates: usize,
    /// Largest generated candidate count (at most 7).
    #[arg(long, default_value_t = 6)]
    candidates: usize,
    /// Largest generated total ballot weight (at most 60).
    #[arg(long, default_value_t = 60)]
    max_weight: u64,
    /// Directory for counterexample ballot files.
    #[arg(long, default_value = "counterexamples")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

fn main() -> ExitCode {
    // clap's own usage errors exit 2, which is reserved for verification failures
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Tabulate(args) => commands::tabulate(&args),
        Command::List(args) => commands::list(&args),
        Command::Coalitions(args) => commands::coalitions(&args),
        Command::Properties(args) => commands::properties(&args),
    };
    match result {
        Ok(run) => {
            print!("{}", run.output);
            if run.verification_failed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
