//! `iivcg`: existence checks, payments, audits and bundled examples for
//! common-agency contracts, from the command line.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iivcg_core::{parse_rational, Rational};
use thiserror::Error;

/// Exit status for a successful run.
pub const EXIT_OK: u8 = 0;
/// Bad command-line usage.
pub const EXIT_USAGE: u8 = 1;
/// Unreadable or invalid input files.
pub const EXIT_INPUT: u8 = 2;
/// No contract with limited liability and individual rationality exists.
pub const EXIT_IMPOSSIBLE: u8 = 3;
/// An audited property (or equilibrium check) failed.
pub const EXIT_FAILED: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "iivcg", version, about = "Exact VCG-style contracts for common agency")]
struct Cli {
    /// Print structured JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether a contract with limited liability and individual
    /// rationality exists for every bid profile.
    Check {
        setting: PathBuf,
        /// Margin used when re-solving with strict efficiency constraints.
        #[arg(long, value_parser = rational_arg)]
        strict_eps: Option<Rational>,
    },
    /// Payments of a contract at a bid profile and realized outcome.
    Pay {
        setting: PathBuf,
        #[arg(long)]
        bids: PathBuf,
        /// Name of the realized outcome.
        #[arg(long)]
        outcome: String,
        #[arg(long, value_enum)]
        contract: PayContract,
        /// Correlation graph (required by, and only by, the weighted contract).
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Also run the existence check with this strict margin and report it.
        #[arg(long, value_parser = rational_arg)]
        strict_eps: Option<Rational>,
    },
    /// Audit a contract's properties on a sampled grid of bid profiles.
    Audit {
        setting: PathBuf,
        #[arg(long, value_enum)]
        contract: AuditContract,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Write one of the bundled example settings.
    Example {
        #[command(subcommand)]
        example: ExampleCommand,
    },
    /// First-price contract analyses.
    Firstprice {
        #[command(subcommand)]
        command: FirstPriceCommand,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PayContract {
    Alg1,
    Auction,
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AuditContract {
    Alg1,
    Auction,
    Weighted,
    Fp,
}

#[derive(Debug, Clone, Args)]
struct GridArgs {
    /// Lattice points per dimension.
    #[arg(long = "grid", default_value_t = 5)]
    resolution: usize,
    /// Seeded random points per principal.
    #[arg(long = "random", default_value_t = 32)]
    random_points: usize,
    /// Cap on the number of sampled profiles.
    #[arg(long, default_value_t = 256)]
    max_profiles: usize,
    /// Truncation edge for unbounded domains.
    #[arg(long, value_parser = rational_arg)]
    bound: Option<Rational>,
    #[arg(long, env = "IIVCG_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Args)]
struct ExampleOut {
    /// Setting file to write; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the true valuations as a bid file.
    #[arg(long)]
    bids_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum ExampleCommand {
    /// Single-minded principals with an inefficient first-price equilibrium.
    Poa {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, value_parser = rational_arg, default_value = "1/2")]
        gamma: Rational,
        #[arg(long, value_parser = rational_arg, default_value = "1/4")]
        eps: Rational,
        /// Also write the first-price equilibrium bids.
        #[arg(long)]
        equilibrium_out: Option<PathBuf>,
        #[command(flatten)]
        out: ExampleOut,
    },
    /// One principal, `q` actions, where every first-price equilibrium is inefficient.
    Pos {
        #[arg(long, default_value_t = 3)]
        q: usize,
        #[arg(long, value_parser = rational_arg, default_value = "1/4")]
        gamma: Rational,
        #[arg(long, value_parser = rational_arg, default_value = "1/12")]
        eps: Rational,
        #[command(flatten)]
        out: ExampleOut,
    },
    /// Three principals with narrow box domains and a correlation graph.
    Weighted {
        #[arg(long)]
        graph_out: Option<PathBuf>,
        #[command(flatten)]
        out: ExampleOut,
    },
    /// Two actions, one principal, and no feasible contract.
    Tradeoff {
        #[arg(long, value_parser = rational_arg, default_value = "1/10")]
        eps: Rational,
        #[command(flatten)]
        out: ExampleOut,
    },
}

#[derive(Debug, Subcommand)]
enum FirstPriceCommand {
    /// Search a deviation grid for a profitable unilateral deviation.
    Check {
        setting: PathBuf,
        /// True valuations.
        #[arg(long)]
        values: PathBuf,
        /// Bid profile to test.
        #[arg(long)]
        bids: PathBuf,
        #[command(flatten)]
        grid: DeviationArgs,
    },
    /// Welfare of an equilibrium relative to the optimum.
    Poa {
        setting: PathBuf,
        #[arg(long)]
        values: PathBuf,
        #[arg(long)]
        bids: PathBuf,
        #[command(flatten)]
        grid: DeviationArgs,
    },
    /// Best utility of a single principal among grid bids inducing costly actions.
    Pos {
        setting: PathBuf,
        #[arg(long)]
        values: PathBuf,
        /// Lattice points per dimension.
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Only bids inducing this action or a later one count (default: the second action).
        #[arg(long)]
        min_action: Option<String>,
        #[arg(long, value_parser = rational_arg)]
        bound: Option<Rational>,
    },
}

#[derive(Debug, Clone, Args)]
struct DeviationArgs {
    /// Lattice points per dimension.
    #[arg(long = "grid", default_value_t = iivcg_core::first_price::DEFAULT_RESOLUTION)]
    resolution: usize,
    #[arg(long, value_parser = rational_arg)]
    bound: Option<Rational>,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] iivcg_core::io::IoError),
    #[error("{0}")]
    Input(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) | CliError::Input(_) => EXIT_INPUT,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
