//! `nband`: build N-band wavelet filter banks, verify perfect reconstruction,
//! transform signals and render scaling functions and wavelets.
//!
//! Exit codes: 0 success or PASS, 1 verification FAIL, 2 usage error,
//! 3 I/O or parse error.

mod bank_file;
mod commands;
mod error;
mod pyramid_dir;
mod signal_file;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "nband", version, about = "N-band wavelet filter banks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the scaling filter of a family, optionally saving it as JSON.
    Filter {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        precision: Precision,
        /// Write the filter record to this JSON file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build a full analysis/synthesis bank and write it as JSON.
    Bank {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        precision: Precision,
        /// JSON destination; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check perfect reconstruction and alias cancellation of a bank.
    Verify {
        #[command(flatten)]
        source: BankSource,
        #[command(flatten)]
        precision: Precision,
    },
    /// Multi-level analysis of a signal into a directory of channel files.
    Analyze {
        /// Signal file: one sample per line or delimited rows.
        #[arg(long)]
        input: PathBuf,
        /// 0-based column of delimited rows; the last column by default.
        #[arg(long)]
        column: Option<usize>,
        #[command(flatten)]
        source: BankSource,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = BoundaryArg::Periodic)]
        boundary: BoundaryArg,
        /// Zero-extend the signal to a multiple of N^levels.
        #[arg(long)]
        pad: bool,
        /// Output directory for channel files and the manifest.
        #[arg(long)]
        output: PathBuf,
    },
    /// Reconstruct a signal from a directory written by `analyze`.
    Synthesize {
        /// Directory written by `analyze`.
        #[arg(long)]
        input: PathBuf,
        /// Use this bank instead of the one stored in the manifest.
        #[arg(long)]
        bank: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        /// Signal to compare against; prints the maximum absolute error.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        column: Option<usize>,
    },
    /// Sample the scaling function or a wavelet on the grid N^-depth.
    Render {
        #[command(flatten)]
        source: BankSource,
        #[arg(long, value_enum, default_value_t = Target::Phi)]
        target: Target,
        /// Wavelet channel for `psi`, 1 by default.
        #[arg(long)]
        channel: Option<usize>,
        #[arg(long)]
        depth: usize,
        /// Destination for `x value` lines; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Dilation factor, at least 2.
    #[arg(long = "N", value_name = "N")]
    pub n: Option<usize>,
    /// B-spline degree.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Shannon truncation: taps kept for |k| <= half-width.
    #[arg(long)]
    pub half_width: Option<usize>,
    /// B-spline completion of the constant polyphase factor:
    /// `unit`, `orthogonal` or `file:PATH` with a JSON N×N matrix.
    #[arg(long, default_value = "unit")]
    pub a0: String,
}

#[derive(Args, Debug, Clone)]
pub struct BankSource {
    /// Bank JSON file; otherwise the bank is built from the family flags.
    #[arg(long, conflicts_with = "family")]
    pub bank: Option<PathBuf>,
    #[command(flatten)]
    pub family: FamilyArgs,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct Precision {
    /// Require rational taps and exact checks.
    #[arg(long, conflicts_with = "float")]
    pub exact: bool,
    /// Use floating-point taps and checks only.
    #[arg(long)]
    pub float: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyArg {
    Haar,
    Shannon,
    Bspline,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryArg {
    Periodic,
    Zero,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Phi,
    Psi,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Filter {
            family,
            precision,
            output,
        } => commands::filter(&family, precision, output.as_deref()),
        Command::Bank {
            family,
            precision,
            output,
        } => commands::bank(&family, precision, output.as_deref()),
        Command::Verify { source, precision } => commands::verify(&source, precision),
        Command::Analyze {
            input,
            column,
            source,
            levels,
            boundary,
            pad,
            output,
        } => commands::analyze(&commands::AnalyzeArgs {
            input: &input,
            column,
            source: &source,
            levels,
            boundary,
            pad,
            output: &output,
        }),
        Command::Synthesize {
            input,
            bank,
            output,
            reference,
            column,
        } => commands::synthesize(
            &input,
            bank.as_deref(),
            &output,
            reference.as_deref(),
            column,
        ),
        Command::Render {
            source,
            target,
            channel,
            depth,
            output,
        } => commands::render(&source, target, channel, depth, output.as_deref()),
    };
    match result {
        Ok(commands::Outcome::Success) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
