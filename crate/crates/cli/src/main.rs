//! Command-line front end: exact tables for orthogonal sequences, Pearson
//! pairs, coherence fits and Sobolev bases, plus the cross-check battery.
//!
//! Every number in every output is an exact rational string; nothing is ever
//! rounded. Exit codes: 0 success, 1 computation error (including "no
//! solution found"), 2 cross-check mismatch, 64 usage error.

mod commands;
mod output;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use nucalc::calculus::{NuKind, NuParam};
use nucalc::rational::{parse_rational, Rational};
use num_traits::Zero;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "nucalc",
    version,
    about = "Exact difference-calculus orthogonal polynomial toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Monic orthogonal sequence from a moment functional.
    Smop(SmopArgs),
    /// Solve and verify a Pearson equation for a functional.
    Pearson(PearsonArgs),
    /// Fit coherence coefficients between two sequences.
    CoherenceFit(CoherenceFitArgs),
    /// Verify stored coherence coefficients against the two sequences.
    CoherenceVerify(CoherenceVerifyArgs),
    /// Sobolev-orthogonal sequence by the Gram route, the recursion route,
    /// or both with an exact cross-check.
    Sobolev(SobolevArgs),
    /// Run the full invariant battery and print a pass/fail table.
    VerifySuite,
    /// Time both Sobolev routes and report coefficient growth per degree.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Gram,
    Recursion,
    Both,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long = "out", value_enum, default_value_t = OutFormat::Json)]
    pub out: OutFormat,
    /// Output path; stdout when omitted.
    #[arg(long = "out-file")]
    pub out_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SmopArgs {
    /// Functional spec: a JSON file path or an inline JSON object.
    #[arg(long)]
    pub functional: String,
    /// Highest polynomial degree to produce.
    #[arg(long)]
    pub n: usize,
    /// Lattice parameter, e.g. omega:1 or q:1/2 (needed with --derived-order).
    #[arg(long, value_parser = parse_nu_flag)]
    pub nu: Option<NuParam>,
    /// Also emit the derived sequence of this order.
    #[arg(long = "derived-order")]
    pub derived_order: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct PearsonArgs {
    #[arg(long)]
    pub functional: String,
    #[arg(long, value_parser = parse_nu_flag)]
    pub nu: NuParam,
    /// Requested degree of the monic sigma polynomial.
    #[arg(long = "deg-sigma")]
    pub deg_sigma: usize,
    /// Degree cap for tau (at least 1).
    #[arg(long = "deg-tau")]
    pub deg_tau: usize,
    /// Extra residual degrees checked beyond the solve window.
    #[arg(long, default_value_t = 10)]
    pub guard: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CoherenceFitArgs {
    /// Functional of the first sequence.
    #[arg(long)]
    pub u: String,
    /// Functional of the second sequence.
    #[arg(long)]
    pub v: String,
    #[arg(long, value_parser = parse_nu_flag)]
    pub nu: NuParam,
    /// Extra terms on the first side.
    #[arg(long = "M", default_value_t = 0)]
    pub width_p: usize,
    /// Extra terms on the second side.
    #[arg(long = "N", default_value_t = 0)]
    pub width_q: usize,
    /// Derivative order on the first side.
    #[arg(long = "m", default_value_t = 1)]
    pub order_p: usize,
    /// Derivative order on the second side.
    #[arg(long = "k", default_value_t = 0)]
    pub order_q: usize,
    /// Highest relation level to fit.
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CoherenceVerifyArgs {
    #[arg(long)]
    pub u: String,
    #[arg(long)]
    pub v: String,
    #[arg(long, value_parser = parse_nu_flag)]
    pub nu: NuParam,
    /// Coherence data JSON (path or inline) as produced by coherence-fit.
    #[arg(long)]
    pub data: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SobolevArgs {
    #[arg(long)]
    pub u: String,
    #[arg(long)]
    pub v: String,
    #[arg(long, value_parser = parse_nu_flag)]
    pub nu: NuParam,
    /// Derivative order in the inner product.
    #[arg(long = "m", default_value_t = 1)]
    pub m: usize,
    /// Positive weight of the derivative term, e.g. 3/2.
    #[arg(long, value_parser = parse_positive_rational)]
    pub lambda: Rational,
    /// Highest Sobolev polynomial degree to produce.
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Method::Gram)]
    pub method: Method,
    /// Coherence width on the first side for the recursion route.
    #[arg(long = "M", default_value_t = 0)]
    pub width_p: usize,
    /// Coherence width on the second side for the recursion route.
    #[arg(long = "N", default_value_t = 0)]
    pub width_q: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long)]
    pub u: String,
    #[arg(long)]
    pub v: String,
    #[arg(long, value_parser = parse_nu_flag)]
    pub nu: NuParam,
    #[arg(long = "m", default_value_t = 1)]
    pub m: usize,
    #[arg(long, value_parser = parse_positive_rational)]
    pub lambda: Rational,
    #[arg(long)]
    pub n: usize,
    #[arg(long = "M", default_value_t = 0)]
    pub width_p: usize,
    #[arg(long = "N", default_value_t = 0)]
    pub width_q: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses `omega:VALUE` or `q:VALUE` with the domain restrictions applied.
fn parse_nu_flag(s: &str) -> Result<NuParam, String> {
    let (kind, value) = s
        .split_once(':')
        .ok_or_else(|| format!("expected omega:VALUE or q:VALUE, got {s:?}"))?;
    let kind = match kind {
        "omega" => NuKind::Omega,
        "q" => NuKind::Q,
        other => return Err(format!("unknown lattice kind {other:?}")),
    };
    let value = parse_rational(value).map_err(|e| e.to_string())?;
    NuParam::new(kind, value).map_err(|e| e.to_string())
}

fn parse_positive_rational(s: &str) -> Result<Rational, String> {
    let value = parse_rational(s).map_err(|e| e.to_string())?;
    if value <= Rational::zero() {
        return Err(format!("must be positive, got {s}"));
    }
    Ok(value)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
