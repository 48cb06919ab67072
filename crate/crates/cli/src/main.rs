//! `lowdisc`: command-line driver. Primary output goes to stdout, logs to
//! stderr. Exit codes: 0 success, 1 usage or validation error, 2 numerical
//! failure.

mod cache;
mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Failure;

#[derive(Parser, Debug)]
#[command(name = "lowdisc", version, about = "Lower bounds on the de Bruijn-Newman constant of quadratic characters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Zeros, g(0) bound, lambda and the Low test for one discriminant.
    Analyze(AnalyzeArgs),
    /// Classify Z at the origin over a range of discriminants.
    Scan(ScanArgs),
    /// Integrate the heat flow of the lowest zeros.
    Flow(FlowArgs),
    /// Sample Z(x) on a uniform grid.
    Plotdata(PlotArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Working precision in decimal digits (at least 17).
    #[arg(long, default_value_t = 30)]
    pub precision: u32,
    /// Absolute accuracy target for the integral near the origin.
    #[arg(long, default_value = "5e-16")]
    pub eps: String,
    /// Directory for cached reports; defaults to $LOWDISC_CACHE_DIR.
    #[arg(long, env = "LOWDISC_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Negative fundamental discriminant, e.g. -115147.
    #[arg(long, allow_hyphen_values = true)]
    pub disc: i64,
    #[command(flatten)]
    pub common: Common,
    /// Zero-location tolerance.
    #[arg(long, default_value = "1e-12")]
    pub tol: String,
    /// Index N where the explicit pair sum of the g(0) bound stops.
    #[arg(long)]
    pub zeros: Option<usize>,
    /// File of zero ordinates (one decimal per line) used instead of the scan.
    #[arg(long)]
    pub zeros_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub lo: i64,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: i64,
    #[command(flatten)]
    pub common: Common,
    /// Also run the full analysis for every discriminant.
    #[arg(long)]
    pub full: bool,
    /// Zero-location tolerance for `--full`.
    #[arg(long, default_value = "1e-12")]
    pub tol: String,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct FlowArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub disc: i64,
    #[command(flatten)]
    pub common: Common,
    /// Number of zeros carried by the flow.
    #[arg(long, default_value_t = 16)]
    pub m: usize,
    /// Final heat time; negative values run backward.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub t_end: String,
    /// Number of uniformly spaced output rows from 0 to t_end inclusive.
    #[arg(long, default_value_t = 21)]
    pub samples: usize,
    /// Local error tolerance of the integrator.
    #[arg(long, default_value = "1e-14")]
    pub tol: String,
    /// Compare the flow against zeros of the deformed integral at every sample.
    #[arg(long)]
    pub oracle_check: bool,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub disc: i64,
    #[command(flatten)]
    pub common: Common,
    /// Left end of the grid.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub lo: String,
    /// Right end of the grid.
    #[arg(long, default_value = "6", allow_hyphen_values = true)]
    pub hi: String,
    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 601)]
    pub samples: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => commands::analyze(&a),
        Command::Scan(a) => commands::scan(&a),
        Command::Flow(a) => commands::flow(&a),
        Command::Plotdata(a) => commands::plotdata(&a),
    };
    let mut out = std::io::stdout().lock();
    match result {
        Ok(o) => {
            let _ = out.write_all(o.stdout.as_bytes());
            let _ = out.flush();
            ExitCode::from(if o.numerical_failure { 2 } else { 0 })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
