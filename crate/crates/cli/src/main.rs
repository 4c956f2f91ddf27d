use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod manifest;
mod verify;

/// Exact tables and simulations of the spread statistic in free-choice
/// experiments.
#[derive(Debug, Parser)]
#[command(name = "freechoice", version)]
struct Cli {
    /// Worker threads (outputs do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Expected spread for every comparison-position pair under the null model.
    Table(TableArgs),
    /// Simulate one experiment and write per-subject records.
    Simulate(SimulateArgs),
    /// Estimate the rejection rate of a design's z test.
    Power(PowerArgs),
    /// Run the built-in consistency checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, serde::Serialize)]
struct TableArgs {
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, default_value_t = 0.8)]
    p: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Use exact rational arithmetic (adds an `exact` column).
    #[arg(long)]
    exact_rational: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum DesignArg {
    Classic,
    E0,
    E1,
    E2,
    E3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
enum ModelArg {
    Null,
    TwoParam,
    Memory,
    Dissonance,
}

/// Design and subject-model flags shared by `simulate` and `power`.
#[derive(Debug, Args, serde::Serialize)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    design: DesignArg,
    #[arg(long, value_enum, default_value_t = ModelArg::Null)]
    model: ModelArg,
    #[arg(long, default_value_t = 15)]
    n: usize,
    /// Noise weight for the choice and (except two-param) every ranking.
    #[arg(long, default_value_t = 0.8)]
    p: f64,
    /// Larger noise weight of the first ranking (two-param model).
    #[arg(long = "P")]
    big_p: Option<f64>,
    /// Comparison positions (classic, e0) or objects (e1), as `i,j`.
    #[arg(long)]
    pair: Option<String>,
    /// Subjects; e3 always uses one per position pair.
    #[arg(long, default_value_t = 105)]
    subjects: usize,
    /// Places the dissonance model moves each compared object.
    #[arg(long, default_value_t = 1)]
    shift: usize,
    /// Largest stage-one gap at which the dissonance model acts.
    #[arg(long, default_value_t = 2)]
    max_gap: usize,
    /// Draw an independent random true ranking for every subject.
    #[arg(long)]
    random_truths: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Args, serde::Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    experiment: ExperimentArgs,
    /// Record format: csv, or json for JSON lines.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output prefix; writes `<prefix>.csv|.jsonl`, `<prefix>.summary.json`
    /// and `<prefix>.manifest.json`.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args, serde::Serialize)]
struct PowerArgs {
    #[command(flatten)]
    #[serde(flatten)]
    experiment: ExperimentArgs,
    #[arg(long, default_value_t = 1000)]
    replications: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// JSON report path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum Level {
    Quick,
    Full,
}

#[derive(Debug, Args, serde::Serialize)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Level::Quick)]
    level: Level,
    /// Flip the spread sign convention in the checked engine (negative test).
    #[arg(long, hide = true)]
    inject_sign_fault: bool,
}

/// Failure classes, mapped to exit codes 1, 2 and 3.
#[derive(Debug)]
enum Failure {
    Verification,
    Usage(String),
    Io(String),
}

impl From<freechoice::Error> for Failure {
    fn from(e: freechoice::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Wraps any writer failure as an IO failure.
fn io_failure(e: impl std::fmt::Display) -> Failure {
    Failure::Io(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .expect("global thread pool is configured once");
    }
    let result = match &cli.command {
        Command::Table(args) => commands::table(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Power(args) => commands::power(args),
        Command::Verify(args) => verify::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("io error: {msg}");
            ExitCode::from(3)
        }
    }
}
