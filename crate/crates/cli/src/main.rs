//! `dyntcp` command-line entry point.
//!
//! Exit codes: 0 success, 1 input could not be read or parsed, 2 invalid
//! configuration (bad flag values, empty dataset).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "dyntcp",
    version,
    about = "Static + dynamic test case prioritization replay"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replay a dataset through a static scheduler, optionally followed by
    /// the conditional-probability rescheduler, and score cycles with APFD.
    Replay(ReplayArgs),
    /// Print dataset statistics as JSON.
    Stats(StatsArgs),
    /// Generate a synthetic dataset in canonical CSV form.
    Synth(SynthArgs),
    /// Dump the correlation tables used for one cycle as CSV.
    DumpTables(DumpArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Canonical,
    Industrial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StaticArg {
    Optimal,
    Worst,
    Random,
    /// Historical failure rate over the history window.
    Failrate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DynamicArg {
    Cp,
    None,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Dataset file.
    #[arg(long)]
    pub input: PathBuf,
    /// Input format [default: canonical]
    #[arg(long, value_enum)]
    pub format: Option<InputFormat>,
    /// Industrial format: test name column [default: Name]
    #[arg(long)]
    pub col_test: Option<String>,
    /// Industrial format: cycle column [default: Cycle]
    #[arg(long)]
    pub col_cycle: Option<String>,
    /// Industrial format: verdict column [default: Verdict]
    #[arg(long)]
    pub col_verdict: Option<String>,
    /// Industrial format: field delimiter [default: ;]
    #[arg(long)]
    pub delimiter: Option<char>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// TOML file with defaults for any of the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Static scheduler [default: optimal]
    #[arg(long = "static", value_enum)]
    pub static_kind: Option<StaticArg>,
    /// Dynamic rescheduler [default: cp]
    #[arg(long, value_enum)]
    pub dynamic: Option<DynamicArg>,
    /// Number of previous cycles used for correlations [default: 15]
    #[arg(long)]
    pub history: Option<usize>,
    /// Score adjustment multiplier [default: 0.8]
    #[arg(long)]
    pub k: Option<f64>,
    /// Repetitions per cycle for the random scheduler [default: 30]
    #[arg(long)]
    pub reps: Option<u32>,
    /// Master seed for random schedules [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replay only the last N cycles [default: 300]
    #[arg(long = "cycles")]
    pub cycle_limit: Option<usize>,
    /// Per-cycle report CSV (cycle,config,repetition,apfd).
    #[arg(long)]
    pub out: PathBuf,
    /// Summary JSON keyed by configuration.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// JSON-lines log of every dynamic step.
    #[arg(long)]
    pub step_log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Report counts before duplicate executions are collapsed.
    #[arg(long)]
    pub raw: bool,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// TOML file with defaults for any of the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of tests [default: 50]
    #[arg(long)]
    pub tests: Option<usize>,
    /// Number of cycles [default: 300]
    #[arg(long)]
    pub cycles: Option<usize>,
    /// Correlated groups as COUNTxSIZE, assigned to consecutive tests [default: 5x10]
    #[arg(long)]
    pub groups: Option<String>,
    /// Per-cycle probability that a group's fault event fires [default: 0.3]
    #[arg(long)]
    pub group_rate: Option<f64>,
    /// Probability a member fails when its group fires [default: 1.0]
    #[arg(long)]
    pub rho: Option<f64>,
    /// Failure rate outside group events [default: 0.0]
    #[arg(long)]
    pub background: Option<f64>,
    /// Independent verdict flip probability [default: 0.0]
    #[arg(long)]
    pub flakiness: Option<f64>,
    /// RNG seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Target cycle; tables are built from the cycles before it.
    #[arg(long)]
    pub cycle: u64,
    /// Number of previous cycles used [default: 15]
    #[arg(long)]
    pub history: Option<usize>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Replay(args) => commands::replay(args),
        Command::Stats(args) => commands::stats(args),
        Command::Synth(args) => commands::synth(args),
        Command::DumpTables(args) => commands::dump_tables(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
