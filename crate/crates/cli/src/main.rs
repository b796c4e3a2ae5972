use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};

mod commands;
mod config;
mod error;
mod input;
mod output;

use config::ProjectConfig;
use error::{Classify, CliResult};

/// Fit, simulate and diagnose elliptical ℓ-Pareto models for spatial
/// extremes.
#[derive(Debug, Parser)]
#[command(name = "ellpareto", version, about)]
struct Cli {
    /// JSON project file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every random and quasi-random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "PARETO_THREADS")]
    threads: Option<usize>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit marginal GPDs and the dependence model to station data.
    Fit(commands::fit::FitArgs),
    /// Simulate extremal-t or ℓ-Pareto draws at the sites.
    Simulate(commands::simulate::SimulateArgs),
    /// Simulate target sites given values at conditioning sites.
    Conditional(commands::conditional::ConditionalArgs),
    /// Run the Monte Carlo estimator study.
    Study(commands::study::StudyArgs),
    /// Pairwise empirical extremal coefficients with bootstrap intervals.
    Extcoef(commands::extcoef::ExtcoefArgs),
}

/// Settings shared by all commands.
#[derive(Debug)]
pub struct Globals {
    pub config: ProjectConfig,
    pub seed: u64,
}

pub const DEFAULT_SEED: u64 = 1;

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads.filter(|&n| n > 0) {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().config_err("configuring the thread pool")?;
    }
    let config = match &cli.config {
        Some(path) => ProjectConfig::load(path)?,
        None => ProjectConfig::default(),
    };
    let seed = cli.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    let globals = Globals { config, seed };
    match cli.command {
        Command::Fit(args) => commands::fit::run(&args, &globals),
        Command::Simulate(args) => commands::simulate::run(&args, &globals),
        Command::Conditional(args) => commands::conditional::run(&args, &globals),
        Command::Study(args) => commands::study::run(&args, &globals),
        Command::Extcoef(args) => commands::extcoef::run(&args, &globals),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
