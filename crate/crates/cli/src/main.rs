//! `onebit`: simulate one-bit data with dithered thresholds and recover the
//! input autocorrelation and input/output cross-correlation.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use onebit_core::Method;

use commands::{ScenarioFlags, Settings};

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Key-value configuration file (TOML); flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Recovery method; repeat for several.
    #[arg(long, global = true, value_parser = parse_method)]
    pub method: Vec<Method>,
    /// Gauss-Legendre points.
    #[arg(long, global = true)]
    pub nq: Option<usize>,
    /// Monte-Carlo nodes.
    #[arg(long, global = true)]
    pub nm: Option<usize>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: onebit_core::Error| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "onebit", version, about = "One-bit covariance recovery with time-varying thresholds")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a sign dataset and write it with its statistics and true ACF.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioFlags,
        /// Number of snapshots.
        #[arg(long)]
        nx: Option<usize>,
    },
    /// Recover the input autocorrelation from a dataset file.
    Recover {
        #[arg(long)]
        dataset: PathBuf,
        /// `lag,r_x` file; defaults to truth.csv next to the dataset if present.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        lags: Option<usize>,
    },
    /// Compare methods over repeated trials and sample sizes.
    Benchmark {
        #[command(flatten)]
        scenario: ScenarioFlags,
    },
    /// Recover the input/output cross-correlation by the modified Bussgang law.
    Crosscorr {
        #[command(flatten)]
        scenario: ScenarioFlags,
        #[arg(long)]
        nx: Option<usize>,
    },
}

fn run(cli: Cli) -> anyhow::Result<Vec<PathBuf>> {
    let settings = Settings::resolve(&cli.common)?;
    match cli.command {
        Command::Simulate { scenario, nx } => commands::simulate(&settings, &scenario, nx),
        Command::Recover { dataset, truth, lags } => commands::recover_cmd(&settings, &dataset, truth.as_deref(), lags),
        Command::Benchmark { scenario } => commands::benchmark_cmd(&settings, &scenario),
        Command::Crosscorr { scenario, nx } => commands::crosscorr_cmd(&settings, &scenario, nx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
