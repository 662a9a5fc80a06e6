//! Command-line front end.

pub mod commands;
pub mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{Error, ErrorKind, Result};
use crate::models::ModelKind;
use crate::select::Ranker;
use crate::sweep::{DEFAULT_SWEEP_SIZES, MAX_WINDOW_MONTHS};
use commands::{Baseline, Method, SynthArgs};
use config::{Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "pricesent",
    version,
    about = "Price-labeled tweet sentiment: labeling, training, backtesting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Label tweets by the price move one hour ahead
    Label {
        #[command(flatten)]
        cfg: Overrides,
    },
    /// Select features and fit a classifier per ticker
    Train {
        #[command(flatten)]
        cfg: Overrides,
    },
    /// Score a saved model on the test period (or the validation split)
    Evaluate {
        #[command(flatten)]
        cfg: Overrides,
        /// Also score a constant predictor
        #[arg(long, value_enum)]
        baseline: Option<Baseline>,
    },
    /// Accuracy over model x ranker x subset size
    SweepFeatures {
        #[command(flatten)]
        cfg: Overrides,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Models to sweep (default: mnb,lr)
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<String>>,
        /// Rankers to sweep (default: cs,fv,mi,rfe)
        #[arg(long, value_delimiter = ',')]
        rankers: Option<Vec<String>>,
    },
    /// Accuracy against training-window length in months
    SweepWindow {
        #[command(flatten)]
        cfg: Overrides,
        #[arg(long, default_value_t = MAX_WINDOW_MONTHS)]
        max_months: u32,
    },
    /// Hourly trading simulation over the test period
    Backtest {
        #[command(flatten)]
        cfg: Overrides,
        /// Signal sources, comma-separated: a (model), b (scored lexicon), c (word lists)
        #[arg(long, value_enum, value_delimiter = ',', default_value = "a")]
        method: Vec<Method>,
    },
    /// Binomial tail probability of k or more correct out of n
    Significance {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Number of time frames tested
        #[arg(long, default_value_t = 1.0)]
        frames: f64,
    },
    /// Sharpe ratio of strategy over benchmark returns
    Sharpe {
        #[command(flatten)]
        cfg: Overrides,
        /// Per-period strategy returns, comma-separated
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        returns: Option<Vec<f64>>,
        /// Per-period benchmark returns, comma-separated
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        benchmark_returns: Option<Vec<f64>>,
        /// Backtest JSON; daily returns are compared with buy-and-hold of --benchmark-bars
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Generate a synthetic corpus with planted signal words
    Synth {
        #[arg(long, default_value = "synth")]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        args: SynthArgs,
    },
    /// Aggregate backtest results across tickers
    Report {
        #[command(flatten)]
        cfg: Overrides,
        /// Backtest JSON files (default: every backtest_*.json in the output directory)
        inputs: Vec<PathBuf>,
    },
}

fn parse_list<T: std::str::FromStr<Err = Error> + Clone>(
    items: Option<&Vec<String>>,
    all: &[T],
) -> Result<Vec<T>> {
    match items {
        None => Ok(all.to_vec()),
        Some(v) => v.iter().map(|s| s.parse()).collect(),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Label { cfg } => commands::label(&RunConfig::resolve(&cfg)?),
        Command::Train { cfg } => commands::train(&RunConfig::resolve(&cfg)?),
        Command::Evaluate { cfg, baseline } => {
            commands::evaluate(&RunConfig::resolve(&cfg)?, baseline)
        }
        Command::SweepFeatures {
            cfg,
            sizes,
            models,
            rankers,
        } => {
            let models = parse_list(models.as_ref(), &ModelKind::ALL)?;
            let rankers = parse_list(rankers.as_ref(), &Ranker::ALL)?;
            let sizes = sizes.unwrap_or_else(|| DEFAULT_SWEEP_SIZES.to_vec());
            commands::sweep_features(&RunConfig::resolve(&cfg)?, &sizes, &models, &rankers)
        }
        Command::SweepWindow { cfg, max_months } => {
            commands::sweep_window(&RunConfig::resolve(&cfg)?, max_months)
        }
        Command::Backtest { cfg, method } => {
            commands::backtest(&RunConfig::resolve(&cfg)?, &method)
        }
        Command::Significance { n, k, p, frames } => commands::significance_cmd(n, k, p, frames),
        Command::Sharpe {
            cfg,
            returns,
            benchmark_returns,
            report,
        } => commands::sharpe_cmd(
            &RunConfig::resolve(&cfg)?,
            returns.as_deref(),
            benchmark_returns.as_deref(),
            report.as_deref(),
        ),
        Command::Synth {
            out_dir,
            seed,
            args,
        } => commands::synth_cmd(&out_dir, seed, &args),
        Command::Report { cfg, inputs } => commands::report(&RunConfig::resolve(&cfg)?, &inputs),
    }
}

pub fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Config => 2,
        ErrorKind::Data => 3,
        ErrorKind::Numeric => 4,
        ErrorKind::Io => 5,
    }
}

/// Parses arguments, runs the command and maps errors to exit codes.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
