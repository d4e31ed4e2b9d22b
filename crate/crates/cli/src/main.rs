//! Command-line pipeline for daily-to-hourly flow disaggregation.
//!
//! Subcommands: `fetch` (HydAPI flow + Open-Meteo weather into a local
//! cache), `synth` (ground-truth synthetic dataset), `train`, `disagg`,
//! `eval`. Every run echoes its effective configuration into the output
//! directory; identical inputs and seed give byte-identical outputs.
//!
//! Exit codes: 0 success, 1 configuration/usage/IO, 2 network, 3 data
//! parse. Stdout carries machine-readable `key=value` summaries, stderr
//! the diagnostics.

mod commands;
mod config;

use std::path::PathBuf;

use chrono::NaiveDate;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use flowdisagg_core::disagg::{CheckpointError, DisaggError};
use flowdisagg_core::eval::EvalError;
use flowdisagg_core::ingest::IngestError;
use flowdisagg_core::scaler::ScalerError;
use flowdisagg_core::timeseries::TimeSeriesError;
use flowdisagg_core::window::WindowError;

pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NETWORK: i32 = 2;
pub const EXIT_PARSE: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        let code = match &e {
            IngestError::Http { .. } | IngestError::NetworkForbidden => EXIT_NETWORK,
            IngestError::Parse { .. } => EXIT_PARSE,
            IngestError::Series(_) => EXIT_PARSE,
            IngestError::Config { .. }
            | IngestError::MissingCredential { .. }
            | IngestError::Io(_) => EXIT_CONFIG,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<TimeSeriesError> for CliError {
    fn from(e: TimeSeriesError) -> Self {
        let code = match &e {
            TimeSeriesError::Io(_) => EXIT_CONFIG,
            _ => EXIT_PARSE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<WindowError> for CliError {
    fn from(e: WindowError) -> Self {
        Self::config(e.to_string())
    }
}

impl From<ScalerError> for CliError {
    fn from(e: ScalerError) -> Self {
        Self::config(e.to_string())
    }
}

impl From<DisaggError> for CliError {
    fn from(e: DisaggError) -> Self {
        let code = match &e {
            DisaggError::ResultsCsv { .. } => EXIT_PARSE,
            _ => EXIT_CONFIG,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<CheckpointError> for CliError {
    fn from(e: CheckpointError) -> Self {
        let code = match &e {
            CheckpointError::Json(_) => EXIT_PARSE,
            _ => EXIT_CONFIG,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        Self::config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::config(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "flowdisagg",
    version,
    about = "Disaggregate daily river flow into hourly flow using hourly weather"
)]
pub struct Cli {
    /// Seed for synthesis and training (overrides config file)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Forbid all network access; only the cache may answer fetches
    #[arg(long, global = true)]
    pub offline: bool,
    /// JSON config file (CLI flags take precedence over it)
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fetch flow (NVE HydAPI) and weather (Open-Meteo) into the cache and
    /// write conventional CSVs into the output directory
    Fetch(FetchArgs),
    /// Generate a synthetic dataset with known hourly flow
    Synth(SynthArgs),
    /// Build windows and train the disaggregation model
    Train(TrainArgs),
    /// Disaggregate daily flow into hourly flow with a trained checkpoint
    Disagg(DisaggArgs),
    /// Compare the model against linear interpolation and emit figures
    Eval(EvalArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FetchWhat {
    Flow,
    Weather,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeatherResolution {
    Hourly,
    Daily,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitChoice {
    Train,
    Test,
    All,
}

#[derive(clap::Args, Debug)]
pub struct FetchArgs {
    #[arg(long, value_enum, default_value = "both")]
    pub what: FetchWhat,
    /// HydAPI station identifier (default is a documented placeholder for
    /// Kirkevoll bru)
    #[arg(long)]
    pub station_id: Option<String>,
    #[arg(long)]
    pub station_name: Option<String>,
    #[arg(long)]
    pub lat: Option<f64>,
    #[arg(long)]
    pub lon: Option<f64>,
    /// First day of the range (inclusive)
    #[arg(long)]
    pub start: Option<NaiveDate>,
    /// Last day of the range (inclusive)
    #[arg(long)]
    pub end: Option<NaiveDate>,
    #[arg(long, value_enum, default_value = "hourly")]
    pub weather_resolution: WeatherResolution,
    /// Comma-separated Open-Meteo variable names
    #[arg(long, value_delimiter = ',')]
    pub variables: Option<Vec<String>>,
    #[arg(long, value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Serve responses from canned payloads in this directory instead of
    /// the network (testing aid; see FixtureTransport)
    #[arg(long, value_name = "DIR")]
    pub fixture_dir: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct SynthArgs {
    /// Number of days to generate (at least 8)
    #[arg(long)]
    pub days: Option<usize>,
}

#[derive(clap::Args, Debug)]
pub struct TrainArgs {
    /// Directory with daily_flow.csv and hourly_weather.csv (daily_weather
    /// and hourly_flow optional); falls back to the config file's data_dir
    #[arg(long, value_name = "DIR")]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub context_days: Option<usize>,
}

#[derive(clap::Args, Debug)]
pub struct DisaggArgs {
    #[arg(long, value_name = "PATH")]
    pub checkpoint: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub data_dir: Option<PathBuf>,
    /// Which chronological split of the windows to disaggregate
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitChoice,
    /// Restrict to days >= this date (overrides --split)
    #[arg(long)]
    pub start: Option<NaiveDate>,
    /// Restrict to days <= this date (overrides --split)
    #[arg(long)]
    pub end: Option<NaiveDate>,
}

#[derive(clap::Args, Debug)]
pub struct EvalArgs {
    #[arg(long, value_name = "DIR")]
    pub data_dir: Option<PathBuf>,
    /// results.csv produced by `disagg`
    #[arg(long, value_name = "PATH")]
    pub results: PathBuf,
    /// How many evenly spaced days get figure files
    #[arg(long, default_value_t = 4)]
    pub figure_days: usize,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp
                    | ErrorKind::DisplayVersion
                    | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) {
                print!("{e}");
                std::process::exit(0);
            }
            eprint!("{e}");
            std::process::exit(EXIT_CONFIG);
        }
    };
    match commands::run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {}", e.message);
            std::process::exit(e.code);
        }
    }
}
