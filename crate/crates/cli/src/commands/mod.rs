//! Subcommand implementations.

mod disagg;
mod eval;
mod fetch;
mod synth;
mod train;

use std::collections::HashMap;
use std::path::Path;

use flowdisagg_core::timeseries::{AggregateRule, Resolution, TimeSeries};
use flowdisagg_core::window::{build_windows, WindowSet};

use crate::config::FileConfig;
use crate::{Cli, CliError, Command};

pub const DAILY_FLOW_CSV: &str = "daily_flow.csv";

/// CLI flag first, then the config file's `data_dir`.
pub fn resolve_data_dir(
    flag: Option<std::path::PathBuf>,
    file: &FileConfig,
) -> Result<std::path::PathBuf, CliError> {
    flag.or_else(|| file.data_dir.clone()).ok_or_else(|| {
        CliError::config("no data directory: pass --data-dir or set data_dir in the config file")
    })
}
pub const DAILY_WEATHER_CSV: &str = "daily_weather.csv";
pub const HOURLY_FLOW_CSV: &str = "hourly_flow.csv";
pub const HOURLY_WEATHER_CSV: &str = "hourly_weather.csv";

pub fn run(cli: Cli) -> Result<(), CliError> {
    let file_config = FileConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Fetch(args) => fetch::run(&cli, &file_config, args),
        Command::Synth(args) => synth::run(&cli, &file_config, args),
        Command::Train(args) => train::run(&cli, &file_config, args),
        Command::Disagg(args) => disagg::run(&cli, &file_config, args),
        Command::Eval(args) => eval::run(&cli, &file_config, args),
    }
}

/// The four conventional series of a data directory. Daily weather is
/// derived from hourly weather when no daily_weather.csv is present, so a
/// fetched dataset (daily flow + hourly weather) is already trainable.
pub struct DataSet {
    pub daily_flow: TimeSeries,
    pub daily_weather: TimeSeries,
    pub hourly_weather: TimeSeries,
    pub hourly_flow: Option<TimeSeries>,
}

pub fn load_data_dir(
    dir: &Path,
    rules: &HashMap<String, AggregateRule>,
) -> Result<DataSet, CliError> {
    let require = |name: &str| {
        let path = dir.join(name);
        if !path.exists() {
            return Err(CliError::config(format!(
                "missing {} in data dir {}",
                name,
                dir.display()
            )));
        }
        Ok(path)
    };
    let daily_flow = TimeSeries::read_csv_path(&require(DAILY_FLOW_CSV)?, Resolution::Daily)?;
    let hourly_weather =
        TimeSeries::read_csv_path(&require(HOURLY_WEATHER_CSV)?, Resolution::Hourly)?;

    let daily_weather_path = dir.join(DAILY_WEATHER_CSV);
    let daily_weather = if daily_weather_path.exists() {
        TimeSeries::read_csv_path(&daily_weather_path, Resolution::Daily)?
    } else {
        let mut rules = rules.clone();
        for name in hourly_weather.names() {
            rules
                .entry(name.clone())
                .or_insert_with(|| crate::config::default_rule(name));
        }
        hourly_weather.aggregate_hourly_to_daily(&rules)?
    };

    let hourly_flow_path = dir.join(HOURLY_FLOW_CSV);
    let hourly_flow = if hourly_flow_path.exists() {
        Some(TimeSeries::read_csv_path(
            &hourly_flow_path,
            Resolution::Hourly,
        )?)
    } else {
        None
    };

    Ok(DataSet {
        daily_flow,
        daily_weather,
        hourly_weather,
        hourly_flow,
    })
}

pub fn build_window_set(data: &DataSet, context_days: usize) -> Result<WindowSet, CliError> {
    Ok(build_windows(
        &data.daily_weather,
        &data.daily_flow,
        &data.hourly_weather,
        data.hourly_flow.as_ref(),
        context_days,
    )?)
}

/// Trim both daily series to the intersection of their spans so windows
/// can be built from sources with slightly different coverage.
pub fn align_daily_spans(
    daily_weather: &TimeSeries,
    daily_flow: &TimeSeries,
) -> Result<(TimeSeries, TimeSeries), CliError> {
    if daily_weather.start() == daily_flow.start() && daily_weather.rows() == daily_flow.rows() {
        return Ok((daily_weather.clone(), daily_flow.clone()));
    }
    let start = daily_weather.start().max(daily_flow.start());
    let end = (daily_weather.timestamp(daily_weather.rows() - 1))
        .min(daily_flow.timestamp(daily_flow.rows() - 1));
    if end < start {
        return Err(CliError::config(
            "daily weather and daily flow series do not overlap",
        ));
    }
    let slice = |s: &TimeSeries| -> Result<TimeSeries, CliError> {
        let first = s.row_at(start).expect("aligned start");
        let last = s.row_at(end).expect("aligned end");
        let rows: Vec<Vec<Option<f64>>> = (first..=last).map(|r| s.row(r).to_vec()).collect();
        Ok(TimeSeries::new(
            start,
            s.resolution(),
            s.names().to_vec(),
            s.units().to_vec(),
            rows,
        )?)
    };
    Ok((slice(daily_weather)?, slice(daily_flow)?))
}
