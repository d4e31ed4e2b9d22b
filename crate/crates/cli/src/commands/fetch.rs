//! `fetch`: HydAPI flow and Open-Meteo weather into the cache, plus
//! conventional CSVs in the output directory.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use flowdisagg_core::ingest::{
    fetch_flow, fetch_weather, Cache, FetchOptions, FetchOutcome, FetchRequest, FixtureTransport,
    HttpTransport, OfflineTransport, StationSpec, Transport,
};
use flowdisagg_core::timeseries::Resolution;

use super::{DAILY_FLOW_CSV, DAILY_WEATHER_CSV, HOURLY_WEATHER_CSV};
use crate::config::{
    default_variables, EffectiveConfig, FileConfig, DEFAULT_END, DEFAULT_LATITUDE,
    DEFAULT_LONGITUDE, DEFAULT_START, DEFAULT_STATION_ID, DEFAULT_STATION_NAME,
};
use crate::{Cli, CliError, FetchArgs, FetchWhat, WeatherResolution};

pub fn run(cli: &Cli, file: &FileConfig, args: &FetchArgs) -> Result<(), CliError> {
    let station = resolve_station(file, args);
    let (start, end) = resolve_range(file, args);
    let variables = args
        .variables
        .clone()
        .or_else(|| file.variables.clone())
        .unwrap_or_else(default_variables);
    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let cache_dir = args
        .cache_dir
        .clone()
        .or_else(|| file.cache_dir.clone())
        .unwrap_or_else(|| out_dir.join("cache"));
    let cache = Cache::new(&cache_dir);
    // Offline and fixture transports make no real network call, so the
    // HydAPI credential is not required for them.
    let opts = FetchOptions {
        api_key: (cli.offline || args.fixture_dir.is_some()).then(|| "unused".to_string()),
        ..FetchOptions::default()
    };

    let transport: Box<dyn Transport> = if cli.offline {
        Box::new(OfflineTransport)
    } else if let Some(dir) = &args.fixture_dir {
        Box::new(FixtureTransport::from_dir(dir)?)
    } else {
        Box::new(HttpTransport::new()?)
    };

    let mut effective = EffectiveConfig::new("fetch", cli.seed.unwrap_or(0), cli.offline, &out_dir);
    effective.cache_dir = Some(cache_dir.clone());
    effective.station = Some(station.clone());
    effective.start = Some(start);
    effective.end = Some(end);
    effective.variables = Some(variables.clone());
    effective.echo()?;

    if matches!(args.what, FetchWhat::Flow | FetchWhat::Both) {
        let request = FetchRequest {
            station: station.clone(),
            start,
            end,
            resolution: Resolution::Daily,
            variables: vec!["flow".to_string()],
            credential_env: flowdisagg_core::ingest::HYDAPI_KEY_ENV.to_string(),
        };
        let outcome = fetch_flow(&request, transport.as_ref(), &cache, &opts)?;
        report("flow", &outcome, &out_dir.join(DAILY_FLOW_CSV))?;
    }

    if matches!(args.what, FetchWhat::Weather | FetchWhat::Both) {
        let resolution = match args.weather_resolution {
            WeatherResolution::Hourly => Resolution::Hourly,
            WeatherResolution::Daily => Resolution::Daily,
        };
        let request = FetchRequest {
            station,
            start,
            end,
            resolution,
            variables,
            credential_env: flowdisagg_core::ingest::HYDAPI_KEY_ENV.to_string(),
        };
        let outcome = fetch_weather(&request, transport.as_ref(), &cache, &opts)?;
        let name = match resolution {
            Resolution::Hourly => HOURLY_WEATHER_CSV,
            Resolution::Daily => DAILY_WEATHER_CSV,
        };
        report("weather", &outcome, &out_dir.join(name))?;
    }

    Ok(())
}

fn report(kind: &str, outcome: &FetchOutcome, copy_to: &Path) -> Result<(), CliError> {
    outcome.series.write_csv_path(copy_to)?;
    println!(
        "fetched kind={kind} rows={} missing={} from_cache={} cache={} data={}",
        outcome.series.rows(),
        outcome.series.missing_count(),
        outcome.from_cache,
        outcome.cache_path.display(),
        copy_to.display(),
    );
    if outcome.from_cache {
        eprintln!("note: {kind} served from cache, no network call made");
    }
    Ok(())
}

fn resolve_station(file: &FileConfig, args: &FetchArgs) -> StationSpec {
    let base = file.station.clone().unwrap_or(StationSpec {
        station_id: DEFAULT_STATION_ID.to_string(),
        latitude: DEFAULT_LATITUDE,
        longitude: DEFAULT_LONGITUDE,
        name: DEFAULT_STATION_NAME.to_string(),
    });
    StationSpec {
        station_id: args.station_id.clone().unwrap_or(base.station_id),
        latitude: args.lat.unwrap_or(base.latitude),
        longitude: args.lon.unwrap_or(base.longitude),
        name: args.station_name.clone().unwrap_or(base.name),
    }
}

fn resolve_range(file: &FileConfig, args: &FetchArgs) -> (NaiveDate, NaiveDate) {
    let default_start =
        NaiveDate::from_ymd_opt(DEFAULT_START.0, DEFAULT_START.1, DEFAULT_START.2).unwrap();
    let default_end = NaiveDate::from_ymd_opt(DEFAULT_END.0, DEFAULT_END.1, DEFAULT_END.2).unwrap();
    (
        args.start.or(file.start).unwrap_or(default_start),
        args.end.or(file.end).unwrap_or(default_end),
    )
}
