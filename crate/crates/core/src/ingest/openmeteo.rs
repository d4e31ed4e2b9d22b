//! Open-Meteo archive client (hourly or daily weather).
//!
//! Endpoint: GET {OPEN_METEO_ENDPOINT}?latitude=..&longitude=..&
//! start_date=..&end_date=..&hourly=<vars>&timezone=UTC (or `daily=` for
//! daily series). No credential required. The fixture files under
//! `tests/fixtures/` are the schema ground truth for the response payload.

use chrono::Duration;

use super::{
    get_with_retry, json_array, json_f64_or_null, json_get, json_str, parse_json, Cache,
    FetchOptions, FetchOutcome, FetchRequest, IngestError, Transport,
};
use crate::timeseries::{utc_midnight, Resolution, TimeSeries};

pub const OPEN_METEO_ENDPOINT: &str = "https://archive-api.open-meteo.com/v1/archive";

pub const SUPPORTED_HOURLY_VARIABLES: &[&str] = &[
    "precipitation",
    "temperature_2m",
    "rain",
    "snowfall",
    "relative_humidity_2m",
    "wind_speed_10m",
];

pub const SUPPORTED_DAILY_VARIABLES: &[&str] = &[
    "precipitation_sum",
    "temperature_2m_mean",
    "rain_sum",
    "snowfall_sum",
];

/// Default unit per supported variable, used when the payload omits units.
fn default_unit(variable: &str) -> &'static str {
    match variable {
        "precipitation" | "rain" | "snowfall" | "precipitation_sum" | "rain_sum"
        | "snowfall_sum" => "mm",
        "temperature_2m" | "temperature_2m_mean" => "°C",
        "relative_humidity_2m" => "%",
        "wind_speed_10m" => "km/h",
        _ => "",
    }
}

fn supported(resolution: Resolution) -> &'static [&'static str] {
    match resolution {
        Resolution::Hourly => SUPPORTED_HOURLY_VARIABLES,
        Resolution::Daily => SUPPORTED_DAILY_VARIABLES,
    }
}

fn block_key(resolution: Resolution) -> &'static str {
    match resolution {
        Resolution::Hourly => "hourly",
        Resolution::Daily => "daily",
    }
}

fn request_url(request: &FetchRequest) -> String {
    format!(
        "{OPEN_METEO_ENDPOINT}?latitude={:.5}&longitude={:.5}&start_date={}&end_date={}&{}={}&timezone=UTC",
        request.station.latitude,
        request.station.longitude,
        request.start,
        request.end,
        block_key(request.resolution),
        request.variables.join(","),
    )
}

fn validate_variables(request: &FetchRequest) -> Result<(), IngestError> {
    let known = supported(request.resolution);
    for v in &request.variables {
        if !known.contains(&v.as_str()) {
            return Err(IngestError::Config {
                message: format!(
                    "unknown {} weather variable `{v}`; supported: {}",
                    request.resolution,
                    known.join(", ")
                ),
            });
        }
    }
    Ok(())
}

/// Fetch weather for the station coordinates, serving repeats from the
/// cache without touching the transport.
pub fn fetch_weather(
    request: &FetchRequest,
    transport: &dyn Transport,
    cache: &Cache,
    opts: &FetchOptions,
) -> Result<FetchOutcome, IngestError> {
    request.validate()?;
    validate_variables(request)?;
    let key = Cache::key("weather", request);
    if let Some((series, cache_path)) = cache.lookup(&key)? {
        return Ok(FetchOutcome {
            series,
            from_cache: true,
            cache_path,
        });
    }
    let url = request_url(request);
    let resp = get_with_retry(transport, &url, &[], opts)?;
    let series = parse_weather_payload(&resp.body, request)?;
    let cache_path = cache.store(&key, "weather", request, &series)?;
    Ok(FetchOutcome {
        series,
        from_cache: false,
        cache_path,
    })
}

/// Parse an Open-Meteo archive payload. The time array must be the exact
/// contiguous UTC grid for the requested span; null values become missing
/// markers.
pub fn parse_weather_payload(
    body: &str,
    request: &FetchRequest,
) -> Result<TimeSeries, IngestError> {
    let root = parse_json(body)?;
    let block = block_key(request.resolution);
    let data = json_get(&root, "$", block)?;
    let path = format!("$.{block}");

    let times = json_array(json_get(data, &path, "time")?, &format!("{path}.time"))?;
    let rows_total = match request.resolution {
        Resolution::Daily => request.n_days(),
        Resolution::Hourly => request.n_days() * 24,
    };
    if times.len() != rows_total {
        return Err(IngestError::Parse {
            path: format!("{path}.time"),
            message: format!(
                "expected {rows_total} grid points for {}..={}, got {}",
                request.start,
                request.end,
                times.len()
            ),
        });
    }
    let start = utc_midnight(request.start);
    for (i, t) in times.iter().enumerate() {
        let text = json_str(t, &format!("{path}.time[{i}]"))?;
        let expected = match request.resolution {
            Resolution::Hourly => (start + Duration::hours(i as i64))
                .format("%Y-%m-%dT%H:%M")
                .to_string(),
            Resolution::Daily => (request.start + Duration::days(i as i64)).to_string(),
        };
        if text != expected {
            return Err(IngestError::Parse {
                path: format!("{path}.time[{i}]"),
                message: format!("expected grid point `{expected}`, got `{text}`"),
            });
        }
    }

    let units_block = root.get(format!("{block}_units"));
    let mut units = Vec::with_capacity(request.variables.len());
    let mut columns: Vec<Vec<Option<f64>>> = Vec::with_capacity(request.variables.len());
    for var in &request.variables {
        let var_path = format!("{path}.{var}");
        let column = json_array(json_get(data, &path, var)?, &var_path)?;
        if column.len() != rows_total {
            return Err(IngestError::Parse {
                path: var_path,
                message: format!(
                    "array length {} does not match {} time points",
                    column.len(),
                    rows_total
                ),
            });
        }
        let parsed: Vec<Option<f64>> = column
            .iter()
            .enumerate()
            .map(|(i, v)| json_f64_or_null(v, &format!("{var_path}[{i}]")))
            .collect::<Result<_, _>>()?;
        columns.push(parsed);

        let unit = units_block
            .and_then(|u| u.get(var))
            .and_then(|u| u.as_str())
            .unwrap_or(default_unit(var));
        units.push(unit.to_string());
    }

    let rows: Vec<Vec<Option<f64>>> = (0..rows_total)
        .map(|r| columns.iter().map(|c| c[r]).collect())
        .collect();
    Ok(TimeSeries::new(
        start,
        request.resolution,
        request.variables.clone(),
        units,
        rows,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::StationSpec;
    use chrono::NaiveDate;

    fn request(days: u32, resolution: Resolution, variables: &[&str]) -> FetchRequest {
        FetchRequest {
            station: StationSpec {
                station_id: "16.193.0".into(),
                latitude: 59.69003,
                longitude: 9.03762,
                name: "Kirkevoll bru".into(),
            },
            start: NaiveDate::from_ymd_opt(2020, 6, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2020, 6, days).unwrap(),
            resolution,
            variables: variables.iter().map(|s| s.to_string()).collect(),
            credential_env: "HYDAPI_KEY".into(),
        }
    }

    fn hourly_payload(n_hours: usize, null_at: Option<usize>) -> String {
        let times: Vec<String> = (0..n_hours)
            .map(|i| {
                format!(
                    "\"{}\"",
                    (utc_midnight(NaiveDate::from_ymd_opt(2020, 6, 1).unwrap())
                        + Duration::hours(i as i64))
                    .format("%Y-%m-%dT%H:%M")
                )
            })
            .collect();
        let precip: Vec<String> = (0..n_hours)
            .map(|i| format!("{}", 0.1 * i as f64))
            .collect();
        let temp: Vec<String> = (0..n_hours)
            .map(|i| {
                if Some(i) == null_at {
                    "null".to_string()
                } else {
                    format!("{}", 5.0 + 0.01 * i as f64)
                }
            })
            .collect();
        format!(
            r#"{{"latitude":59.7,"longitude":9.0,"utc_offset_seconds":0,"timezone":"UTC",
"hourly_units":{{"time":"iso8601","precipitation":"mm","temperature_2m":"°C"}},
"hourly":{{"time":[{}],"precipitation":[{}],"temperature_2m":[{}]}}}}"#,
            times.join(","),
            precip.join(","),
            temp.join(",")
        )
    }

    #[test]
    fn happy_path_two_variables() {
        let req = request(2, Resolution::Hourly, &["precipitation", "temperature_2m"]);
        let series = parse_weather_payload(&hourly_payload(48, None), &req).unwrap();
        assert_eq!(series.rows(), 48);
        assert_eq!(series.width(), 2);
        assert_eq!(series.units(), &["mm".to_string(), "°C".to_string()]);
        assert_eq!(series.value(10, 0), Some(1.0));
        assert_eq!(series.missing_count(), 0);
    }

    #[test]
    fn one_null_hour_becomes_one_missing_marker() {
        let req = request(2, Resolution::Hourly, &["precipitation", "temperature_2m"]);
        let series = parse_weather_payload(&hourly_payload(48, Some(17)), &req).unwrap();
        assert_eq!(series.missing_count(), 1);
        assert_eq!(series.value(17, 1), None);
        assert_eq!(series.value(17, 0), Some(0.1 * 17.0));
    }

    #[test]
    fn unknown_variable_lists_supported_names() {
        let req = request(2, Resolution::Hourly, &["precipitation", "sunshine"]);
        let err = validate_variables(&req).unwrap_err();
        match err {
            IngestError::Config { message } => {
                assert!(message.contains("sunshine"));
                assert!(message.contains("temperature_2m"));
            }
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_grid_is_a_parse_error() {
        let req = request(2, Resolution::Hourly, &["precipitation", "temperature_2m"]);
        let err = parse_weather_payload(&hourly_payload(47, None), &req).unwrap_err();
        match err {
            IngestError::Parse { path, .. } => assert_eq!(path, "$.hourly.time"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn url_carries_coordinates_span_and_variables() {
        let req = request(3, Resolution::Hourly, &["precipitation", "temperature_2m"]);
        assert_eq!(
            request_url(&req),
            "https://archive-api.open-meteo.com/v1/archive?latitude=59.69003&longitude=9.03762&start_date=2020-06-01&end_date=2020-06-03&hourly=precipitation,temperature_2m&timezone=UTC"
        );
    }
}
