//! NVE HydAPI client (flow observations).
//!
//! Endpoint: GET {HYDAPI_ENDPOINT}?StationId=...&Parameter=1001&
//! ResolutionTime=<minutes>&ReferenceTime=<start>/<end>, with the API key in
//! the `X-API-Key` header. Parameter 1001 is discharge; ResolutionTime is
//! 1440 for daily and 60 for hourly series. The fixture files under
//! `tests/fixtures/` are the schema ground truth for the response payload.

use chrono::{DateTime, Utc};

use super::{
    get_with_retry, json_array, json_f64_or_null, json_get, json_str, parse_json, Cache,
    FetchOptions, FetchOutcome, FetchRequest, IngestError, Transport,
};
use crate::timeseries::{utc_midnight, Resolution, TimeSeries};

pub const HYDAPI_ENDPOINT: &str = "https://hydapi.nve.no/api/v1/Observations";

/// HydAPI parameter id for discharge.
pub const FLOW_PARAMETER: &str = "1001";

fn resolution_minutes(resolution: Resolution) -> u32 {
    match resolution {
        Resolution::Hourly => 60,
        Resolution::Daily => 1440,
    }
}

fn request_url(request: &FetchRequest) -> String {
    format!(
        "{HYDAPI_ENDPOINT}?StationId={}&Parameter={FLOW_PARAMETER}&ResolutionTime={}&ReferenceTime={}/{}",
        request.station.station_id,
        resolution_minutes(request.resolution),
        request.start,
        request.end,
    )
}

/// Fetch daily (or hourly) flow for a station, serving repeats from the
/// cache without touching the transport.
pub fn fetch_flow(
    request: &FetchRequest,
    transport: &dyn Transport,
    cache: &Cache,
    opts: &FetchOptions,
) -> Result<FetchOutcome, IngestError> {
    request.validate()?;
    let key = Cache::key("flow", request);
    if let Some((series, cache_path)) = cache.lookup(&key)? {
        return Ok(FetchOutcome {
            series,
            from_cache: true,
            cache_path,
        });
    }

    let api_key = match &opts.api_key {
        Some(k) => k.clone(),
        None => {
            std::env::var(&request.credential_env).map_err(|_| IngestError::MissingCredential {
                env: request.credential_env.clone(),
            })?
        }
    };

    let url = request_url(request);
    let resp = get_with_retry(transport, &url, &[("X-API-Key", &api_key)], opts)?;
    let series = parse_flow_payload(&resp.body, request)?;
    let cache_path = cache.store(&key, "flow", request, &series)?;
    Ok(FetchOutcome {
        series,
        from_cache: false,
        cache_path,
    })
}

/// Parse a HydAPI observations payload onto the request's dense time grid.
/// Hours or days the payload does not mention stay missing; null values
/// become explicit missing markers.
pub fn parse_flow_payload(body: &str, request: &FetchRequest) -> Result<TimeSeries, IngestError> {
    let root = parse_json(body)?;
    let data = json_array(json_get(&root, "$", "data")?, "$.data")?;
    let item = data.first().ok_or_else(|| IngestError::Parse {
        path: "$.data".into(),
        message: "payload contains no series".into(),
    })?;
    let unit = json_str(json_get(item, "$.data[0]", "unit")?, "$.data[0].unit")?;
    let observations = json_array(
        json_get(item, "$.data[0]", "observations")?,
        "$.data[0].observations",
    )?;

    let start = utc_midnight(request.start);
    let rows_total = match request.resolution {
        Resolution::Daily => request.n_days(),
        Resolution::Hourly => request.n_days() * 24,
    };
    let mut values: Vec<Option<f64>> = vec![None; rows_total];
    let mut seen: Vec<bool> = vec![false; rows_total];

    for (i, obs) in observations.iter().enumerate() {
        let path = format!("$.data[0].observations[{i}]");
        let time_text = json_str(json_get(obs, &path, "time")?, &format!("{path}.time"))?;
        let time: DateTime<Utc> = DateTime::parse_from_rfc3339(time_text)
            .map_err(|e| IngestError::Parse {
                path: format!("{path}.time"),
                message: format!("bad timestamp `{time_text}`: {e}"),
            })?
            .with_timezone(&Utc);
        let delta = time - start;
        let idx = match request.resolution {
            Resolution::Daily => delta.num_days(),
            Resolution::Hourly => delta.num_hours(),
        };
        let on_grid = idx >= 0
            && (idx as usize) < rows_total
            && start + request.resolution.step() * idx as i32 == time;
        if !on_grid {
            return Err(IngestError::Parse {
                path: format!("{path}.time"),
                message: format!(
                    "timestamp {time} outside the requested {} grid {}..={}",
                    request.resolution, request.start, request.end
                ),
            });
        }
        let idx = idx as usize;
        if seen[idx] {
            return Err(IngestError::Parse {
                path: format!("{path}.time"),
                message: format!("duplicate observation for {time}"),
            });
        }
        seen[idx] = true;
        values[idx] = json_f64_or_null(json_get(obs, &path, "value")?, &format!("{path}.value"))?;
    }

    Ok(TimeSeries::new(
        start,
        request.resolution,
        vec!["flow".to_string()],
        vec![unit.to_string()],
        values.into_iter().map(|v| vec![v]).collect(),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::StationSpec;
    use chrono::NaiveDate;

    fn request(days: u32) -> FetchRequest {
        FetchRequest {
            station: StationSpec {
                station_id: "16.193.0".into(),
                latitude: 59.69003,
                longitude: 9.03762,
                name: "Kirkevoll bru".into(),
            },
            start: NaiveDate::from_ymd_opt(2020, 6, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2020, 6, days).unwrap(),
            resolution: Resolution::Daily,
            variables: vec!["flow".into()],
            credential_env: "HYDAPI_KEY_TEST_UNSET".into(),
        }
    }

    fn payload(observations: &str) -> String {
        format!(
            r#"{{"apiVersion":"1.0","itemCount":1,"data":[{{"stationId":"16.193.0","stationName":"Kirkevoll bru","parameter":1001,"parameterNameEnglish":"Discharge","unit":"m³/s","observationCount":3,"observations":[{observations}]}}]}}"#
        )
    }

    #[test]
    fn happy_path_parses_onto_the_grid() {
        let body = payload(
            r#"{"time":"2020-06-01T00:00:00Z","value":11.5,"quality":2},
               {"time":"2020-06-02T00:00:00Z","value":12.25,"quality":2},
               {"time":"2020-06-03T00:00:00Z","value":10.0,"quality":2}"#,
        );
        let series = parse_flow_payload(&body, &request(3)).unwrap();
        assert_eq!(series.rows(), 3);
        assert_eq!(series.units(), &["m³/s".to_string()]);
        assert_eq!(series.value(0, 0), Some(11.5));
        assert_eq!(series.value(1, 0), Some(12.25));
        assert_eq!(series.value(2, 0), Some(10.0));
    }

    #[test]
    fn null_and_absent_observations_become_missing() {
        let body = payload(
            r#"{"time":"2020-06-01T00:00:00Z","value":11.5},
               {"time":"2020-06-03T00:00:00Z","value":null}"#,
        );
        let series = parse_flow_payload(&body, &request(4)).unwrap();
        assert_eq!(series.value(0, 0), Some(11.5));
        assert_eq!(series.value(1, 0), None); // absent from payload
        assert_eq!(series.value(2, 0), None); // explicit null
        assert_eq!(series.value(3, 0), None);
        assert_eq!(series.missing_count(), 3);
    }

    #[test]
    fn off_grid_time_is_a_parse_error_with_path() {
        let body = payload(r#"{"time":"2020-06-01T07:30:00Z","value":1.0}"#);
        let err = parse_flow_payload(&body, &request(3)).unwrap_err();
        match err {
            IngestError::Parse { path, .. } => {
                assert_eq!(path, "$.data[0].observations[0].time")
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_payload_names_the_offending_path() {
        let err = parse_flow_payload(r#"{"data":[{"unit":"m³/s"}]}"#, &request(3)).unwrap_err();
        match err {
            IngestError::Parse { path, .. } => assert_eq!(path, "$.data[0].observations"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn url_carries_station_parameter_resolution_and_range() {
        let url = request_url(&request(3));
        assert_eq!(
            url,
            "https://hydapi.nve.no/api/v1/Observations?StationId=16.193.0&Parameter=1001&ResolutionTime=1440&ReferenceTime=2020-06-01/2020-06-03"
        );
    }
}
