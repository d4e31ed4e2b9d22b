//! Fixture-driven tests for both API clients: happy path, one missing
//! value, malformed payload, cache coherence and offline behavior. All of
//! them run without network access.

use std::path::PathBuf;
use std::time::Duration;

use chrono::NaiveDate;
use flowdisagg_core::ingest::{
    fetch_flow, fetch_weather, Cache, FetchOptions, FetchRequest, FixtureTransport, IngestError,
    OfflineTransport, StationSpec,
};
use flowdisagg_core::timeseries::Resolution;

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_dir().join(name)).unwrap()
}

fn opts() -> FetchOptions {
    FetchOptions {
        attempts: 3,
        retry_base: Duration::from_millis(0),
        api_key: Some("test-key".into()),
    }
}

fn station() -> StationSpec {
    StationSpec {
        station_id: "16.193.0".into(),
        latitude: 59.69003,
        longitude: 9.03762,
        name: "Kirkevoll bru".into(),
    }
}

fn flow_request(start: (i32, u32, u32), end: (i32, u32, u32)) -> FetchRequest {
    FetchRequest {
        station: station(),
        start: NaiveDate::from_ymd_opt(start.0, start.1, start.2).unwrap(),
        end: NaiveDate::from_ymd_opt(end.0, end.1, end.2).unwrap(),
        resolution: Resolution::Daily,
        variables: vec!["flow".into()],
        credential_env: "HYDAPI_KEY".into(),
    }
}

fn weather_request(start: (i32, u32, u32), end: (i32, u32, u32)) -> FetchRequest {
    FetchRequest {
        resolution: Resolution::Hourly,
        variables: vec!["precipitation".into(), "temperature_2m".into()],
        ..flow_request(start, end)
    }
}

#[test]
fn hydapi_fixture_matches_hand_transcription() {
    // hydapi_small.json: 2020-06-01=11.5, 02 absent, 03=12.25, 04=null,
    // 05=9.75 — transcribed by eye from the fixture file.
    let transport =
        FixtureTransport::new().with_route("hydapi.nve.no", fixture("hydapi_small.json"));
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let outcome = fetch_flow(
        &flow_request((2020, 6, 1), (2020, 6, 5)),
        &transport,
        &cache,
        &opts(),
    )
    .unwrap();
    assert!(!outcome.from_cache);
    let s = &outcome.series;
    assert_eq!(s.rows(), 5);
    assert_eq!(s.names(), &["flow".to_string()]);
    assert_eq!(s.units(), &["m³/s".to_string()]);
    assert_eq!(
        (0..5).map(|r| s.value(r, 0)).collect::<Vec<_>>(),
        vec![Some(11.5), None, Some(12.25), None, Some(9.75)]
    );
}

#[test]
fn openmeteo_fixture_has_exactly_one_missing_hour() {
    let transport =
        FixtureTransport::new().with_route("open-meteo", fixture("openmeteo_small.json"));
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let outcome = fetch_weather(
        &weather_request((2020, 6, 1), (2020, 6, 2)),
        &transport,
        &cache,
        &opts(),
    )
    .unwrap();
    let s = &outcome.series;
    assert_eq!(s.rows(), 48);
    assert_eq!(s.missing_count(), 1);
    assert_eq!(s.value(17, 1), None); // the null temperature hour
    assert_eq!(s.value(4, 0), Some(0.2)); // precipitation event from the fixture
    assert_eq!(s.units(), &["mm".to_string(), "°C".to_string()]);
}

#[test]
fn malformed_payloads_give_parse_errors_with_paths() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());

    let transport =
        FixtureTransport::new().with_route("hydapi.nve.no", fixture("hydapi_malformed.json"));
    let err = fetch_flow(
        &flow_request((2020, 6, 1), (2020, 6, 5)),
        &transport,
        &cache,
        &opts(),
    )
    .unwrap_err();
    match err {
        IngestError::Parse { path, .. } => {
            assert_eq!(path, "$.data[0].observations[0].value")
        }
        other => panic!("expected parse error, got {other:?}"),
    }

    let transport =
        FixtureTransport::new().with_route("open-meteo", fixture("openmeteo_malformed.json"));
    let err = fetch_weather(
        &weather_request((2020, 6, 1), (2020, 6, 2)),
        &transport,
        &cache,
        &opts(),
    )
    .unwrap_err();
    match err {
        IngestError::Parse { path, .. } => assert_eq!(path, "$.hourly.time"),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn second_identical_fetch_is_served_from_cache_without_network() {
    let transport =
        FixtureTransport::new().with_route("hydapi.nve.no", fixture("hydapi_small.json"));
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let request = flow_request((2020, 6, 1), (2020, 6, 5));

    let first = fetch_flow(&request, &transport, &cache, &opts()).unwrap();
    assert_eq!(transport.calls(), 1);
    let second = fetch_flow(&request, &transport, &cache, &opts()).unwrap();
    assert_eq!(
        transport.calls(),
        1,
        "second fetch must not touch the network"
    );
    assert!(second.from_cache);
    assert_eq!(second.series, first.series);
}

#[test]
fn warm_cache_survives_offline_transport() {
    let transport = FixtureTransport::new()
        .with_route("hydapi.nve.no", fixture("hydapi_small.json"))
        .with_route("open-meteo", fixture("openmeteo_small.json"));
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let flow_req = flow_request((2020, 6, 1), (2020, 6, 5));
    let weather_req = weather_request((2020, 6, 1), (2020, 6, 2));
    fetch_flow(&flow_req, &transport, &cache, &opts()).unwrap();
    fetch_weather(&weather_req, &transport, &cache, &opts()).unwrap();

    // offline: the transport errors on any call, so success proves the
    // cache answered
    let flow = fetch_flow(&flow_req, &OfflineTransport, &cache, &opts()).unwrap();
    assert!(flow.from_cache);
    let weather = fetch_weather(&weather_req, &OfflineTransport, &cache, &opts()).unwrap();
    assert!(weather.from_cache);
}

#[test]
fn offline_with_cold_cache_is_a_network_error() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let err = fetch_flow(
        &flow_request((2020, 6, 1), (2020, 6, 5)),
        &OfflineTransport,
        &cache,
        &opts(),
    )
    .unwrap_err();
    assert!(matches!(err, IngestError::NetworkForbidden));
}

#[test]
fn empty_range_is_a_precondition_error() {
    let err = fetch_flow(
        &flow_request((2020, 6, 5), (2020, 6, 5)),
        &OfflineTransport,
        &Cache::new(tempfile::tempdir().unwrap().path()),
        &opts(),
    )
    .unwrap_err();
    assert!(matches!(err, IngestError::Config { .. }));
}

#[test]
fn missing_credential_is_a_config_error() {
    let transport =
        FixtureTransport::new().with_route("hydapi.nve.no", fixture("hydapi_small.json"));
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let mut request = flow_request((2020, 6, 1), (2020, 6, 5));
    request.credential_env = "HYDAPI_KEY_SURELY_UNSET_FOR_TESTS".into();
    let err = fetch_flow(
        &request,
        &transport,
        &cache,
        &FetchOptions {
            api_key: None,
            retry_base: Duration::from_millis(0),
            attempts: 1,
        },
    )
    .unwrap_err();
    assert!(matches!(err, IngestError::MissingCredential { .. }));
    assert_eq!(transport.calls(), 0);
}

#[test]
fn unknown_weather_variable_is_rejected_before_any_network_call() {
    let transport = FixtureTransport::new();
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let mut request = weather_request((2020, 6, 1), (2020, 6, 2));
    request.variables = vec!["sunshine_index".into()];
    let err = fetch_weather(&request, &transport, &cache, &opts()).unwrap_err();
    match err {
        IngestError::Config { message } => assert!(message.contains("sunshine_index")),
        other => panic!("expected config error, got {other:?}"),
    }
    assert_eq!(transport.calls(), 0);
}

#[test]
fn pipeline_fixtures_parse_into_complete_series() {
    let dir = fixture_dir().join("pipeline");
    let transport = FixtureTransport::from_dir(&dir).unwrap();
    let cache_dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(cache_dir.path());

    let flow = fetch_flow(
        &flow_request((2020, 6, 1), (2020, 7, 10)),
        &transport,
        &cache,
        &opts(),
    )
    .unwrap();
    assert_eq!(flow.series.rows(), 40);
    assert_eq!(flow.series.missing_count(), 0);
    assert_eq!(flow.series.value(2, 0), Some(11.2782)); // hand-checked day 3

    let weather = fetch_weather(
        &weather_request((2020, 6, 1), (2020, 7, 10)),
        &transport,
        &cache,
        &opts(),
    )
    .unwrap();
    assert_eq!(weather.series.rows(), 960);
    assert_eq!(weather.series.missing_count(), 0);
}
