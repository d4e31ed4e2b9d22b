//! Data acquisition: NVE HydAPI flow, Open-Meteo weather, a local CSV
//! cache so repeated requests never touch the network twice, and a
//! synthetic generator providing ground-truth hourly flow for offline
//! testing and benchmarks.

mod cache;
mod hydapi;
mod openmeteo;
mod synth;
mod transport;

pub use cache::{Cache, CacheManifest};
pub use hydapi::{fetch_flow, FLOW_PARAMETER, HYDAPI_ENDPOINT};
pub use openmeteo::{
    fetch_weather, OPEN_METEO_ENDPOINT, SUPPORTED_DAILY_VARIABLES, SUPPORTED_HOURLY_VARIABLES,
};
pub use synth::{synth_generate, SynthConfig, SynthData, SynthSummary};
pub use transport::{
    get_with_retry, FixtureTransport, HttpResponse, HttpTransport, OfflineTransport, Transport,
};

use std::time::Duration;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timeseries::{Resolution, TimeSeries, TimeSeriesError};

/// Environment variable holding the HydAPI key.
pub const HYDAPI_KEY_ENV: &str = "HYDAPI_KEY";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("configuration: {message}")]
    Config { message: String },
    #[error("missing API credential: set the {env} environment variable")]
    MissingCredential { env: String },
    #[error("http {status:?}: {message}")]
    Http {
        status: Option<u16>,
        message: String,
    },
    #[error("network access is forbidden (--offline) and the cache has no entry")]
    NetworkForbidden,
    #[error("payload parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Series(#[from] TimeSeriesError),
}

/// A gauging station and its coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationSpec {
    pub station_id: String,
    pub latitude: f64,
    pub longitude: f64,
    pub name: String,
}

impl StationSpec {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.latitude.abs() > 90.0 || !self.latitude.is_finite() {
            return Err(IngestError::Config {
                message: format!("latitude {} out of range", self.latitude),
            });
        }
        if self.longitude.abs() > 180.0 || !self.longitude.is_finite() {
            return Err(IngestError::Config {
                message: format!("longitude {} out of range", self.longitude),
            });
        }
        Ok(())
    }
}

/// One dated data request against either API. The date range is inclusive
/// on both ends and must span at least two days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FetchRequest {
    pub station: StationSpec,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub resolution: Resolution,
    pub variables: Vec<String>,
    /// Name of the environment variable carrying the HydAPI key.
    pub credential_env: String,
}

impl FetchRequest {
    pub fn validate(&self) -> Result<(), IngestError> {
        self.station.validate()?;
        if self.start >= self.end {
            return Err(IngestError::Config {
                message: format!("empty date range: start {} >= end {}", self.start, self.end),
            });
        }
        if self.variables.is_empty() {
            return Err(IngestError::Config {
                message: "variable list must not be empty".into(),
            });
        }
        Ok(())
    }

    pub fn n_days(&self) -> usize {
        (self.end - self.start).num_days() as usize + 1
    }
}

/// Retry policy and credential override for fetches.
#[derive(Debug, Clone)]
pub struct FetchOptions {
    pub attempts: u32,
    pub retry_base: Duration,
    /// Overrides the environment credential (used by tests).
    pub api_key: Option<String>,
}

impl Default for FetchOptions {
    fn default() -> Self {
        Self {
            attempts: 3,
            retry_base: Duration::from_secs(1),
            api_key: None,
        }
    }
}

/// A fetched series plus where it came from.
#[derive(Debug)]
pub struct FetchOutcome {
    pub series: TimeSeries,
    pub from_cache: bool,
    pub cache_path: std::path::PathBuf,
}

// --- small json helpers shared by both API parsers ---------------------

pub(crate) fn json_get<'a>(
    value: &'a serde_json::Value,
    path: &str,
    key: &str,
) -> Result<&'a serde_json::Value, IngestError> {
    value
        .as_object()
        .ok_or_else(|| IngestError::Parse {
            path: path.to_string(),
            message: "expected an object".into(),
        })?
        .get(key)
        .ok_or_else(|| IngestError::Parse {
            path: format!("{path}.{key}"),
            message: "missing field".into(),
        })
}

pub(crate) fn json_array<'a>(
    value: &'a serde_json::Value,
    path: &str,
) -> Result<&'a Vec<serde_json::Value>, IngestError> {
    value.as_array().ok_or_else(|| IngestError::Parse {
        path: path.to_string(),
        message: "expected an array".into(),
    })
}

pub(crate) fn json_str<'a>(
    value: &'a serde_json::Value,
    path: &str,
) -> Result<&'a str, IngestError> {
    value.as_str().ok_or_else(|| IngestError::Parse {
        path: path.to_string(),
        message: "expected a string".into(),
    })
}

/// A number, or `None` for JSON null (a missing observation).
pub(crate) fn json_f64_or_null(
    value: &serde_json::Value,
    path: &str,
) -> Result<Option<f64>, IngestError> {
    if value.is_null() {
        return Ok(None);
    }
    value.as_f64().map(Some).ok_or_else(|| IngestError::Parse {
        path: path.to_string(),
        message: "expected a number or null".into(),
    })
}

pub(crate) fn parse_json(body: &str) -> Result<serde_json::Value, IngestError> {
    serde_json::from_str(body).map_err(|e| IngestError::Parse {
        path: "$".into(),
        message: e.to_string(),
    })
}
