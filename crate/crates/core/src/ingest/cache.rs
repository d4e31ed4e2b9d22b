//! Write-once fetch cache: one canonical CSV per series plus a JSON
//! manifest recording the request parameters and fetch time.

use std::path::{Path, PathBuf};

use chrono::Utc;
use serde::{Deserialize, Serialize};

use super::{FetchRequest, IngestError};
use crate::timeseries::{Resolution, TimeSeries};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheManifest {
    pub key: String,
    pub kind: String,
    pub station_id: String,
    pub latitude: f64,
    pub longitude: f64,
    pub start: chrono::NaiveDate,
    pub end: chrono::NaiveDate,
    pub resolution: Resolution,
    pub variables: Vec<String>,
    pub units: Vec<String>,
    pub fetched_at: String,
    pub rows: usize,
    pub missing: usize,
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Deterministic cache key for a request.
    pub fn key(kind: &str, request: &FetchRequest) -> String {
        let locator = if kind == "flow" {
            request.station.station_id.clone()
        } else {
            format!(
                "{:.5}_{:.5}",
                request.station.latitude, request.station.longitude
            )
        };
        sanitize(&format!(
            "{kind}_{locator}_{}_{}_{}_{}",
            request.start,
            request.end,
            request.resolution,
            request.variables.join("+"),
        ))
    }

    fn csv_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.csv"))
    }

    fn manifest_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.manifest.json"))
    }

    /// Returns the cached series if the key exists. No network involved.
    pub fn lookup(&self, key: &str) -> Result<Option<(TimeSeries, PathBuf)>, IngestError> {
        let manifest_path = self.manifest_path(key);
        if !manifest_path.exists() {
            return Ok(None);
        }
        let manifest: CacheManifest =
            serde_json::from_str(&std::fs::read_to_string(&manifest_path)?).map_err(|e| {
                IngestError::Parse {
                    path: manifest_path.display().to_string(),
                    message: e.to_string(),
                }
            })?;
        let csv_path = self.csv_path(key);
        let series = TimeSeries::read_csv_path(&csv_path, manifest.resolution)?
            .with_units(manifest.units.clone())?;
        Ok(Some((series, csv_path)))
    }

    /// Store a fetched series. A key is written once; if it already exists
    /// the existing files are left untouched.
    pub fn store(
        &self,
        key: &str,
        kind: &str,
        request: &FetchRequest,
        series: &TimeSeries,
    ) -> Result<PathBuf, IngestError> {
        std::fs::create_dir_all(&self.dir)?;
        let csv_path = self.csv_path(key);
        let manifest_path = self.manifest_path(key);
        if manifest_path.exists() {
            return Ok(csv_path);
        }
        series.write_csv_path(&csv_path)?;
        let manifest = CacheManifest {
            key: key.to_string(),
            kind: kind.to_string(),
            station_id: request.station.station_id.clone(),
            latitude: request.station.latitude,
            longitude: request.station.longitude,
            start: request.start,
            end: request.end,
            resolution: series.resolution(),
            variables: series.names().to_vec(),
            units: series.units().to_vec(),
            fetched_at: Utc::now().to_rfc3339(),
            rows: series.rows(),
            missing: series.missing_count(),
        };
        std::fs::write(
            &manifest_path,
            serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
        )?;
        Ok(csv_path)
    }
}

fn sanitize(raw: &str) -> String {
    raw.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '+' {
                c
            } else {
                '-'
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::StationSpec;
    use crate::timeseries::utc_midnight;
    use chrono::NaiveDate;

    fn request() -> FetchRequest {
        FetchRequest {
            station: StationSpec {
                station_id: "16.193.0".into(),
                latitude: 59.69003,
                longitude: 9.03762,
                name: "Kirkevoll bru".into(),
            },
            start: NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2020, 1, 10).unwrap(),
            resolution: Resolution::Daily,
            variables: vec!["flow".into()],
            credential_env: crate::ingest::HYDAPI_KEY_ENV.into(),
        }
    }

    fn series() -> TimeSeries {
        TimeSeries::new(
            utc_midnight(NaiveDate::from_ymd_opt(2020, 1, 1).unwrap()),
            Resolution::Daily,
            vec!["flow".into()],
            vec!["m³/s".into()],
            (0..10).map(|d| vec![Some(d as f64 + 0.5)]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn keys_are_deterministic_and_filesystem_safe() {
        let key = Cache::key("flow", &request());
        assert_eq!(key, Cache::key("flow", &request()));
        assert!(key
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '+'));
    }

    #[test]
    fn store_then_lookup_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let req = request();
        let key = Cache::key("flow", &req);
        assert!(cache.lookup(&key).unwrap().is_none());
        cache.store(&key, "flow", &req, &series()).unwrap();
        let (cached, _) = cache.lookup(&key).unwrap().unwrap();
        assert_eq!(cached, series());
    }

    #[test]
    fn store_is_write_once() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let req = request();
        let key = Cache::key("flow", &req);
        cache.store(&key, "flow", &req, &series()).unwrap();
        let first = std::fs::read(cache.csv_path(&key)).unwrap();

        let mut other = series();
        other = other.with_units(vec!["bogus".into()]).unwrap();
        cache.store(&key, "flow", &req, &other).unwrap();
        assert_eq!(std::fs::read(cache.csv_path(&key)).unwrap(), first);
    }
}
