//! Layered run configuration: CLI flags override the JSON config file,
//! which overrides built-in defaults. The effective configuration is
//! echoed into every output directory so a run can be reproduced from its
//! artifacts alone.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use flowdisagg_core::ingest::{StationSpec, SynthConfig};
use flowdisagg_core::timeseries::AggregateRule;
use flowdisagg_core::TrainConfig;

use crate::CliError;

/// Kirkevoll bru case-study defaults. The coordinates are the station's;
/// the HydAPI station identifier is a placeholder to be replaced with the
/// real id for live fetches.
pub const DEFAULT_STATION_ID: &str = "16.193.0";
pub const DEFAULT_STATION_NAME: &str = "Kirkevoll bru";
pub const DEFAULT_LATITUDE: f64 = 59.69003;
pub const DEFAULT_LONGITUDE: f64 = 9.03762;
pub const DEFAULT_START: (i32, u32, u32) = (2018, 12, 4);
pub const DEFAULT_END: (i32, u32, u32) = (2021, 1, 7);

pub fn default_variables() -> Vec<String> {
    vec!["precipitation".to_string(), "temperature_2m".to_string()]
}

/// Optional JSON config file. Every field may be omitted.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub cache_dir: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub station: Option<StationSpec>,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    pub variables: Option<Vec<String>>,
    /// Per-variable daily aggregation overrides ("mean" or "sum").
    pub aggregation: Option<HashMap<String, AggregateRule>>,
    pub train: Option<TrainConfig>,
    pub synth: Option<SynthConfig>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::config(format!("cannot read config {}: {e}", p.display()))
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::config(format!("bad config {}: {e}", p.display())))
            }
        }
    }
}

/// Everything a run actually used, echoed as JSON for provenance.
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveConfig {
    pub command: String,
    pub seed: u64,
    pub offline: bool,
    pub out_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub station: Option<StationSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<NaiveDate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end: Option<NaiveDate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variables: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthConfig>,
}

impl EffectiveConfig {
    pub fn new(command: &str, seed: u64, offline: bool, out_dir: &Path) -> Self {
        Self {
            command: command.to_string(),
            seed,
            offline,
            out_dir: out_dir.to_path_buf(),
            cache_dir: None,
            data_dir: None,
            station: None,
            start: None,
            end: None,
            variables: None,
            train: None,
            synth: None,
        }
    }

    /// Write `effective_config.json` into the output directory.
    pub fn echo(&self) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.out_dir)
            .map_err(|e| CliError::config(format!("cannot create output dir: {e}")))?;
        let path = self.out_dir.join("effective_config.json");
        let mut text = serde_json::to_string_pretty(self).expect("config serializes");
        text.push('\n');
        std::fs::write(&path, text)
            .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }
}

/// Daily aggregation rule for a weather variable: precipitation-like
/// quantities accumulate, everything else averages.
pub fn default_rule(variable: &str) -> AggregateRule {
    let accumulating = ["precip", "rain", "snow"];
    if accumulating.iter().any(|k| variable.contains(k)) {
        AggregateRule::Sum
    } else {
        AggregateRule::Mean
    }
}

/// Assemble the rule map for a variable list, honoring config overrides.
pub fn aggregation_rules(
    variables: &[String],
    overrides: Option<&HashMap<String, AggregateRule>>,
) -> HashMap<String, AggregateRule> {
    variables
        .iter()
        .map(|v| {
            let rule = overrides
                .and_then(|m| m.get(v).copied())
                .unwrap_or_else(|| default_rule(v));
            (v.clone(), rule)
        })
        .collect()
}
