//! Model checkpoints: one JSON document holding dimensions, parameters
//! (row-major), optimizer state, scaler statistics and the training seed.
//! Floats serialize in shortest round-trip form, so load(save(m)) restores
//! bit-identical inference.

use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DisaggModel, TrainConfig, TrainOutcome};
use crate::neuralnet::{AdamState, FfnParams, LstmParams};
use crate::scaler::Scaler;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("checkpoint json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported checkpoint format version {got} (expected {expected})")]
    Version { expected: u32, got: u32 },
    #[error("inconsistent checkpoint: {what}")]
    Inconsistent { what: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub seed: u64,
    pub context_days: usize,
    pub weather_names: Vec<String>,
    pub hidden_size: usize,
    pub ffn_sizes: Vec<usize>,
    pub lstm: LstmParams,
    pub ffn: FfnParams,
    pub daily_weather_scaler: Scaler,
    pub hourly_weather_scaler: Scaler,
    pub flow_scaler: Scaler,
    pub optimizer: AdamState,
    pub train_config: TrainConfig,
    pub n_windows: usize,
    pub n_train: usize,
}

impl Checkpoint {
    pub fn from_outcome(outcome: &TrainOutcome, config: &TrainConfig, n_windows: usize) -> Self {
        let model = &outcome.model;
        Self {
            format_version: CHECKPOINT_FORMAT_VERSION,
            seed: model.seed,
            context_days: model.context_days,
            weather_names: model.weather_names.clone(),
            hidden_size: model.lstm.hidden_size(),
            ffn_sizes: model.ffn.sizes().to_vec(),
            lstm: model.lstm.clone(),
            ffn: model.ffn.clone(),
            daily_weather_scaler: model.daily_weather_scaler.clone(),
            hourly_weather_scaler: model.hourly_weather_scaler.clone(),
            flow_scaler: model.flow_scaler.clone(),
            optimizer: outcome.optimizer.clone(),
            train_config: config.clone(),
            n_windows,
            n_train: outcome.n_train,
        }
    }

    pub fn into_model(self) -> DisaggModel {
        DisaggModel {
            lstm: self.lstm,
            ffn: self.ffn,
            daily_weather_scaler: self.daily_weather_scaler,
            hourly_weather_scaler: self.hourly_weather_scaler,
            flow_scaler: self.flow_scaler,
            weather_names: self.weather_names,
            context_days: self.context_days,
            seed: self.seed,
        }
    }

    fn validate(&self) -> Result<(), CheckpointError> {
        let fail = |what: String| Err(CheckpointError::Inconsistent { what });
        if self.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(CheckpointError::Version {
                expected: CHECKPOINT_FORMAT_VERSION,
                got: self.format_version,
            });
        }
        let n_weather = self.weather_names.len();
        if self.lstm.input_size() != n_weather + 1 {
            return fail(format!(
                "lstm input size {} does not match {} weather features + flow",
                self.lstm.input_size(),
                n_weather
            ));
        }
        if self.lstm.hidden_size() != self.hidden_size {
            return fail("hidden_size disagrees with lstm parameters".into());
        }
        if self.ffn.sizes() != self.ffn_sizes.as_slice() {
            return fail("ffn_sizes disagrees with ffn parameters".into());
        }
        if self.ffn.input_size() != self.hidden_size + n_weather {
            return fail(format!(
                "ffn input size {} does not match hidden {} + weather {}",
                self.ffn.input_size(),
                self.hidden_size,
                n_weather
            ));
        }
        let h4 = 4 * self.hidden_size;
        let shapes_ok = self.lstm.w_input.rows() == h4
            && self.lstm.w_input.cols() == self.lstm.input_size()
            && self.lstm.w_input.data().len() == h4 * self.lstm.input_size()
            && self.lstm.w_hidden.rows() == h4
            && self.lstm.w_hidden.cols() == self.hidden_size
            && self.lstm.w_hidden.data().len() == h4 * self.hidden_size
            && self.lstm.bias.len() == h4;
        if !shapes_ok {
            return fail("lstm tensor shapes are internally inconsistent".into());
        }
        for (l, (layer, pair)) in self
            .ffn
            .layers
            .iter()
            .zip(self.ffn_sizes.windows(2))
            .enumerate()
        {
            let ok = layer.weights.rows() == pair[1]
                && layer.weights.cols() == pair[0]
                && layer.weights.data().len() == pair[0] * pair[1]
                && layer.bias.len() == pair[1];
            if !ok {
                return fail(format!("ffn layer {l} tensor shapes are inconsistent"));
            }
        }
        if self.daily_weather_scaler.names() != self.weather_names.as_slice()
            || self.hourly_weather_scaler.names() != self.weather_names.as_slice()
        {
            return fail("scaler feature order disagrees with weather_names".into());
        }
        if self.flow_scaler.width() != 1 {
            return fail("flow scaler must have exactly one feature".into());
        }
        let finite = self
            .lstm
            .w_input
            .data()
            .iter()
            .chain(self.lstm.w_hidden.data())
            .chain(&self.lstm.bias)
            .all(|v| v.is_finite())
            && self
                .ffn
                .layers
                .iter()
                .flat_map(|l| l.weights.data().iter().chain(&l.bias))
                .all(|v| v.is_finite());
        if !finite {
            return fail("non-finite parameter value".into());
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        self.validate()?;
        let file = std::fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let file = std::fs::File::open(path)?;
        let checkpoint: Checkpoint = serde_json::from_reader(BufReader::new(file))?;
        checkpoint.validate()?;
        Ok(checkpoint)
    }
}
