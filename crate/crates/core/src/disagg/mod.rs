//! The flow disaggregation model: an LSTM summarizes six days of daily
//! weather+flow context, a shared feedforward head maps that summary
//! concatenated with weather onto flow. The daily branch feeds the head the
//! target day's daily weather; the hourly branch feeds it each of the 24
//! hourly weather rows while reusing the same LSTM hidden state. Training
//! needs only daily flow labels: the hourly branch is supervised through
//! the mean of its 24 predictions.

mod checkpoint;
mod results;
mod train;

pub use checkpoint::{Checkpoint, CheckpointError, CHECKPOINT_FORMAT_VERSION};
pub use results::{read_results_csv, write_results_csv, DisaggRun};
pub use train::{split_index, train, TrainConfig, TrainOutcome};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::neuralnet::{
    mse_loss, FfnCache, FfnGrads, FfnParams, LstmCache, LstmGrads, LstmParams, NeuralError,
};
use crate::scaler::{Scaler, ScalerError};
use crate::window::{FeatureWindow, HOURS_PER_DAY};

#[derive(Debug, Error)]
pub enum DisaggError {
    #[error("window {day_id}: {got} weather features, model expects {expected}")]
    SchemaMismatch {
        day_id: NaiveDate,
        expected: usize,
        got: usize,
    },
    #[error("window {day_id}: {got} context rows, model expects {expected}")]
    ContextMismatch {
        day_id: NaiveDate,
        expected: usize,
        got: usize,
    },
    #[error("hourly block must have 24 rows, got {got}")]
    HourlyCount { got: usize },
    #[error("non-finite value in {what}")]
    NonFinite { what: String },
    #[error("cannot train on an empty window list")]
    NoWindows,
    #[error("invalid train config: {what}")]
    BadConfig { what: String },
    #[error("training diverged at epoch {epoch}: total loss {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("corrected mean {corrected_mean} deviates from daily average {daily_avg} on {day_id}")]
    ConservationViolated {
        day_id: NaiveDate,
        corrected_mean: f64,
        daily_avg: f64,
    },
    #[error("results csv line {line}: {message}")]
    ResultsCsv { line: usize, message: String },
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Scaler(#[from] ScalerError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-window (or per-epoch mean) loss components. `total` is always the
/// exact f64 sum of the two stored components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub loss1: f64,
    pub loss2: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn new(loss1: f64, loss2: f64) -> Self {
        Self {
            loss1,
            loss2,
            total: loss1 + loss2,
        }
    }
}

/// One disaggregated day: the raw model output and the mean-corrected
/// hourly flows, both in physical units (m³/s).
#[derive(Debug, Clone, PartialEq)]
pub struct DisaggResult {
    pub day_id: NaiveDate,
    pub hourly_flow_raw: Vec<f64>,
    pub hourly_flow_corrected: Vec<f64>,
    pub daily_avg_observed: f64,
}

impl DisaggResult {
    pub fn new(
        day_id: NaiveDate,
        hourly_flow_raw: Vec<f64>,
        hourly_flow_corrected: Vec<f64>,
        daily_avg_observed: f64,
    ) -> Result<Self, DisaggError> {
        let mean = hourly_flow_corrected.iter().sum::<f64>() / hourly_flow_corrected.len() as f64;
        if (mean - daily_avg_observed).abs() > 1e-9 * daily_avg_observed.abs().max(1.0) {
            return Err(DisaggError::ConservationViolated {
                day_id,
                corrected_mean: mean,
                daily_avg: daily_avg_observed,
            });
        }
        Ok(Self {
            day_id,
            hourly_flow_raw,
            hourly_flow_corrected,
            daily_avg_observed,
        })
    }
}

/// Additive mean correction: shift all 24 values by the same constant so
/// their mean lands exactly on the observed daily average. Pairwise
/// differences are untouched.
pub fn mean_correct(raw: &[f64], daily_avg: f64) -> Result<Vec<f64>, DisaggError> {
    if raw.len() != HOURS_PER_DAY {
        return Err(DisaggError::HourlyCount { got: raw.len() });
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(DisaggError::NonFinite {
            what: "mean_correct raw values".into(),
        });
    }
    if !daily_avg.is_finite() {
        return Err(DisaggError::NonFinite {
            what: "mean_correct daily average".into(),
        });
    }
    let mean = raw.iter().sum::<f64>() / HOURS_PER_DAY as f64;
    let shift = daily_avg - mean;
    Ok(raw.iter().map(|v| v + shift).collect())
}

/// Trained model parameters plus the fitted scalers, immutable after
/// training; all prediction entry points are pure.
#[derive(Debug, Clone, PartialEq)]
pub struct DisaggModel {
    pub lstm: LstmParams,
    pub ffn: FfnParams,
    pub daily_weather_scaler: Scaler,
    pub hourly_weather_scaler: Scaler,
    pub flow_scaler: Scaler,
    pub weather_names: Vec<String>,
    pub context_days: usize,
    pub seed: u64,
}

/// Forward state for one window, kept for the backward pass.
pub(crate) struct WindowForward {
    pub lstm_cache: LstmCache,
    pub daily_pred: f64,
    pub daily_cache: FfnCache,
    pub hourly_preds: Vec<f64>,
    pub hourly_caches: Vec<FfnCache>,
    pub target_z: f64,
}

/// Gradients for every tensor of the model, shape-congruent with it.
#[derive(Debug, Clone)]
pub struct ModelGrads {
    pub lstm: LstmGrads,
    pub ffn: FfnGrads,
}

impl ModelGrads {
    pub fn zeros_like(model: &DisaggModel) -> Self {
        Self {
            lstm: LstmGrads::zeros(model.lstm.input_size(), model.lstm.hidden_size()),
            ffn: FfnGrads::zeros_like(&model.ffn),
        }
    }

    pub fn add_assign(&mut self, other: &ModelGrads) {
        self.lstm.add_assign(&other.lstm);
        self.ffn.add_assign(&other.ffn);
    }

    pub fn scale(&mut self, factor: f64) {
        self.lstm.scale(factor);
        self.ffn.scale(factor);
    }
}

struct ScaledWindow {
    context: Vec<Vec<f64>>,
    daily_weather: Vec<f64>,
    hourly_weather: Vec<Vec<f64>>,
    target_z: f64,
}

impl DisaggModel {
    pub fn n_weather(&self) -> usize {
        self.weather_names.len()
    }

    pub fn hidden_size(&self) -> usize {
        self.lstm.hidden_size()
    }

    fn check_window(&self, window: &FeatureWindow) -> Result<(), DisaggError> {
        if window.n_weather() != self.n_weather() {
            return Err(DisaggError::SchemaMismatch {
                day_id: window.day_id,
                expected: self.n_weather(),
                got: window.n_weather(),
            });
        }
        if window.context.len() != self.context_days {
            return Err(DisaggError::ContextMismatch {
                day_id: window.day_id,
                expected: self.context_days,
                got: window.context.len(),
            });
        }
        if window.target_hourly_weather.len() != HOURS_PER_DAY {
            return Err(DisaggError::HourlyCount {
                got: window.target_hourly_weather.len(),
            });
        }
        Ok(())
    }

    fn scale_window(&self, window: &FeatureWindow) -> Result<ScaledWindow, DisaggError> {
        self.check_window(window)?;
        let n_w = self.n_weather();
        let context = window
            .context
            .iter()
            .map(|row| {
                let mut scaled = self.daily_weather_scaler.apply_row(&row[..n_w])?;
                scaled.push(self.flow_scaler.apply_value(0, row[n_w]));
                Ok(scaled)
            })
            .collect::<Result<Vec<_>, ScalerError>>()?;
        let daily_weather = self
            .daily_weather_scaler
            .apply_row(&window.target_daily_weather)?;
        let hourly_weather = window
            .target_hourly_weather
            .iter()
            .map(|row| self.hourly_weather_scaler.apply_row(row))
            .collect::<Result<Vec<_>, ScalerError>>()?;
        Ok(ScaledWindow {
            context,
            daily_weather,
            hourly_weather,
            target_z: self.flow_scaler.apply_value(0, window.target_daily_flow),
        })
    }

    pub(crate) fn forward_window(
        &self,
        window: &FeatureWindow,
    ) -> Result<WindowForward, DisaggError> {
        let scaled = self.scale_window(window)?;
        let (hidden, lstm_cache) = self.lstm.forward(&scaled.context)?;

        let mut daily_input = hidden.clone();
        daily_input.extend_from_slice(&scaled.daily_weather);
        let (daily_pred, daily_cache) = self.ffn.forward(&daily_input)?;

        let mut hourly_preds = Vec::with_capacity(HOURS_PER_DAY);
        let mut hourly_caches = Vec::with_capacity(HOURS_PER_DAY);
        for row in &scaled.hourly_weather {
            let mut input = hidden.clone();
            input.extend_from_slice(row);
            let (pred, cache) = self.ffn.forward(&input)?;
            hourly_preds.push(pred);
            hourly_caches.push(cache);
        }

        Ok(WindowForward {
            lstm_cache,
            daily_pred,
            daily_cache,
            hourly_preds,
            hourly_caches,
            target_z: scaled.target_z,
        })
    }

    /// Normalized daily flow prediction for the target day.
    pub fn daily_forward(&self, window: &FeatureWindow) -> Result<f64, DisaggError> {
        Ok(self.forward_window(window)?.daily_pred)
    }

    /// The 24 normalized hourly flow predictions for the target day. The
    /// same final LSTM hidden state is reused for every hour; only the
    /// concatenated weather row varies.
    pub fn hourly_forward(&self, window: &FeatureWindow) -> Result<Vec<f64>, DisaggError> {
        Ok(self.forward_window(window)?.hourly_preds)
    }

    /// loss1 checks the daily branch, loss2 checks the mean of the 24
    /// hourly predictions, both against the scaled daily flow.
    pub fn compute_losses(&self, window: &FeatureWindow) -> Result<LossBreakdown, DisaggError> {
        let fwd = self.forward_window(window)?;
        Ok(losses_of(&fwd))
    }

    /// Gradients of w1*loss1 + w2*loss2 for one window.
    pub(crate) fn backward_window(
        &self,
        fwd: &WindowForward,
        loss1_weight: f64,
        loss2_weight: f64,
    ) -> Result<ModelGrads, DisaggError> {
        let hidden_size = self.hidden_size();
        let mut grads = ModelGrads::zeros_like(self);
        let mut d_hidden = vec![0.0; hidden_size];

        // Daily branch: d(loss1)/d(daily_pred) = 2 (pred - target).
        let d_daily = loss1_weight * 2.0 * (fwd.daily_pred - fwd.target_z);
        let (ffn_grads, d_input) = self.ffn.backward(&fwd.daily_cache, d_daily)?;
        grads.ffn.add_assign(&ffn_grads);
        for (acc, d) in d_hidden.iter_mut().zip(&d_input[..hidden_size]) {
            *acc += d;
        }

        // Hourly branch: loss2 = (mean - target)^2, so every hourly
        // prediction carries the same gradient 2 (mean - target) / 24.
        let mean = fwd.hourly_preds.iter().sum::<f64>() / HOURS_PER_DAY as f64;
        let d_each = loss2_weight * 2.0 * (mean - fwd.target_z) / HOURS_PER_DAY as f64;
        for cache in &fwd.hourly_caches {
            let (ffn_grads, d_input) = self.ffn.backward(cache, d_each)?;
            grads.ffn.add_assign(&ffn_grads);
            for (acc, d) in d_hidden.iter_mut().zip(&d_input[..hidden_size]) {
                *acc += d;
            }
        }

        grads.lstm = self.lstm.backward(&fwd.lstm_cache, &d_hidden)?;
        Ok(grads)
    }

    /// Mean weighted loss and its gradients over a window batch: the exact
    /// objective one training epoch optimizes.
    pub fn batch_gradients(
        &self,
        windows: &[FeatureWindow],
        loss1_weight: f64,
        loss2_weight: f64,
    ) -> Result<(LossBreakdown, ModelGrads), DisaggError> {
        if windows.is_empty() {
            return Err(DisaggError::NoWindows);
        }
        let mut grads = ModelGrads::zeros_like(self);
        let mut sum_loss1 = 0.0;
        let mut sum_loss2 = 0.0;
        for window in windows {
            let fwd = self.forward_window(window)?;
            let lb = losses_of(&fwd);
            sum_loss1 += lb.loss1;
            sum_loss2 += lb.loss2;
            let wg = self.backward_window(&fwd, loss1_weight, loss2_weight)?;
            grads.add_assign(&wg);
        }
        let scale = 1.0 / windows.len() as f64;
        grads.scale(scale);
        Ok((
            LossBreakdown::new(
                loss1_weight * sum_loss1 * scale,
                loss2_weight * sum_loss2 * scale,
            ),
            grads,
        ))
    }

    /// Mean weighted total loss over a window batch (forward only).
    pub fn batch_total_loss(
        &self,
        windows: &[FeatureWindow],
        loss1_weight: f64,
        loss2_weight: f64,
    ) -> Result<f64, DisaggError> {
        if windows.is_empty() {
            return Err(DisaggError::NoWindows);
        }
        let mut sum_loss1 = 0.0;
        let mut sum_loss2 = 0.0;
        for window in windows {
            let lb = self.compute_losses(window)?;
            sum_loss1 += lb.loss1;
            sum_loss2 += lb.loss2;
        }
        let scale = 1.0 / windows.len() as f64;
        Ok(loss1_weight * sum_loss1 * scale + loss2_weight * sum_loss2 * scale)
    }

    /// Predict, inverse-scale to physical units, then mean-correct so the
    /// corrected hours average exactly to the observed daily flow.
    pub fn disaggregate_day(&self, window: &FeatureWindow) -> Result<DisaggResult, DisaggError> {
        let preds_z = self.hourly_forward(window)?;
        let raw: Vec<f64> = preds_z
            .iter()
            .map(|&z| self.flow_scaler.invert_value(0, z))
            .collect();
        let corrected = mean_correct(&raw, window.target_daily_flow)?;
        DisaggResult::new(window.day_id, raw, corrected, window.target_daily_flow)
    }

    /// Fixed tensor order used by the optimizer, checkpoints, flattening
    /// and the gradient checker.
    pub fn tensor_names(&self) -> Vec<String> {
        let mut names = vec![
            "lstm.w_input".to_string(),
            "lstm.w_hidden".to_string(),
            "lstm.bias".to_string(),
        ];
        for l in 0..self.ffn.layers.len() {
            names.push(format!("ffn.{l}.weights"));
            names.push(format!("ffn.{l}.bias"));
        }
        names
    }

    pub fn tensor_lens(&self) -> Vec<usize> {
        let mut lens = vec![
            self.lstm.w_input.data().len(),
            self.lstm.w_hidden.data().len(),
            self.lstm.bias.len(),
        ];
        for layer in &self.ffn.layers {
            lens.push(layer.weights.data().len());
            lens.push(layer.bias.len());
        }
        lens
    }

    pub fn param_count(&self) -> usize {
        self.tensor_lens().iter().sum()
    }

    /// All parameters as one flat vector, in [`DisaggModel::tensor_names`]
    /// order with row-major matrices.
    pub fn flatten_params(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.param_count());
        flat.extend_from_slice(self.lstm.w_input.data());
        flat.extend_from_slice(self.lstm.w_hidden.data());
        flat.extend_from_slice(&self.lstm.bias);
        for layer in &self.ffn.layers {
            flat.extend_from_slice(layer.weights.data());
            flat.extend_from_slice(&layer.bias);
        }
        flat
    }

    pub fn set_params_from_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.param_count(), "flat parameter length");
        let mut offset = 0;
        let mut take = |dst: &mut [f64]| {
            dst.copy_from_slice(&flat[offset..offset + dst.len()]);
            offset += dst.len();
        };
        take(self.lstm.w_input.data_mut());
        take(self.lstm.w_hidden.data_mut());
        take(&mut self.lstm.bias);
        for layer in &mut self.ffn.layers {
            take(layer.weights.data_mut());
            take(&mut layer.bias);
        }
    }

    pub fn flatten_grads(&self, grads: &ModelGrads) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.param_count());
        flat.extend_from_slice(grads.lstm.w_input.data());
        flat.extend_from_slice(grads.lstm.w_hidden.data());
        flat.extend_from_slice(&grads.lstm.bias);
        for layer in &grads.ffn.layers {
            flat.extend_from_slice(layer.weights.data());
            flat.extend_from_slice(&layer.bias);
        }
        flat
    }
}

pub(crate) fn losses_of(fwd: &WindowForward) -> LossBreakdown {
    let loss1 = mse_loss(&[fwd.daily_pred], &[fwd.target_z]).expect("non-empty");
    let mean = fwd.hourly_preds.iter().sum::<f64>() / HOURS_PER_DAY as f64;
    let loss2 = mse_loss(&[mean], &[fwd.target_z]).expect("non-empty");
    LossBreakdown::new(loss1, loss2)
}
