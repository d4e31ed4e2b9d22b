//! Training loop: full-batch gradients of the mean total loss, Adam
//! updates, deterministic for a fixed seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DisaggError, DisaggModel, LossBreakdown};
use crate::neuralnet::{Activation, AdamConfig, AdamState, FfnParams, LstmParams, ParamUpdate};
use crate::scaler::Scaler;
use crate::window::WindowSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub hidden_size: usize,
    pub ffn_hidden: Vec<usize>,
    pub learning_rate: f64,
    pub seed: u64,
    pub context_days: usize,
    /// Chronological split: the first `train_fraction` of windows train,
    /// the rest are held out for evaluation.
    pub train_fraction: f64,
    pub loss1_weight: f64,
    pub loss2_weight: f64,
    pub std_floor: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            hidden_size: 16,
            ffn_hidden: vec![32, 32],
            learning_rate: 1e-3,
            seed: 42,
            context_days: 6,
            train_fraction: 0.8,
            loss1_weight: 1.0,
            loss2_weight: 1.0,
            std_floor: crate::scaler::DEFAULT_STD_FLOOR,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), DisaggError> {
        let bad = |what: &str| Err(DisaggError::BadConfig { what: what.into() });
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return bad("train_fraction must lie in (0, 1]");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive and finite");
        }
        if self.hidden_size == 0 {
            return bad("hidden_size must be at least 1");
        }
        if self.context_days == 0 {
            return bad("context_days must be at least 1");
        }
        if !(self.loss1_weight.is_finite() && self.loss2_weight.is_finite())
            || self.loss1_weight < 0.0
            || self.loss2_weight < 0.0
        {
            return bad("loss weights must be finite and non-negative");
        }
        if self.std_floor.is_nan() || self.std_floor <= 0.0 {
            return bad("std_floor must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: DisaggModel,
    /// One entry per epoch: mean weighted losses over the training split,
    /// evaluated at the parameters that produced that epoch's update.
    pub history: Vec<LossBreakdown>,
    pub n_train: usize,
    pub optimizer: AdamState,
}

/// Fit scalers on the training split, initialize seeded parameters and run
/// `epochs` full-batch Adam steps. The hourly branch never sees hourly flow
/// labels; its supervision is the daily mean (loss 2).
pub fn train(windows: &WindowSet, config: &TrainConfig) -> Result<TrainOutcome, DisaggError> {
    config.validate()?;
    if windows.windows.is_empty() {
        return Err(DisaggError::NoWindows);
    }
    if windows.context_days != config.context_days {
        return Err(DisaggError::BadConfig {
            what: format!(
                "windows were built with context_days={}, config says {}",
                windows.context_days, config.context_days
            ),
        });
    }

    let n = windows.windows.len();
    let n_train = ((n as f64 * config.train_fraction).floor() as usize).clamp(1, n);
    let train_windows = &windows.windows[..n_train];
    let n_weather = windows.weather_names.len();

    // Scalers see the training split only.
    let daily_weather_rows: Vec<&[f64]> = train_windows
        .iter()
        .flat_map(|w| {
            w.context
                .iter()
                .map(move |row| &row[..n_weather])
                .chain(std::iter::once(w.target_daily_weather.as_slice()))
        })
        .collect();
    let daily_weather_scaler = Scaler::fit_rows(
        windows.weather_names.clone(),
        daily_weather_rows,
        config.std_floor,
    )?;

    let hourly_rows: Vec<&[f64]> = train_windows
        .iter()
        .flat_map(|w| w.target_hourly_weather.iter().map(Vec::as_slice))
        .collect();
    let hourly_weather_scaler =
        Scaler::fit_rows(windows.weather_names.clone(), hourly_rows, config.std_floor)?;

    let flow_rows: Vec<Vec<f64>> = train_windows
        .iter()
        .flat_map(|w| {
            w.context
                .iter()
                .map(move |row| vec![row[n_weather]])
                .chain(std::iter::once(vec![w.target_daily_flow]))
        })
        .collect();
    let flow_scaler = Scaler::fit_rows(
        vec!["flow".to_string()],
        flow_rows.iter().map(Vec::as_slice),
        config.std_floor,
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let lstm = LstmParams::init(n_weather + 1, config.hidden_size, &mut rng);
    let mut ffn_sizes = vec![config.hidden_size + n_weather];
    ffn_sizes.extend_from_slice(&config.ffn_hidden);
    ffn_sizes.push(1);
    let ffn = FfnParams::init(ffn_sizes, Activation::Tanh, &mut rng);

    let mut model = DisaggModel {
        lstm,
        ffn,
        daily_weather_scaler,
        hourly_weather_scaler,
        flow_scaler,
        weather_names: windows.weather_names.clone(),
        context_days: config.context_days,
        seed: config.seed,
    };

    let names = model.tensor_names();
    let lens = model.tensor_lens();
    let shapes: Vec<(&str, usize)> = names
        .iter()
        .map(String::as_str)
        .zip(lens.iter().copied())
        .collect();
    let mut optimizer = AdamState::new(
        AdamConfig::with_learning_rate(config.learning_rate),
        &shapes,
    );

    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let (entry, grads) =
            model.batch_gradients(train_windows, config.loss1_weight, config.loss2_weight)?;
        if !entry.total.is_finite() {
            return Err(DisaggError::Diverged {
                epoch,
                loss: entry.total,
            });
        }
        history.push(entry);

        let mut updates: Vec<ParamUpdate<'_>> = Vec::with_capacity(names.len());
        updates.push(ParamUpdate {
            name: &names[0],
            values: model.lstm.w_input.data_mut(),
            grads: grads.lstm.w_input.data(),
        });
        updates.push(ParamUpdate {
            name: &names[1],
            values: model.lstm.w_hidden.data_mut(),
            grads: grads.lstm.w_hidden.data(),
        });
        updates.push(ParamUpdate {
            name: &names[2],
            values: &mut model.lstm.bias,
            grads: &grads.lstm.bias,
        });
        for (l, (layer, glayer)) in model
            .ffn
            .layers
            .iter_mut()
            .zip(&grads.ffn.layers)
            .enumerate()
        {
            updates.push(ParamUpdate {
                name: &names[3 + 2 * l],
                values: layer.weights.data_mut(),
                grads: glayer.weights.data(),
            });
            updates.push(ParamUpdate {
                name: &names[4 + 2 * l],
                values: &mut layer.bias,
                grads: &glayer.bias,
            });
        }
        optimizer.apply(&mut updates)?;
    }

    Ok(TrainOutcome {
        model,
        history,
        n_train,
        optimizer,
    })
}

/// Index where the chronological train/test split falls for `n` windows.
pub fn split_index(n: usize, train_fraction: f64) -> usize {
    ((n as f64 * train_fraction).floor() as usize).clamp(1, n.max(1))
}
