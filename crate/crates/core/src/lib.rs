//! Daily-to-hourly river flow disaggregation.
//!
//! The model converts daily-average flow into hourly flow using hourly
//! weather as the indicator series, trained on daily flow labels alone. An
//! LSTM digests six days of daily weather+flow context; a shared
//! feedforward head turns the LSTM summary plus a weather row into a flow
//! value — once with the target day's daily weather (daily loss), 24 times
//! with its hourly weather rows (supervised through their mean). After
//! inverse scaling, an additive mean correction pins each day's hourly
//! mean to the observed daily average.
//!
//! Crate layout:
//! - [`timeseries`], [`scaler`], [`window`]: series handling and the
//!   6+1-day windows the model consumes
//! - [`neuralnet`]: LSTM, feedforward net, Adam, gradient checking
//! - [`disagg`]: the model, training, post-processing, checkpoints
//! - [`ingest`]: HydAPI flow, Open-Meteo weather, cache, synthetic data
//! - [`eval`]: linear-interpolation baseline, metrics, figure emission

pub mod disagg;
pub mod eval;
pub mod ingest;
pub mod neuralnet;
pub mod scaler;
pub mod timeseries;
pub mod window;

pub use disagg::{
    mean_correct, train, Checkpoint, DisaggModel, DisaggResult, DisaggRun, LossBreakdown,
    TrainConfig, TrainOutcome,
};
pub use eval::{compare_methods, linear_interpolate, EvalReport};
pub use ingest::{synth_generate, FetchRequest, StationSpec, SynthConfig};
pub use scaler::Scaler;
pub use timeseries::{AggregateRule, Resolution, TimeSeries};
pub use window::{build_windows, FeatureWindow, WindowSet};
