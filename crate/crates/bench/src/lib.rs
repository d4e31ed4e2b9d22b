//! Shared setup for the pipeline benchmarks (see `benches/pipeline.rs`).

use flowdisagg_core::ingest::{synth_generate, SynthConfig};
use flowdisagg_core::window::{build_windows, WindowSet};
use flowdisagg_core::{train, DisaggModel, TrainConfig};

pub fn bench_windows(n_days: usize) -> WindowSet {
    let data = synth_generate(&SynthConfig {
        n_days,
        ..SynthConfig::default()
    })
    .expect("synth");
    build_windows(
        &data.daily_weather,
        &data.daily_flow,
        &data.hourly_weather,
        Some(&data.hourly_flow),
        6,
    )
    .expect("windows")
}

pub fn bench_model(windows: &WindowSet, epochs: usize) -> DisaggModel {
    train(
        windows,
        &TrainConfig {
            epochs,
            ..TrainConfig::default()
        },
    )
    .expect("train")
    .model
}
