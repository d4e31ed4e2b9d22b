//! `disagg`: load a checkpoint, disaggregate a span of days, write
//! results.csv.

use std::path::PathBuf;

use flowdisagg_core::disagg::{split_index, write_results_csv, Checkpoint, DisaggRun};

use crate::config::{aggregation_rules, EffectiveConfig, FileConfig};
use crate::{Cli, CliError, DisaggArgs, SplitChoice};

pub fn run(cli: &Cli, file: &FileConfig, args: &DisaggArgs) -> Result<(), CliError> {
    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let checkpoint = Checkpoint::load(&args.checkpoint)?;
    let train_config = checkpoint.train_config.clone();
    let expected_windows = checkpoint.n_windows;
    let model = checkpoint.into_model();

    let mut effective = EffectiveConfig::new("disagg", model.seed, cli.offline, &out_dir);
    let data_dir_echo = super::resolve_data_dir(args.data_dir.clone(), file)?;
    effective.data_dir = Some(data_dir_echo);
    effective.train = Some(train_config.clone());
    effective.echo()?;

    let rules = aggregation_rules(
        file.variables.as_deref().unwrap_or(&[]),
        file.aggregation.as_ref(),
    );
    let data_dir = super::resolve_data_dir(args.data_dir.clone(), file)?;
    let mut data = super::load_data_dir(&data_dir, &rules)?;
    let (daily_weather, daily_flow) =
        super::align_daily_spans(&data.daily_weather, &data.daily_flow)?;
    data.daily_weather = daily_weather;
    data.daily_flow = daily_flow;
    let windows = super::build_window_set(&data, model.context_days)?;

    let selected: Vec<usize> = if args.start.is_some() || args.end.is_some() {
        (0..windows.len())
            .filter(|&i| {
                let day = windows.windows[i].day_id;
                args.start.is_none_or(|s| day >= s) && args.end.is_none_or(|e| day <= e)
            })
            .collect()
    } else {
        match args.split {
            SplitChoice::All => (0..windows.len()).collect(),
            SplitChoice::Train | SplitChoice::Test => {
                if windows.len() != expected_windows {
                    return Err(CliError::config(format!(
                        "data dir yields {} windows but the checkpoint was trained on {}; \
                         use --start/--end or --split all to disaggregate a different dataset",
                        windows.len(),
                        expected_windows
                    )));
                }
                let cut = split_index(windows.len(), train_config.train_fraction);
                match args.split {
                    SplitChoice::Train => (0..cut).collect(),
                    _ => (cut..windows.len()).collect(),
                }
            }
        }
    };
    if selected.is_empty() {
        return Err(CliError::config("no windows in the selected span"));
    }

    let mut runs = Vec::with_capacity(selected.len());
    let mut negative_hours = 0usize;
    let mut max_conservation_error = 0.0f64;
    for &i in &selected {
        let window = &windows.windows[i];
        let result = model.disaggregate_day(window)?;
        negative_hours += result
            .hourly_flow_corrected
            .iter()
            .filter(|v| **v < 0.0)
            .count();
        let mean = result.hourly_flow_corrected.iter().sum::<f64>() / 24.0;
        let err =
            (mean - result.daily_avg_observed).abs() / result.daily_avg_observed.abs().max(1.0);
        max_conservation_error = max_conservation_error.max(err);
        runs.push(DisaggRun {
            result,
            truth: window.target_hourly_flow.clone(),
        });
    }

    std::fs::create_dir_all(&out_dir)?;
    let results_path = out_dir.join("results.csv");
    let mut f = std::fs::File::create(&results_path)?;
    write_results_csv(&runs, &mut f)?;

    println!(
        "disagg days={} negative_hours={} max_conservation_error={} results={}",
        runs.len(),
        negative_hours,
        max_conservation_error,
        results_path.display()
    );
    Ok(())
}
